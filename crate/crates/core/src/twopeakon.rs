//! Regime classification for two interacting peakons.
//!
//! Notation: `M = α1 + α2`, `α12 = α1 - α2`, `β12 = β1 - β2` and
//! `B = exp(-|β12|)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::PeakonState;
use crate::expr::sign;
use crate::{Error, Result};

/// Tolerance for deciding that a parameter sits on a regime boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

const NU_BOUNCE_AT_COLLISION: f64 = 27.0 / 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoPeakonModel {
    ChP1,
    GchP2,
    GmchP1,
    GmchP2,
}

impl TwoPeakonModel {
    pub fn name(self) -> &'static str {
        match self {
            TwoPeakonModel::ChP1 => "ch_p1",
            TwoPeakonModel::GchP2 => "gch_p2",
            TwoPeakonModel::GmchP1 => "gmch_p1",
            TwoPeakonModel::GmchP2 => "gmch_p2",
        }
    }

    pub fn from_name(name: &str) -> Option<TwoPeakonModel> {
        [Self::ChP1, Self::GchP2, Self::GmchP1, Self::GmchP2].into_iter().find(|m| m.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// A momentum or amplitude combination vanishes and no taxonomy applies.
    Unclassified,
    Trivial,
    /// Separation reaches a minimum then grows in both time directions.
    Bounce,
    /// The bounce turning point is itself a collision.
    BounceAtCollision,
    /// Collision at finite time, separation unbounded in both directions.
    Collision,
    /// Collision at which the relative amplitude diverges.
    CollisionBlowup,
    /// Collision followed by amplitude blow-up as the separation tends to a limit.
    CollisionThenBlowup,
    /// Collision, then a separation maximum, then amplitude blow-up.
    CollisionTurningBlowup,
    ConstantSeparation,
    /// Bound pair in both asymptotic directions that collapses through a collision.
    BoundPairCollapse,
    /// Bound pair in one asymptotic direction only.
    BoundPairEscape,
    StationaryPair,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Landmarks {
    /// `|β12|` at the turning point, or the bound-pair separation.
    pub turning_separation: Option<f64>,
    pub collision: bool,
    /// Time of the collision relative to the initial state, when known.
    pub collision_time: Option<f64>,
    /// `|α12 / M|` at the collision.
    pub collision_relative_amplitude: Option<f64>,
    /// `|α12 / M|` as `|β12| → ∞`.
    pub asymptotic_relative_amplitude: Option<f64>,
    /// `|β̇12|` as `|β12| → ∞`.
    pub asymptotic_separation_rate: Option<f64>,
    /// Individual crest speeds far from the interaction.
    pub asymptotic_speeds: Option<[f64; 2]>,
    /// `|β12|` approached while `|α12|` diverges.
    pub blowup_separation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub model: TwoPeakonModel,
    pub regime: Regime,
    pub invariants: BTreeMap<String, f64>,
    pub landmarks: Landmarks,
}

impl RegimeReport {
    fn new(model: TwoPeakonModel, regime: Regime, invariants: &[(&str, f64)]) -> RegimeReport {
        RegimeReport {
            model,
            regime,
            invariants: invariants.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            landmarks: Landmarks::default(),
        }
    }
}

/// Root of `f` on `[lo, hi]` by bisection, given a sign change.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSignChange(lo, hi));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn ch_mu(m: f64, e: f64) -> Option<f64> {
    (m != 0.0).then(|| 2.0 * e / (m * m) - 1.0)
}

/// `E = (α12² (1 - B) + M² B) / 2`.
pub fn ch_energy(m: f64, a12: f64, b12: f64) -> f64 {
    let b = (-b12.abs()).exp();
    0.5 * (a12 * a12 * (1.0 - b) + m * m * b)
}

pub fn classify_ch(m: f64, e: f64) -> Result<RegimeReport> {
    let model = TwoPeakonModel::ChP1;
    let Some(mu) = ch_mu(m, e) else {
        return Ok(RegimeReport::new(model, Regime::Unclassified, &[("M", m), ("E", e)]));
    };
    if mu <= -1.0 {
        return Err(Error::InvalidArgument(format!("mu = {mu} needs E > 0")));
    }
    let mut r = RegimeReport::new(model, Regime::Trivial, &[("M", m), ("E", e), ("mu", mu)]);
    r.landmarks.asymptotic_separation_rate = Some((2.0 * e).sqrt());
    if mu.abs() <= BOUNDARY_TOL {
        return Ok(r);
    }
    if mu > 0.0 {
        r.regime = Regime::CollisionBlowup;
        r.landmarks.collision = true;
        r.landmarks.turning_separation = Some(0.0);
        r.landmarks.blowup_separation = Some(0.0);
    } else {
        r.regime = Regime::Bounce;
        r.landmarks.turning_separation = Some(-(1.0 + mu).ln());
    }
    Ok(r)
}

/// `|β̇12| = sqrt(1 - B) sqrt(2E - M² B)`.
pub fn ch_separation_rate(m: f64, e: f64, b12: f64) -> Result<f64> {
    let b = (-b12.abs()).exp();
    let radicand = 2.0 * e - m * m * b;
    if radicand < 0.0 {
        return Err(Error::InvalidArgument(format!("negative radicand {radicand}")));
    }
    Ok((1.0 - b).sqrt() * radicand.sqrt())
}

/// `(α̇12, β̇12)` for two gCH peakons at `p = 2`.
pub fn gch_p2_rates(m: f64, a12: f64, b12: f64) -> (f64, f64) {
    let b = (-b12.abs()).exp();
    let d = m * m - a12 * a12;
    let a_dot = 0.25 * sign(b12) * d * d * b * b;
    let b_dot = a12 * (3.0 * m * m + a12 * a12 + d * (4.0 - 3.0 * b) * b) / 6.0;
    (a_dot, b_dot)
}

/// `(C, ν)` with `ν = 9 M⁴ C`.
pub fn gch_p2_invariant(m: f64, a12: f64, b12: f64) -> Result<(f64, f64)> {
    let b = (-b12.abs()).exp();
    let (m2, x) = (m * m, a12 * a12);
    let den = 3.0 * m2 + x + (m2 - x) * b;
    if den == 0.0 {
        return Err(Error::InvalidArgument("degenerate gCH invariant denominator".into()));
    }
    let c = (3.0 * m2 + x + 3.0 * (m2 - x) * b) / den.powi(3);
    Ok((c, 9.0 * m2 * m2 * c))
}

fn nu_of(x: f64, b: f64) -> f64 {
    9.0 * (3.0 + x + 3.0 * (1.0 - x) * b) / (3.0 + x + (1.0 - x) * b).powi(3)
}

/// Root in `(0, 1]` of `ν (B + 3)³ = 27 (B + 1)`.
pub fn gch_p2_bounce_root(nu: f64) -> Result<f64> {
    bisect(|b| nu * (b + 3.0).powi(3) - 27.0 * (b + 1.0), 0.0, 1.0)
}

/// Root in `(1/3, 1)` of `48 ν B² (1 - B) = (1 - 3B)³`.
pub fn gch_p2_turning_root(nu: f64) -> Result<f64> {
    bisect(|b| 48.0 * nu * b * b * (1.0 - b) - (1.0 - 3.0 * b).powi(3), 1.0 / 3.0, 1.0)
}

/// `(α12 / M)²` at a turning point with `α12 ≠ 0`.
pub fn gch_p2_turning_amplitude_sq(b: f64) -> f64 {
    (3.0 * b * b - 4.0 * b - 3.0) / ((1.0 - b) * (1.0 - 3.0 * b))
}

pub fn classify_gch_p2(nu: f64) -> Result<RegimeReport> {
    if !(nu < 1.0) {
        return Err(Error::InvalidArgument(format!("nu = {nu} must be below 1")));
    }
    let mut r = RegimeReport::new(TwoPeakonModel::GchP2, Regime::Collision, &[("nu", nu)]);
    let l = &mut r.landmarks;
    if nu > BOUNDARY_TOL {
        l.asymptotic_relative_amplitude = Some((3.0 * (1.0 / nu.sqrt() - 1.0)).sqrt());
    }
    if (nu - NU_BOUNCE_AT_COLLISION).abs() <= BOUNDARY_TOL {
        r.regime = Regime::BounceAtCollision;
        l.collision = true;
        l.turning_separation = Some(0.0);
        l.collision_relative_amplitude = Some(0.0);
    } else if nu > NU_BOUNCE_AT_COLLISION {
        r.regime = Regime::Bounce;
        l.turning_separation = Some(-gch_p2_bounce_root(nu)?.ln());
    } else {
        l.collision = true;
        l.collision_relative_amplitude = Some(((27.0 - 32.0 * nu) / 9.0).sqrt());
        if nu.abs() <= BOUNDARY_TOL {
            r.regime = Regime::CollisionThenBlowup;
            l.blowup_separation = Some(3f64.ln());
        } else if nu < 0.0 {
            r.regime = Regime::CollisionTurningBlowup;
            l.turning_separation = Some(-gch_p2_turning_root(nu)?.ln());
            // On a level set ν < 0 the amplitude only diverges as B → 1.
            l.blowup_separation = Some(0.0);
        }
    }
    Ok(r)
}

/// `|α12|` such that a gCH p=2 pair with momentum `M` at separation `β12`
/// has invariant `ν`. The smallest such root is returned.
pub fn gch_p2_amplitude_for_nu(m: f64, nu: f64, b12: f64) -> Result<f64> {
    if m == 0.0 {
        return Err(Error::InvalidArgument("M must be non-zero".into()));
    }
    let b = (-b12.abs()).exp();
    let f = |x: f64| nu_of(x, b) - nu;
    if f(0.0) < 0.0 {
        return Err(Error::InvalidArgument(format!("nu = {nu} not reachable at separation {b12}")));
    }
    if f(0.0) == 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidArgument(format!("nu = {nu} not reachable at separation {b12}")));
        }
    }
    let lo = if hi > 1.0 { 0.5 * hi } else { 0.0 };
    Ok(bisect(f, lo, hi)?.sqrt() * m.abs())
}

pub fn gmch_p1_gamma(a1: f64, a2: f64) -> f64 {
    2.0 / 3.0 * (a1 * a1 - a2 * a2)
}

/// `(γ, σ)` for two gmCH peakons at `p = 2`.
pub fn gmch_p2_constants(a1: f64, a2: f64) -> (f64, f64) {
    let gamma = 8.0 / 15.0 * (a1.powi(4) - a2.powi(4));
    let n = a1 * a1 + a2 * a2;
    let sigma = if n == 0.0 { 0.0 } else { 5.0 * a1 * a2 / n };
    (gamma, sigma)
}

pub fn classify_gmch(p: u32, a1: f64, a2: f64, b12_0: f64) -> Result<RegimeReport> {
    let b0 = (-b12_0.abs()).exp();
    match p {
        1 => {
            let gamma = gmch_p1_gamma(a1, a2);
            let mut r = RegimeReport::new(TwoPeakonModel::GmchP1, Regime::Collision, &[("gamma", gamma)]);
            if gamma.abs() <= BOUNDARY_TOL * (a1 * a1 + a2 * a2) {
                r.regime = Regime::ConstantSeparation;
                let s = a1 * a1 * (2.0 / 3.0 + 2.0 * b0);
                r.landmarks.asymptotic_speeds = Some([s, s]);
            } else {
                r.landmarks.collision = true;
                r.landmarks.collision_time = Some(-b12_0 / gamma);
                r.landmarks.asymptotic_separation_rate = Some(gamma.abs());
                r.landmarks.asymptotic_speeds = Some([2.0 / 3.0 * a1 * a1, 2.0 / 3.0 * a2 * a2]);
            }
            Ok(r)
        }
        2 => {
            let (gamma, sigma) = gmch_p2_constants(a1, a2);
            let mut r = RegimeReport::new(
                TwoPeakonModel::GmchP2,
                Regime::Collision,
                &[("gamma", gamma), ("sigma", sigma)],
            );
            let l = &mut r.landmarks;
            if gamma.abs() <= BOUNDARY_TOL * (a1 * a1 + a2 * a2).powi(2) {
                r.regime = Regime::ConstantSeparation;
                let s = 8.0 / 15.0 * a1.powi(4) * (1.0 + 5.0 * b0 + 10.0 * b0 * b0);
                l.asymptotic_speeds = Some([s, s]);
                return Ok(r);
            }
            if sigma > -1.0 {
                l.collision = true;
                l.collision_time = Some(-separation_time_map(sigma, b12_0) / gamma);
                l.asymptotic_separation_rate = Some(gamma.abs());
                l.asymptotic_speeds = Some([8.0 / 15.0 * a1.powi(4), 8.0 / 15.0 * a2.powi(4)]);
                return Ok(r);
            }
            let pair = (-sigma).ln();
            l.turning_separation = Some(pair);
            let gap = b12_0.abs() - pair;
            if gap.abs() <= BOUNDARY_TOL * pair.max(1.0) {
                r.regime = Regime::StationaryPair;
            } else if gap < 0.0 {
                r.regime = Regime::BoundPairCollapse;
                l.collision = true;
                l.collision_time = Some(-separation_time_map(sigma, b12_0) / gamma);
            } else {
                r.regime = Regime::BoundPairEscape;
                l.asymptotic_separation_rate = Some(gamma.abs());
            }
            Ok(r)
        }
        _ => Err(Error::InvalidArgument(format!("gmCH two-peakon analysis covers p = 1, 2, got {p}"))),
    }
}

/// `1 + σ e^{-|b|}`, accurate near its zero at `|b| = ln(-σ)`.
fn separation_factor(sigma: f64, b: f64) -> f64 {
    let b = b.abs();
    if sigma < 0.0 {
        -((-sigma).ln() - b).exp_m1()
    } else {
        1.0 + sigma * (-b).exp()
    }
}

fn ln_separation_factor(sigma: f64, b: f64) -> f64 {
    if sigma < 0.0 {
        separation_factor(sigma, b).abs().ln()
    } else {
        (sigma * (-b.abs()).exp()).ln_1p()
    }
}

/// `T(b)` with `dT/db = 1 / (1 + σ e^{-|b|})` and `T(0) = 0`, so that
/// `T(β12(t)) = T(β12(0)) + γ t` along solutions.
fn separation_time_map(sigma: f64, b: f64) -> f64 {
    let phi = |w: f64| w + ln_separation_factor(sigma, w);
    sign(b) * (phi(b.abs()) - phi(0.0))
}

/// `β12(t)` for two gmCH peakons at `p = 2`, solving
/// `β̇12 = γ (1 + σ e^{-|β12|})` in closed form.
pub fn gmch_p2_separation_solution(gamma: f64, sigma: f64, b12_0: f64, t: f64) -> Result<f64> {
    let h0 = separation_factor(sigma, b12_0);
    if gamma == 0.0 || t == 0.0 || h0 == 0.0 {
        return Ok(b12_0);
    }
    // Solutions cannot cross a zero of the rate, and |β̇12| ≤ |γ| (1 + |σ|).
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    if sigma <= -1.0 {
        let pair = (-sigma).ln();
        if b12_0.abs() < pair {
            (lo, hi) = (-pair, pair);
        } else if b12_0 > 0.0 {
            lo = pair;
        } else {
            hi = -pair;
        }
    }
    let reach = gamma.abs() * (1.0 + sigma.abs()) * t.abs();
    let far = (b12_0 + sign(gamma * h0 * t) * reach).clamp(lo, hi);
    let (mut lo, mut hi) = if far < b12_0 { (far, b12_0) } else { (b12_0, far) };
    let target = separation_time_map(sigma, b12_0) + gamma * t;
    let g = |b: f64| separation_time_map(sigma, b) - target;
    // T is monotone on the bracket, increasing when the rate is positive.
    let increasing = h0 > 0.0;
    let mut b = 0.5 * (lo + hi);
    for _ in 0..400 {
        let gb = g(b);
        if gb == 0.0 {
            return Ok(b);
        }
        if (gb > 0.0) == increasing {
            hi = b;
        } else {
            lo = b;
        }
        let mut next = b - gb * separation_factor(sigma, b);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let scale = b.abs().max(1.0);
        if (next - b).abs() <= 1e-15 * scale || hi - lo <= 2.0 * f64::EPSILON * scale {
            return Ok(next);
        }
        b = next;
    }
    Ok(b)
}

/// Regime of a two-peakon state under `model`, with the invariants taken
/// from the state itself.
pub fn classify_pair(model: TwoPeakonModel, state: &PeakonState) -> Result<RegimeReport> {
    if state.len() != 2 {
        return Err(Error::InvalidArgument(format!("two-peakon classification needs N = 2, got {}", state.len())));
    }
    let (a1, a2) = (state.alphas[0], state.alphas[1]);
    let (m, a12, b12) = (a1 + a2, a1 - a2, state.betas[0] - state.betas[1]);
    match model {
        TwoPeakonModel::ChP1 => classify_ch(m, ch_energy(m, a12, b12)),
        TwoPeakonModel::GchP2 => {
            if m == 0.0 {
                return Ok(RegimeReport::new(model, Regime::Unclassified, &[("M", m)]));
            }
            let (c, nu) = gch_p2_invariant(m, a12, b12)?;
            let mut r = classify_gch_p2(nu)?;
            r.invariants.insert("M".into(), m);
            r.invariants.insert("C".into(), c);
            Ok(r)
        }
        TwoPeakonModel::GmchP1 => classify_gmch(1, a1, a2, b12),
        TwoPeakonModel::GmchP2 => classify_gmch(2, a1, a2, b12),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{GchRhs, PeakonSystem};
    use std::f64::consts::LN_2;

    #[test]
    fn pairs_from_states() {
        let s = PeakonState::new(0.0, vec![1.0, -0.5], vec![-3.0, 0.0]).unwrap();
        assert_eq!(classify_pair(TwoPeakonModel::ChP1, &s).unwrap().regime, Regime::CollisionBlowup);
        let s = PeakonState::new(0.0, vec![1.0, -0.5], vec![LN_2, 0.0]).unwrap();
        let r = classify_pair(TwoPeakonModel::GmchP2, &s).unwrap();
        assert_eq!(r.regime, Regime::StationaryPair);
        let s = PeakonState::new(0.0, vec![0.5, -0.5], vec![-1.0, 0.0]).unwrap();
        assert_eq!(classify_pair(TwoPeakonModel::GchP2, &s).unwrap().regime, Regime::Unclassified);
        assert!(classify_pair(TwoPeakonModel::ChP1, &PeakonState::new(0.0, vec![1.0], vec![0.0]).unwrap()).is_err());
    }

    #[test]
    fn ch_regimes() {
        // M = 1 and E = 0.25 give μ = -0.5.
        let r = classify_ch(1.0, 0.25).unwrap();
        assert_eq!(r.regime, Regime::Bounce);
        assert!((r.landmarks.turning_separation.unwrap() - LN_2).abs() < 1e-15);
        let r = classify_ch(1.0, 1.0).unwrap();
        assert_eq!(r.regime, Regime::CollisionBlowup);
        assert!(r.landmarks.collision);
        assert_eq!(classify_ch(0.0, 1.0).unwrap().regime, Regime::Unclassified);
        let near = classify_ch(1.0, 0.5 * (1.0 - 1e-9)).unwrap();
        assert!(near.landmarks.turning_separation.unwrap() < 1e-8);
    }

    #[test]
    fn ch_rate_values() {
        assert!((ch_separation_rate(2.0, 3.0, LN_2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(ch_separation_rate(2.0, 3.0, 0.0).unwrap(), 0.0);
        assert!((ch_separation_rate(2.0, 3.0, 60.0).unwrap() - 6f64.sqrt()).abs() < 1e-12);
        assert!(ch_separation_rate(2.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn gch_rates_match_closed_form_system() {
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        for _ in 0..200 {
            let (a1, a2, b12) = (next(), next(), 2.0 * next());
            let d = GchRhs { p: 2 }.derivative(&[a1, a2], &[b12, 0.0]).unwrap();
            let (ad, bd) = gch_p2_rates(a1 + a2, a1 - a2, b12);
            let ad_ref = d.alpha_dots[0] - d.alpha_dots[1];
            let bd_ref = d.beta_dots[0] - d.beta_dots[1];
            assert!((ad - ad_ref).abs() <= 1e-10 * ad_ref.abs().max(1.0));
            assert!((bd - bd_ref).abs() <= 1e-10 * bd_ref.abs().max(1.0));
        }
        assert_eq!(gch_p2_rates(1.0, 1.0, 0.3).0, 0.0);
        assert_eq!(gch_p2_rates(1.0, 0.0, 0.3).1, 0.0);
    }

    #[test]
    fn gch_invariant_values() {
        let (_, nu) = gch_p2_invariant(1.5, 0.0, 800.0).unwrap();
        assert!((nu - 1.0).abs() < 1e-15);
        let (c, nu) = gch_p2_invariant(2.0, 2.0, 0.7).unwrap();
        assert!((c - 16.0 / 4096.0).abs() < 1e-15);
        assert!((nu - 9.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn gch_regimes() {
        let r = classify_gch_p2(0.0).unwrap();
        assert_eq!(r.regime, Regime::CollisionThenBlowup);
        assert!((r.landmarks.blowup_separation.unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!((r.landmarks.collision_relative_amplitude.unwrap() - 3f64.sqrt()).abs() < 1e-15);

        let r = classify_gch_p2(27.0 / 32.0).unwrap();
        assert_eq!(r.regime, Regime::BounceAtCollision);
        assert_eq!(r.landmarks.collision_relative_amplitude, Some(0.0));

        let r = classify_gch_p2(9.0 / 16.0).unwrap();
        assert_eq!(r.regime, Regime::Collision);
        assert!((r.landmarks.collision_relative_amplitude.unwrap() - 1.0).abs() < 1e-15);

        for nu in [0.85, 0.9, 0.99] {
            let r = classify_gch_p2(nu).unwrap();
            assert_eq!(r.regime, Regime::Bounce);
            let b = (-r.landmarks.turning_separation.unwrap()).exp();
            assert!((nu * (b + 3.0).powi(3) - 27.0 * (b + 1.0)).abs() < 1e-10);
        }
        for nu in [-0.01, -1.0, -100.0] {
            let r = classify_gch_p2(nu).unwrap();
            assert_eq!(r.regime, Regime::CollisionTurningBlowup);
            let b = (-r.landmarks.turning_separation.unwrap()).exp();
            assert!(b > 1.0 / 3.0 && b < 1.0);
            assert!((48.0 * nu * b * b * (1.0 - b) - (1.0 - 3.0 * b).powi(3)).abs() < 1e-10);
            assert!(gch_p2_turning_amplitude_sq(b) >= 13.0 - 1e-9);
        }
        assert!(classify_gch_p2(1.0).is_err());
    }

    #[test]
    fn gch_amplitude_for_nu_inverts_invariant() {
        for (nu, b12) in [(0.5, 0.0), (0.3, 2.0), (0.0, 0.5), (-0.5, 0.2), (0.9, 3.0)] {
            let x = gch_p2_amplitude_for_nu(1.3, nu, b12).unwrap();
            let (_, got) = gch_p2_invariant(1.3, x, b12).unwrap();
            assert!((got - nu).abs() < 1e-12, "nu {nu}: {got}");
        }
        assert!(gch_p2_amplitude_for_nu(1.0, 0.95, 0.0).is_err());
    }

    #[test]
    fn gmch_constants_and_regimes() {
        let (g, s) = gmch_p2_constants(1.0, 1.0);
        assert_eq!(g, 0.0);
        assert_eq!(s, 2.5);
        assert_eq!(classify_gmch(2, 1.0, -1.0, 0.4).unwrap().regime, Regime::ConstantSeparation);

        let (_, s) = gmch_p2_constants(1.0, -0.5);
        assert!((s + 2.0).abs() < 1e-15);
        let r = classify_gmch(2, 1.0, -0.5, 0.5).unwrap();
        assert_eq!(r.regime, Regime::BoundPairCollapse);
        assert!((r.landmarks.turning_separation.unwrap() - LN_2).abs() < 1e-15);
        assert!(r.landmarks.collision);
        assert_eq!(classify_gmch(2, 1.0, -0.5, LN_2).unwrap().regime, Regime::StationaryPair);
        assert_eq!(classify_gmch(2, 1.0, -0.5, 1.5).unwrap().regime, Regime::BoundPairEscape);
        assert_eq!(classify_gmch(2, 1.0, 0.5, 1.5).unwrap().regime, Regime::Collision);

        let r = classify_gmch(1, 1.0, 0.5, 2.0).unwrap();
        assert_eq!(r.regime, Regime::Collision);
        assert!((r.landmarks.collision_time.unwrap() + 4.0).abs() < 1e-15);
        assert!(classify_gmch(3, 1.0, 0.5, 2.0).is_err());
    }

    fn rk4_separation(gamma: f64, sigma: f64, b0: f64, t: f64) -> f64 {
        let f = |b: f64| gamma * (1.0 + sigma * (-b.abs()).exp());
        let n = 200_000;
        let h = t / n as f64;
        let mut b = b0;
        for _ in 0..n {
            let k1 = f(b);
            let k2 = f(b + 0.5 * h * k1);
            let k3 = f(b + 0.5 * h * k2);
            let k4 = f(b + h * k3);
            b += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        b
    }

    #[test]
    fn gmch_separation_closed_form() {
        let b = gmch_p2_separation_solution(0.7, 0.0, 1.0, 3.0).unwrap();
        assert!((b - 3.1).abs() < 1e-13);
        let (g, s) = gmch_p2_constants(1.0, -0.5);
        assert_eq!(gmch_p2_separation_solution(g, s, LN_2, 5.0).unwrap(), LN_2);
        for &(g, s, b0, t) in &[
            (g, s, 0.5, 3.0),
            (g, s, 0.5, -3.0),
            (g, s, -0.2, 1.0),
            (g, s, 1.2, 2.0),
            (g, s, 1.2, -2.0),
            (0.4, 1.7, -2.0, 8.0),
            (-0.4, -0.6, 0.3, 5.0),
        ] {
            let closed = gmch_p2_separation_solution(g, s, b0, t).unwrap();
            let ode = rk4_separation(g, s, b0, t);
            assert!((closed - ode).abs() < 1e-9, "{g} {s} {b0} {t}: {closed} vs {ode}");
        }
    }

    #[test]
    fn bound_pair_tends_to_pair_separation() {
        let (g, s) = gmch_p2_constants(1.0, -0.5);
        for t in [-30.0, 30.0] {
            let b = gmch_p2_separation_solution(g, s, 0.5, t).unwrap();
            assert!((b.abs() - LN_2).abs() < 1e-4, "t={t}: {b}");
        }
    }
}
