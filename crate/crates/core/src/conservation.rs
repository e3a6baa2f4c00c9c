//! Conserved quantities, the weak-form residual and invariant monitoring.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{field_eval, PeakonState};
use crate::expr::sign;
use crate::integrator::Trajectory;
use crate::model::{FgEquation, HamiltonianFamily};
use crate::quadrature::{GaussRule, Quadrature};
use crate::twopeakon::{ch_energy, ch_mu, gch_p2_invariant, gmch_p1_gamma, gmch_p2_constants, TwoPeakonModel};
use crate::{Error, Result};

/// Envelope level below which peakon tails are dropped from field integrals.
pub const TAIL_CUTOFF: f64 = 1e-14;

/// `P = Σ α_i`.
pub fn momentum(state: &PeakonState) -> f64 {
    state.alphas.iter().sum()
}

/// `‖u‖²_{H¹} = 2 Σ_i Σ_j α_i α_j e^{-|β_i - β_j|}`.
pub fn h1_norm_sq(state: &PeakonState) -> f64 {
    let (a, b) = (&state.alphas, &state.betas);
    let mut sum = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            sum += a[i] * a[j] * (-(b[i] - b[j]).abs()).exp();
        }
    }
    2.0 * sum
}

/// Sorted crest positions padded by the tail cutoff distance.
fn peakon_breakpoints(state: &PeakonState) -> Vec<f64> {
    let total: f64 = state.alphas.iter().map(|a| a.abs()).sum();
    let mut points = state.betas.clone();
    points.sort_by(f64::total_cmp);
    if total == 0.0 {
        return Vec::new();
    }
    let reach = (total / TAIL_CUTOFF).ln().max(1.0);
    let (lo, hi) = (points[0] - reach, points[points.len() - 1] + reach);
    points.insert(0, lo);
    points.push(hi);
    points.dedup();
    points
}

/// Energy density `½(u F1 + s G̃1 + 2 u_x (u F̂1 + Ĝ1))` with `s = u² - u_x²`.
pub fn energy_density(h: &HamiltonianFamily, u: f64, ux: f64) -> Result<f64> {
    let s = u * u - ux * ux;
    let (f1, g1t) = h.kernels_f1_g1_tilde(s)?;
    let (f1h, g1h) = h.kernels_hat(u, ux)?;
    Ok(0.5 * (u * f1 + s * g1t + 2.0 * ux * (u * f1h + g1h)))
}

/// `H̃` of a peakon state.
pub fn energy(h: &HamiltonianFamily, state: &PeakonState) -> Result<f64> {
    let points = peakon_breakpoints(state);
    Quadrature::default().integrate_pieces(
        |x| {
            let (u, ux) = field_eval(&state.alphas, &state.betas, x);
            energy_density(h, u, ux)
        },
        &points,
    )
}

/// `H̃` of a smooth profile `x ↦ (u, u_x)` over `[a, b]`.
pub fn energy_profile<P>(h: &HamiltonianFamily, profile: P, a: f64, b: f64) -> Result<f64>
where
    P: Fn(f64) -> (f64, f64),
{
    Quadrature::default().integrate(
        |x| {
            let (u, ux) = profile(x);
            energy_density(h, u, ux)
        },
        a,
        b,
    )
}

/// `∫ (u² + u_x²) dx` of a smooth profile over `[a, b]`.
pub fn h1_norm_sq_profile<P>(profile: P, a: f64, b: f64) -> Result<f64>
where
    P: Fn(f64) -> (f64, f64),
{
    Quadrature::default().integrate(
        |x| {
            let (u, ux) = profile(x);
            Ok(u * u + ux * ux)
        },
        a,
        b,
    )
}

/// `∫ (u² + u_x²) dx` of a peakon state by direct quadrature.
pub fn h1_norm_sq_quadrature(state: &PeakonState) -> Result<f64> {
    let points = peakon_breakpoints(state);
    Quadrature::default().integrate_pieces(
        |x| {
            let (u, ux) = field_eval(&state.alphas, &state.betas, x);
            Ok(u * u + ux * ux)
        },
        &points,
    )
}

/// `H̃` of a single peakon of amplitude `a` from its one-dimensional
/// reduction
/// `a² ∫_0^1 (g1(a² y) atanh √(1-y) + a f1(a² y) √(1-y)) dy`,
/// evaluated after substituting `y = sin²θ`, which leaves a smooth
/// integrand apart from an integrable `θ ln θ` at the origin.
pub fn single_peakon_energy(h: &HamiltonianFamily, a: f64) -> Result<f64> {
    if a == 0.0 {
        return Ok(0.0);
    }
    let a2 = a * a;
    let g1_zero = h.g1().is_zero();
    let value = Quadrature::default().integrate(
        |th| {
            let (z, w) = th.sin_cos();
            let y = a2 * z * z;
            let mut v = a * h.f1().eval(y)? * w;
            if !g1_zero && z > 0.0 {
                v += h.g1().eval(y)? * ((1.0 + w) / z).ln();
            }
            Ok(2.0 * z * w * v)
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
    )?;
    Ok(a2 * value)
}

/// `½ c ‖U‖²_{H¹} + H̃(U)` for a peakon profile.
pub fn minimizer_functional(h: &HamiltonianFamily, state: &PeakonState, c: f64) -> Result<f64> {
    Ok(0.5 * c * h1_norm_sq(state) + energy(h, state)?)
}

/// `½ c ‖U‖²_{H¹} + H̃(U)` for a smooth profile on `[a, b]`.
pub fn minimizer_functional_profile<P>(h: &HamiltonianFamily, profile: P, a: f64, b: f64, c: f64) -> Result<f64>
where
    P: Fn(f64) -> (f64, f64),
{
    Ok(0.5 * c * h1_norm_sq_profile(&profile, a, b)? + energy_profile(h, &profile, a, b)?)
}

/// Tensor-product bump `φ((t - t0)/rt) φ((x - x0)/rx)` with
/// `φ(z) = exp(1 - 1/(1 - z²))` on `|z| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub t0: f64,
    pub x0: f64,
    pub rt: f64,
    pub rx: f64,
}

/// `φ, φ', φ''` of the unit bump.
fn bump_1d(z: f64) -> (f64, f64, f64) {
    if z.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let d = 1.0 - z * z;
    let phi = (1.0 - 1.0 / d).exp();
    let q1 = -2.0 * z / (d * d);
    let q2 = -2.0 / (d * d) - 8.0 * z * z / (d * d * d);
    (phi, q1 * phi, (q2 + q1 * q1) * phi)
}

impl Bump {
    /// `(ψ, ψ_x, ψ_xx)` at `(t, x)`.
    pub fn eval(&self, t: f64, x: f64) -> (f64, f64, f64) {
        let (pt, _, _) = bump_1d((t - self.t0) / self.rt);
        let (px, dx, ddx) = bump_1d((x - self.x0) / self.rx);
        (pt * px, pt * dx / self.rx, pt * ddx / (self.rx * self.rx))
    }

    pub fn t_support(&self) -> (f64, f64) {
        (self.t0 - self.rt, self.t0 + self.rt)
    }

    pub fn x_support(&self) -> (f64, f64) {
        (self.x0 - self.rx, self.x0 + self.rx)
    }
}

/// Margin added around the crest paths when laying out the default bumps.
pub const DEFAULT_BUMP_MARGIN: f64 = 2.0;

/// A 4×4 grid of bumps tiling the trajectory's space-time window.
pub fn default_test_family(traj: &Trajectory) -> Vec<Bump> {
    test_family(traj, 4, 4)
}

pub fn test_family(traj: &Trajectory, nt: usize, nx: usize) -> Vec<Bump> {
    let (t0, t1) = traj.window();
    let (mut xlo, mut xhi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &traj.samples {
        for &b in &s.state.betas {
            xlo = xlo.min(b);
            xhi = xhi.max(b);
        }
    }
    if !(t1 > t0) || !xlo.is_finite() {
        return Vec::new();
    }
    xlo -= DEFAULT_BUMP_MARGIN;
    xhi += DEFAULT_BUMP_MARGIN;
    let (ct, cx) = ((t1 - t0) / nt as f64, (xhi - xlo) / nx as f64);
    let mut out = Vec::with_capacity(nt * nx);
    for i in 0..nt {
        for j in 0..nx {
            out.push(Bump {
                t0: t0 + (i as f64 + 0.5) * ct,
                x0: xlo + (j as f64 + 0.5) * cx,
                rt: 0.5 * ct,
                rx: 0.5 * cx,
            });
        }
    }
    out
}

/// Composite Gauss-Legendre mesh for the space-time weak integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakQuadrature {
    /// Panels across a bump's time support.
    pub t_panels: usize,
    /// Panels across a bump's space support, further split at crests.
    pub x_panels: usize,
    pub nodes: usize,
}

impl Default for WeakQuadrature {
    fn default() -> Self {
        WeakQuadrature { t_panels: 16, x_panels: 64, nodes: 8 }
    }
}

/// Space-time integral, against `ψ`, of the weak form
/// `ψ(u_t + f u + F_u u_x) - ψ_x(g u + G_u u_x - F) - ψ_xx(G + u_t)`
/// on the field reconstructed from `traj`.
pub fn weak_integral(eq: &FgEquation, traj: &Trajectory, bump: &Bump, quad: &WeakQuadrature) -> Result<f64> {
    let rule = GaussRule::new(quad.nodes);
    let (tw0, tw1) = traj.window();
    let (ta, tb) = bump.t_support();
    let (ta, tb) = (ta.max(tw0), tb.min(tw1));
    if !(tb > ta) {
        return Ok(0.0);
    }
    let (xa, xb) = bump.x_support();
    // Time panels are laid over the full support so the mesh is the same
    // whether or not the trajectory window clips it.
    let (sa, sb) = bump.t_support();
    let dt = (sb - sa) / quad.t_panels as f64;
    let mut total = 0.0;
    for k in 0..quad.t_panels {
        let (p0, p1) = ((sa + k as f64 * dt).max(ta), (sa + (k + 1) as f64 * dt).min(tb));
        if !(p1 > p0) {
            continue;
        }
        total += rule.integrate(
            |t| {
                let (state, rates) = traj
                    .interpolate(t)
                    .ok_or_else(|| Error::InvalidArgument(format!("time {t} outside trajectory")))?;
                let mut points = vec![xa];
                let mut crests: Vec<f64> = state.betas.iter().copied().filter(|b| *b > xa && *b < xb).collect();
                crests.sort_by(f64::total_cmp);
                points.extend(crests);
                points.push(xb);
                let mut inner = 0.0;
                let dx = (xb - xa) / quad.x_panels as f64;
                for w in points.windows(2) {
                    let panels = ((w[1] - w[0]) / dx).ceil().max(1.0) as usize;
                    inner += rule.integrate_composite(
                        |x| weak_integrand(eq, &state, &rates.alpha_dots, &rates.beta_dots, bump, t, x),
                        w,
                        panels,
                    )?;
                }
                Ok(inner)
            },
            p0,
            p1,
        )?;
    }
    Ok(total)
}

fn weak_integrand(
    eq: &FgEquation,
    state: &PeakonState,
    alpha_dots: &[f64],
    beta_dots: &[f64],
    bump: &Bump,
    t: f64,
    x: f64,
) -> Result<f64> {
    let (psi, psi_x, psi_xx) = bump.eval(t, x);
    if psi == 0.0 && psi_x == 0.0 && psi_xx == 0.0 {
        return Ok(0.0);
    }
    let mut u = 0.0;
    let mut ux = 0.0;
    let mut ut = 0.0;
    for i in 0..state.len() {
        let (a, b) = (state.alphas[i], state.betas[i]);
        let e = (-(x - b).abs()).exp();
        let sg = sign(x - b);
        u += a * e;
        ux -= a * e * sg;
        ut += (alpha_dots[i] + a * beta_dots[i] * sg) * e;
    }
    let f = eq.eval_f(u, ux)?;
    let g = eq.eval_g(u, ux)?;
    let ff = eq.antiderivative_f(u, ux)?;
    let gg = eq.antiderivative_g(u, ux)?;
    let ff_u = eq.antiderivative_f_du(u, ux)?;
    let gg_u = eq.antiderivative_g_du(u, ux)?;
    Ok(psi * (ut + f * u + ff_u * ux) - psi_x * (g * u + gg_u * ux - ff) - psi_xx * (gg + ut))
}

/// Weak-form integrals against each test function.
pub fn weak_residuals(eq: &FgEquation, traj: &Trajectory, tests: &[Bump], quad: &WeakQuadrature) -> Result<Vec<f64>> {
    tests.par_iter().map(|b| weak_integral(eq, traj, b, quad)).collect()
}

/// Largest `|weak integral|` over the test family; near zero certifies that
/// the reconstructed field is a weak solution.
pub fn weak_residual(eq: &FgEquation, traj: &Trajectory, tests: &[Bump], quad: &WeakQuadrature) -> Result<f64> {
    Ok(weak_residuals(eq, traj, tests, quad)?.into_iter().fold(0.0, |m, r| m.max(r.abs())))
}

/// Named constants of motion of a two-peakon state. `None` marks a value
/// that is undefined for the state, such as `μ` at zero momentum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub model: TwoPeakonModel,
    pub values: Vec<(String, Option<f64>)>,
}

impl InvariantRecord {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).and_then(|(_, v)| *v)
    }
}

pub fn two_peakon_invariants(model: TwoPeakonModel, state: &PeakonState) -> Result<InvariantRecord> {
    if state.len() != 2 {
        return Err(Error::InvalidArgument(format!("two-peakon invariants need N = 2, got {}", state.len())));
    }
    let (a1, a2) = (state.alphas[0], state.alphas[1]);
    let (m, a12, b12) = (a1 + a2, a1 - a2, state.betas[0] - state.betas[1]);
    let values: Vec<(&str, Option<f64>)> = match model {
        TwoPeakonModel::ChP1 => {
            let e = ch_energy(m, a12, b12);
            vec![("M", Some(m)), ("E", Some(e)), ("mu", ch_mu(m, e))]
        }
        TwoPeakonModel::GchP2 => {
            let ci = gch_p2_invariant(m, a12, b12).ok();
            vec![("M", Some(m)), ("C", ci.map(|c| c.0)), ("nu", ci.map(|c| c.1))]
        }
        TwoPeakonModel::GmchP1 => vec![("gamma", Some(gmch_p1_gamma(a1, a2)))],
        TwoPeakonModel::GmchP2 => {
            let (g, s) = gmch_p2_constants(a1, a2);
            let defined = a1 != 0.0 || a2 != 0.0;
            vec![("gamma", Some(g)), ("sigma", defined.then_some(s))]
        }
    };
    Ok(InvariantRecord { model, values: values.into_iter().map(|(n, v)| (n.to_string(), v)).collect() })
}

/// Invariant columns per trajectory sample with their drifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    /// `t`, `P`, `H` (Hamiltonian equations only), `H1sq`, then model columns.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Largest drift relative to the first sample, per column after `t`.
    pub max_drift: Vec<f64>,
    /// As `max_drift`, ignoring samples near recorded events.
    pub drift_excluding_events: Vec<f64>,
}

impl InvariantReport {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Drift of a named column, away from events.
    pub fn drift(&self, name: &str) -> Option<f64> {
        let i = self.column(name)?;
        (i > 0).then(|| self.drift_excluding_events[i - 1])
    }
}

/// `|x - x0| / |x0|`, or `|x - x0|` when `x0 = 0`.
pub fn relative_drift(x0: f64, x: f64) -> f64 {
    if x0 == 0.0 {
        (x - x0).abs()
    } else {
        ((x - x0) / x0).abs()
    }
}

/// Samples within this many event tolerances of an event are excluded from
/// `drift_excluding_events`.
pub const EVENT_EXCLUSION_FACTOR: f64 = 10.0;

pub fn invariant_row(
    state: &PeakonState,
    family: Option<&HamiltonianFamily>,
    model: Option<TwoPeakonModel>,
) -> Result<Vec<f64>> {
    let mut row = vec![state.t, momentum(state)];
    if let Some(h) = family {
        row.push(energy(h, state)?);
    }
    row.push(h1_norm_sq(state));
    if let Some(model) = model {
        for (_, v) in two_peakon_invariants(model, state)?.values {
            row.push(v.unwrap_or(f64::NAN));
        }
    }
    Ok(row)
}

pub fn invariant_columns(family: Option<&HamiltonianFamily>, model: Option<TwoPeakonModel>) -> Vec<String> {
    let mut cols = vec!["t".to_string(), "P".to_string()];
    if family.is_some() {
        cols.push("H".into());
    }
    cols.push("H1sq".into());
    if let Some(model) = model {
        let names: &[&str] = match model {
            TwoPeakonModel::ChP1 => &["M", "E", "mu"],
            TwoPeakonModel::GchP2 => &["M", "C", "nu"],
            TwoPeakonModel::GmchP1 => &["gamma"],
            TwoPeakonModel::GmchP2 => &["gamma", "sigma"],
        };
        cols.extend(names.iter().map(|s| s.to_string()));
    }
    cols
}

/// Drift summary over precomputed rows; `excluded[k]` marks rows left out
/// of the event-free drift.
pub fn summarize_drift(columns: Vec<String>, rows: Vec<Vec<f64>>, excluded: &[bool]) -> InvariantReport {
    let width = columns.len().saturating_sub(1);
    let mut max_drift = vec![0.0f64; width];
    let mut away = vec![0.0f64; width];
    if let Some(first) = rows.first() {
        for (k, row) in rows.iter().enumerate() {
            for c in 0..width {
                let d = relative_drift(first[c + 1], row[c + 1]);
                if d.is_nan() {
                    continue;
                }
                max_drift[c] = max_drift[c].max(d);
                if !excluded[k] {
                    away[c] = away[c].max(d);
                }
            }
        }
    }
    InvariantReport { columns, rows, max_drift, drift_excluding_events: away }
}

/// Evaluate invariants at every sample of `traj`.
pub fn monitor(
    traj: &Trajectory,
    family: Option<&HamiltonianFamily>,
    model: Option<TwoPeakonModel>,
    event_tolerance: f64,
) -> Result<InvariantReport> {
    let rows: Vec<Vec<f64>> =
        traj.samples.par_iter().map(|s| invariant_row(&s.state, family, model)).collect::<Result<_>>()?;
    let window = EVENT_EXCLUSION_FACTOR * event_tolerance;
    let excluded: Vec<bool> = traj
        .samples
        .iter()
        .map(|s| traj.events.iter().any(|e| (s.state.t - e.t).abs() <= window))
        .collect();
    Ok(summarize_drift(invariant_columns(family, model), rows, &excluded))
}
