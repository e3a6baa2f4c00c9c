//! The N-peakon ODE system and single-peakon travelling-wave test.
//!
//! A state `u = Σ α_i exp(-|x - β_i|)` evolves by
//!
//! ```text
//! α̇_i = (F(U_i, V_i - α_i) - F(U_i, V_i + α_i)) / 2
//! β̇_i = (G(U_i, V_i + α_i) - G(U_i, V_i - α_i)) / (2 α_i)
//! ```
//!
//! where `U_i, V_i` are `u` and the mean of the one-sided `u_x` at `β_i`.

use serde::{Deserialize, Serialize};

use crate::expr::sign;
use crate::model::{binomial, FgEquation, Preset};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakonState {
    pub t: f64,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl PeakonState {
    pub fn new(t: f64, alphas: Vec<f64>, betas: Vec<f64>) -> Result<PeakonState> {
        if alphas.is_empty() || alphas.len() != betas.len() {
            return Err(Error::InvalidArgument(format!(
                "need matching non-empty amplitude and position lists, got {} and {}",
                alphas.len(),
                betas.len()
            )));
        }
        if !t.is_finite() || alphas.iter().chain(&betas).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("peakon state must be finite".into()));
        }
        Ok(PeakonState { t, alphas, betas })
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// `u` and `u_x` at `x`, with `sgn(0) = 0` at the crests.
    pub fn field(&self, x: f64) -> (f64, f64) {
        field_eval(&self.alphas, &self.betas, x)
    }
}

pub fn field_eval(alphas: &[f64], betas: &[f64], x: f64) -> (f64, f64) {
    let mut u = 0.0;
    let mut ux = 0.0;
    for (a, b) in alphas.iter().zip(betas) {
        let e = a * (-(x - b).abs()).exp();
        u += e;
        ux -= e * sign(x - b);
    }
    (u, ux)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakonDerivative {
    pub alpha_dots: Vec<f64>,
    pub beta_dots: Vec<f64>,
    /// Nodes with zero amplitude, whose speed is the limit `g(U_i, V_i)`.
    pub degenerate: Vec<usize>,
}

impl PeakonDerivative {
    fn with_len(n: usize) -> PeakonDerivative {
        PeakonDerivative { alpha_dots: vec![0.0; n], beta_dots: vec![0.0; n], degenerate: Vec::new() }
    }

    fn check_finite(self) -> Result<PeakonDerivative> {
        if self.alpha_dots.iter().chain(&self.beta_dots).all(|x| x.is_finite()) {
            Ok(self)
        } else {
            Err(Error::Eval(crate::expr::EvalError::NonFinite))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalData {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

pub fn local_data(alphas: &[f64], betas: &[f64]) -> LocalData {
    let n = alphas.len();
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let d = betas[i] - betas[j];
            let e = alphas[j] * (-d.abs()).exp();
            u[i] += e;
            v[i] -= sign(d) * e;
        }
    }
    LocalData { u, v }
}

/// Right-hand side of an autonomous peakon system.
pub trait PeakonSystem: Sync {
    fn derivative(&self, alphas: &[f64], betas: &[f64]) -> Result<PeakonDerivative>;

    fn rhs(&self, state: &PeakonState) -> Result<PeakonDerivative> {
        self.derivative(&state.alphas, &state.betas)
    }
}

impl<F> PeakonSystem for F
where
    F: Fn(&[f64], &[f64]) -> Result<PeakonDerivative> + Sync,
{
    fn derivative(&self, alphas: &[f64], betas: &[f64]) -> Result<PeakonDerivative> {
        self(alphas, betas)
    }
}

/// The system for any fg-equation, through its `F` and `G` kernels.
#[derive(Debug, Clone)]
pub struct GeneralRhs {
    eq: FgEquation,
}

impl GeneralRhs {
    pub fn new(eq: FgEquation) -> GeneralRhs {
        GeneralRhs { eq }
    }

    pub fn equation(&self) -> &FgEquation {
        &self.eq
    }
}

impl PeakonSystem for GeneralRhs {
    fn derivative(&self, alphas: &[f64], betas: &[f64]) -> Result<PeakonDerivative> {
        let LocalData { u, v } = local_data(alphas, betas);
        let mut d = PeakonDerivative::with_len(alphas.len());
        for (i, &a) in alphas.iter().enumerate() {
            let (ui, vi) = (u[i], v[i]);
            d.alpha_dots[i] =
                0.5 * (self.eq.antiderivative_f(ui, vi - a)? - self.eq.antiderivative_f(ui, vi + a)?);
            if a == 0.0 {
                d.beta_dots[i] = self.eq.eval_g(ui, vi)?;
                d.degenerate.push(i);
            } else {
                d.beta_dots[i] =
                    0.5 * (self.eq.antiderivative_g(ui, vi + a)? - self.eq.antiderivative_g(ui, vi - a)?) / a;
            }
        }
        d.check_finite()
    }
}

/// `Ĥ_q(w) = Σ_j (-1)^j C(q, j) U^{2(q-j)} w^{2j} / (2j + 1)`, so that
/// `∫_0^w (U^2 - y^2)^q dy = w Ĥ_q(w)`.
fn h_hat(q: u32, u: f64, w: f64) -> f64 {
    let (u2, w2) = (u * u, w * w);
    (0..=q)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            s * binomial(q, j) * u2.powi((q - j) as i32) * w2.powi(j as i32) / (2 * j + 1) as f64
        })
        .sum()
}

/// Closed-form system for `f = u_x s^{p-1}`, `g = u s^{p-1}`.
#[derive(Debug, Clone, Copy)]
pub struct GchRhs {
    pub p: u32,
}

impl PeakonSystem for GchRhs {
    fn derivative(&self, alphas: &[f64], betas: &[f64]) -> Result<PeakonDerivative> {
        let p = self.p;
        if p < 1 {
            return Err(Error::InvalidArgument("gCH needs p >= 1".into()));
        }
        let LocalData { u, v } = local_data(alphas, betas);
        let mut d = PeakonDerivative::with_len(alphas.len());
        for (i, &a) in alphas.iter().enumerate() {
            let (ui, vi) = (u[i], v[i]);
            let hp = (ui * ui - (vi + a).powi(2)).powi(p as i32);
            let hm = (ui * ui - (vi - a).powi(2)).powi(p as i32);
            d.alpha_dots[i] = (hp - hm) / (4 * p) as f64;
            if a == 0.0 {
                d.beta_dots[i] = ui * (ui * ui - vi * vi).powi(p as i32 - 1);
                d.degenerate.push(i);
            } else {
                let plus = (vi + a) * h_hat(p - 1, ui, vi + a);
                let minus = (vi - a) * h_hat(p - 1, ui, vi - a);
                d.beta_dots[i] = 0.5 * ui * (plus - minus) / a;
            }
        }
        d.check_finite()
    }
}

/// Closed-form system for `f = 0`, `g = s^p`.
#[derive(Debug, Clone, Copy)]
pub struct GmchRhs {
    pub p: u32,
}

impl PeakonSystem for GmchRhs {
    fn derivative(&self, alphas: &[f64], betas: &[f64]) -> Result<PeakonDerivative> {
        let p = self.p;
        if p < 1 {
            return Err(Error::InvalidArgument("gmCH needs p >= 1".into()));
        }
        let LocalData { u, v } = local_data(alphas, betas);
        let mut d = PeakonDerivative::with_len(alphas.len());
        for (i, &a) in alphas.iter().enumerate() {
            let (ui, vi) = (u[i], v[i]);
            if a == 0.0 {
                d.beta_dots[i] = (ui * ui - vi * vi).powi(p as i32);
                d.degenerate.push(i);
            } else {
                let plus = (vi + a) * h_hat(p, ui, vi + a);
                let minus = (vi - a) * h_hat(p, ui, vi - a);
                d.beta_dots[i] = 0.5 * (plus - minus) / a;
            }
        }
        d.check_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinglePeakonReport {
    pub a: f64,
    /// `|F(a, a) - F(a, -a)|`.
    pub condition_residual: f64,
    pub c: f64,
    pub is_travelling_wave: bool,
}

/// Whether `a exp(-|x - ct|)` is a travelling wave, and its speed `c`.
pub fn single_peakon_test(eq: &FgEquation, a: f64, tol: f64) -> Result<SinglePeakonReport> {
    if a == 0.0 {
        return Err(Error::InvalidArgument("single-peakon test needs a non-zero amplitude".into()));
    }
    let fp = eq.antiderivative_f(a, a)?;
    let fm = eq.antiderivative_f(a, -a)?;
    let residual = (fp - fm).abs();
    let c = (eq.antiderivative_g(a, a)? - eq.antiderivative_g(a, -a)?) / (2.0 * a);
    Ok(SinglePeakonReport {
        a,
        condition_residual: residual,
        c,
        is_travelling_wave: residual <= tol * (1.0 + fp.abs()),
    })
}

/// Speed of a single peakon of amplitude `a`, from the closed law when the
/// preset has one.
pub fn speed_amplitude(preset: &Preset, a: f64) -> Result<f64> {
    match preset.closed_speed(a) {
        Some(c) => Ok(c),
        None => Ok(single_peakon_test(&preset.equation()?, a, 1e-10)?.c),
    }
}
