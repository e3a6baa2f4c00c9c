//! Periodic pseudo-spectral solver for smooth solutions, written in the
//! transport form `m_t + g m_x = -(f + D̃g) m + g_v m²`.

use std::f64::consts::PI;
use std::sync::Arc;

use realfft::num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::expr::{EvalError, Expr};
use crate::model::FgEquation;
use crate::wavebreak::{blowup_ab, transport_coefficients, BlowupCoefficients};
use crate::{Error, Result};

/// Fraction of the advective limit `h / max|g|` used by [`FieldSolver::stable_dt`].
pub const CFL_SAFETY: f64 = 0.5;

/// Growth of `max|m|` over its initial value that stops a run.
pub const BLOWUP_GROWTH: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub period: f64,
    pub t: f64,
    pub m: Vec<f64>,
}

impl FieldState {
    pub fn new(period: f64, t: f64, m: Vec<f64>) -> Result<FieldState> {
        let n = m.len();
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("grid size must be a power of two >= 16, got {n}")));
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Eval(EvalError::NonFinite));
        }
        Ok(FieldState { period, t, m })
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.m.len() as f64
    }

    /// Grid points `x_j = j h` on `[0, L)`.
    pub fn grid(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n()).map(|j| j as f64 * h).collect()
    }
}

/// `u` and its first two derivatives on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
    pub uxx: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldTermination {
    EndReached,
    BlowUp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRun {
    pub snapshots: Vec<FieldState>,
    pub termination: FieldTermination,
    pub steps: usize,
}

pub struct FieldSolver {
    period: f64,
    n: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    /// Wavenumbers of the non-negative modes `0..=n/2`.
    kappa: Vec<f64>,
    keep: Vec<bool>,
    velocity: Expr,
    linear: Expr,
    quadratic: Expr,
}

impl std::fmt::Debug for FieldSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSolver").field("period", &self.period).field("n", &self.n).finish()
    }
}

impl FieldSolver {
    pub fn new(eq: &FgEquation, period: f64, n: usize) -> Result<FieldSolver> {
        FieldState::new(period, 0.0, vec![0.0; n])?;
        let tf = transport_coefficients(eq)?;
        let mut planner = RealFftPlanner::new();
        let kappa = (0..=n / 2).map(|k| 2.0 * PI * k as f64 / period).collect();
        // Two-thirds rule: drop the top third of the resolved band.
        let keep = (0..=n / 2).map(|k| k <= n / 3).collect();
        Ok(FieldSolver {
            period,
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            kappa,
            keep,
            velocity: tf.velocity,
            linear: tf.linear,
            quadratic: tf.quadratic,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    fn to_spectrum(&self, x: &[f64]) -> Vec<Complex64> {
        let mut input = x.to_vec();
        let mut out = self.forward.make_output_vec();
        self.forward.process(&mut input, &mut out).expect("buffer sizes match the plan");
        out
    }

    fn from_spectrum(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        // The zero and Nyquist modes of a real signal are real.
        spec[0].im = 0.0;
        let last = spec.len() - 1;
        spec[last].im = 0.0;
        let mut out = self.inverse.make_output_vec();
        self.inverse.process(&mut spec, &mut out).expect("buffer sizes match the plan");
        let scale = 1.0 / self.n as f64;
        out.iter_mut().for_each(|x| *x *= scale);
        out
    }

    /// Multiply each mode by `symbol(k, κ_k)`.
    fn apply(&self, spec: &[Complex64], symbol: impl Fn(usize, f64) -> Complex64) -> Vec<f64> {
        let out = spec.iter().enumerate().map(|(k, c)| c * symbol(k, self.kappa[k])).collect();
        self.from_spectrum(out)
    }

    fn nyquist(&self, k: usize) -> bool {
        2 * k == self.n
    }

    fn symbol_u(&self) -> impl Fn(usize, f64) -> Complex64 {
        |_, q| Complex64::new(1.0 / (1.0 + q * q), 0.0)
    }

    fn symbol_ux(&self) -> impl Fn(usize, f64) -> Complex64 + '_ {
        |k, q| if self.nyquist(k) { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, q / (1.0 + q * q)) }
    }

    fn symbol_dx(&self) -> impl Fn(usize, f64) -> Complex64 + '_ {
        |k, q| if self.nyquist(k) { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, q) }
    }

    /// Solve `(1 - ∂x²) u = m` and differentiate spectrally.
    pub fn helmholtz_invert(&self, m: &[f64]) -> Derivatives {
        let spec = self.to_spectrum(m);
        let u = self.apply(&spec, self.symbol_u());
        let ux = self.apply(&spec, self.symbol_ux());
        let uxx = self.apply(&spec, |_, q| Complex64::new(-q * q / (1.0 + q * q), 0.0));
        Derivatives { u, ux, uxx }
    }

    /// `m = u - u_xx` of grid values `u`.
    pub fn momentum_of(&self, u: &[f64]) -> Vec<f64> {
        let spec = self.to_spectrum(u);
        self.apply(&spec, |_, q| Complex64::new(1.0 + q * q, 0.0))
    }

    pub fn derivative(&self, y: &[f64]) -> Vec<f64> {
        let spec = self.to_spectrum(y);
        self.apply(&spec, self.symbol_dx())
    }

    /// Zero the modes removed by the two-thirds rule.
    pub fn filter(&self, y: &[f64]) -> Vec<f64> {
        let spec = self.to_spectrum(y);
        self.apply(&spec, |k, _| Complex64::new(if self.keep[k] { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn max_velocity(&self, m: &[f64]) -> Result<f64> {
        let d = self.helmholtz_invert(m);
        let mut vmax = 0.0f64;
        for j in 0..self.n {
            vmax = vmax.max(self.velocity.eval(d.u[j], d.ux[j], m[j])?.abs());
        }
        Ok(vmax)
    }

    /// Largest step allowed by `dt ≤ 0.5 h / max|g|`.
    pub fn stable_dt(&self, m: &[f64]) -> Result<f64> {
        let v = self.max_velocity(m)?;
        Ok(if v == 0.0 { f64::INFINITY } else { CFL_SAFETY * self.spacing() / v })
    }

    /// Semi-discrete right-hand side `-g m_x - (f + D̃g) m + g_v m²`, filtered.
    pub fn rhs(&self, m: &[f64]) -> Result<Vec<f64>> {
        Ok(self.rhs_and_speed(m)?.0)
    }

    /// The right-hand side together with `max|g|`.
    fn rhs_and_speed(&self, m: &[f64]) -> Result<(Vec<f64>, f64)> {
        let spec = self.to_spectrum(m);
        let u = self.apply(&spec, self.symbol_u());
        let ux = self.apply(&spec, self.symbol_ux());
        let mx = self.apply(&spec, self.symbol_dx());
        let mut out = Vec::with_capacity(self.n);
        let mut vmax = 0.0f64;
        for j in 0..self.n {
            let (u, ux, mj) = (u[j], ux[j], m[j]);
            let g = self.velocity.eval(u, ux, mj)?;
            let c1 = self.linear.eval(u, ux, mj)?;
            let c2 = self.quadratic.eval(u, ux, mj)?;
            vmax = vmax.max(g.abs());
            out.push(-g * mx[j] + c1 * mj + c2 * mj * mj);
        }
        Ok((self.filter(&out), vmax))
    }

    /// One classical Runge-Kutta step.
    pub fn step(&self, fs: &FieldState, dt: f64) -> Result<FieldState> {
        if fs.n() != self.n || fs.period != self.period {
            return Err(Error::InvalidArgument("field state does not match the solver grid".into()));
        }
        let (k1, vmax) = self.rhs_and_speed(&fs.m)?;
        let limit = if vmax == 0.0 { f64::INFINITY } else { CFL_SAFETY * self.spacing() / vmax };
        if dt > limit {
            return Err(Error::Cfl { dt, limit });
        }
        let axpy = |a: &[f64], s: f64, k: &[f64]| -> Vec<f64> { a.iter().zip(k).map(|(x, y)| x + s * y).collect() };
        let k2 = self.rhs(&axpy(&fs.m, 0.5 * dt, &k1))?;
        let k3 = self.rhs(&axpy(&fs.m, 0.5 * dt, &k2))?;
        let k4 = self.rhs(&axpy(&fs.m, dt, &k3))?;
        let m = (0..self.n).map(|j| fs.m[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])).collect();
        FieldState::new(self.period, fs.t + dt, m)
    }

    /// Integrate to `t1` with steps no longer than `max_dt`, shortened to
    /// respect the advective bound, keeping every `sample_every`-th step.
    pub fn run(&self, initial: &FieldState, t1: f64, max_dt: f64, sample_every: usize) -> Result<FieldRun> {
        let mut fs = FieldState::new(self.period, initial.t, self.filter(&initial.m))?;
        let m0 = fs.m.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
        let mut snapshots = vec![fs.clone()];
        let mut steps = 0;
        let stride = sample_every.max(1);
        // A fixed step keeps snapshot spacing uniform for centred differences.
        let span = t1 - fs.t;
        let mut count = (span / max_dt).ceil().max(1.0) as usize;
        // Headroom for growth of max|g| during the run.
        let limit = 0.8 * self.stable_dt(&fs.m)?;
        if span / count as f64 > limit {
            count = (span / limit).ceil() as usize;
        }
        let dt = span / count as f64;
        for k in 0..count {
            let mut next = self.step(&fs, dt)?;
            if k + 1 == count {
                next.t = t1;
            }
            fs = next;
            steps += 1;
            let mmax = fs.m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if mmax > BLOWUP_GROWTH * m0 {
                snapshots.push(fs);
                return Ok(FieldRun { snapshots, termination: FieldTermination::BlowUp, steps });
            }
            if steps % stride == 0 || k + 1 == count {
                snapshots.push(fs.clone());
            }
        }
        Ok(FieldRun { snapshots, termination: FieldTermination::EndReached, steps })
    }

    /// Grid `∫ f dx` by the trapezoid rule, spectrally accurate when periodic.
    pub fn integral(&self, y: &[f64]) -> f64 {
        self.spacing() * y.iter().sum::<f64>()
    }

    /// `∫ u dx`, equal to `∫ m dx` on the periodic grid.
    pub fn momentum(&self, m: &[f64]) -> f64 {
        self.integral(m)
    }

    /// `∫ (u² + u_x²) dx`.
    pub fn h1_norm_sq(&self, m: &[f64]) -> f64 {
        let d = self.helmholtz_invert(m);
        self.integral(&d.u.iter().zip(&d.ux).map(|(u, ux)| u * u + ux * ux).collect::<Vec<_>>())
    }

    /// `∫ (m² + m_x²) dx`.
    pub fn m_h1_norm_sq(&self, m: &[f64]) -> f64 {
        let mx = self.derivative(m);
        self.integral(&m.iter().zip(&mx).map(|(a, b)| a * a + b * b).collect::<Vec<_>>())
    }

    /// `∫ (A m² + B m_x²) dx`.
    pub fn breaking_integral(&self, coeffs: &BlowupCoefficients, m: &[f64]) -> Result<f64> {
        let d = self.helmholtz_invert(m);
        let mx = self.derivative(m);
        let mut sum = 0.0;
        for j in 0..self.n {
            let (a, b) = coeffs.eval(d.u[j], d.ux[j], m[j])?;
            sum += a * m[j] * m[j] + b * mx[j] * mx[j];
        }
        Ok(sum * self.spacing())
    }

    /// `(u, u_x, m)` at each grid point, as consumed by the blow-up indicator.
    pub fn samples(&self, m: &[f64]) -> Vec<(f64, f64, f64)> {
        let d = self.helmholtz_invert(m);
        (0..self.n).map(|j| (d.u[j], d.ux[j], m[j])).collect()
    }
}

/// `m = Σ 2 α_i G_w(x - β_i)` with `G_w` a unit-mass Gaussian of width `w`,
/// wrapped onto the period. As `w → 0` this tends to the peakon momentum.
pub fn mollified_peakons(period: f64, n: usize, alphas: &[f64], betas: &[f64], width: f64) -> Result<FieldState> {
    if !(width > 0.0) {
        return Err(Error::InvalidArgument("mollifier width must be positive".into()));
    }
    let h = period / n as f64;
    let norm = 1.0 / (width * (2.0 * PI).sqrt());
    let m = (0..n)
        .map(|j| {
            let x = j as f64 * h;
            let mut s = 0.0;
            for (a, b) in alphas.iter().zip(betas) {
                let mut d = (x - b).rem_euclid(period);
                if d > 0.5 * period {
                    d -= period;
                }
                s += 2.0 * a * norm * (-0.5 * (d / width).powi(2)).exp();
            }
            s
        })
        .collect();
    FieldState::new(period, 0.0, m)
}

/// Positions of the `count` largest local maxima of `|y|` on a periodic
/// grid of spacing `h`, refined by a parabola through the neighbouring
/// values and sorted ascending.
pub fn crest_positions(y: &[f64], h: f64, count: usize) -> Vec<f64> {
    let n = y.len();
    let a: Vec<f64> = y.iter().map(|x| x.abs()).collect();
    let mut peaks: Vec<(f64, f64)> = (0..n)
        .filter_map(|j| {
            let (l, r) = (a[(j + n - 1) % n], a[(j + 1) % n]);
            if a[j] > l && a[j] >= r {
                let denom = l - 2.0 * a[j] + r;
                let shift = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
                Some((a[j], (j as f64 + shift) * h))
            } else {
                None
            }
        })
        .collect();
    peaks.sort_by(|p, q| q.0.total_cmp(&p.0));
    let mut xs: Vec<f64> = peaks.into_iter().take(count).map(|p| p.1).collect();
    xs.sort_by(f64::total_cmp);
    xs
}

/// Largest normalized defect of `d/dt ∫(m² + m_x²) = -∫(A m² + B m_x²)`
/// over interior snapshots, the time derivative by centred differences.
pub fn h1_balance_residual(solver: &FieldSolver, coeffs: &BlowupCoefficients, run: &FieldRun) -> Result<f64> {
    let snaps = &run.snapshots;
    let norms: Vec<f64> = snaps.iter().map(|s| solver.m_h1_norm_sq(&s.m)).collect();
    let mut worst = 0.0f64;
    for k in 1..snaps.len().saturating_sub(1) {
        let dt = snaps[k + 1].t - snaps[k - 1].t;
        let lhs = (norms[k + 1] - norms[k - 1]) / dt;
        let rhs = -solver.breaking_integral(coeffs, &snaps[k].m)?;
        worst = worst.max((lhs - rhs).abs() / (1.0 + norms[k]));
    }
    Ok(worst)
}

/// [`h1_balance_residual`] with the coefficients built from `eq`.
pub fn h1_balance_residual_for(eq: &FgEquation, solver: &FieldSolver, run: &FieldRun) -> Result<f64> {
    h1_balance_residual(solver, &blowup_ab(eq)?, run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Preset;

    fn solver(preset: Preset, period: f64, n: usize) -> FieldSolver {
        FieldSolver::new(&preset.equation().unwrap(), period, n).unwrap()
    }

    #[test]
    fn helmholtz_on_constants_and_modes() {
        let s = solver(Preset::Ch, 2.0 * PI, 64);
        let d = s.helmholtz_invert(&vec![3.0; 64]);
        assert!(d.u.iter().all(|u| (u - 3.0).abs() < 1e-14));
        for k in [1.0, 5.0, 20.0] {
            let xs: Vec<f64> = (0..64).map(|j| j as f64 * 2.0 * PI / 64.0).collect();
            let m: Vec<f64> = xs.iter().map(|x| (1.0 + k * k) * (k * x).cos()).collect();
            let d = s.helmholtz_invert(&m);
            for (j, x) in xs.iter().enumerate() {
                assert!((d.u[j] - (k * x).cos()).abs() < 1e-12);
                assert!((d.ux[j] + k * (k * x).sin()).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn helmholtz_residual_on_band_limited_data() {
        let s = solver(Preset::Ch, 10.0, 128);
        let m: Vec<f64> = (0..128)
            .map(|j| {
                let x = j as f64 * 10.0 / 128.0;
                (0..12).map(|k| ((k * 7 % 5) as f64 - 2.0) * (2.0 * PI * k as f64 * x / 10.0 + k as f64).sin()).sum()
            })
            .collect();
        let d = s.helmholtz_invert(&m);
        let worst = (0..128).map(|j| (d.u[j] - d.uxx[j] - m[j]).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn trivial_equation_is_static() {
        let eq = FgEquation::from_text("zero", "0", "0").unwrap();
        let s = FieldSolver::new(&eq, 2.0 * PI, 32).unwrap();
        let m: Vec<f64> = (0..32).map(|j| (j as f64 * 2.0 * PI / 32.0).cos()).collect();
        let fs = FieldState::new(2.0 * PI, 0.0, m.clone()).unwrap();
        let out = s.run(&fs, 1.0, 0.1, 1).unwrap();
        assert_eq!(out.snapshots.last().unwrap().m, s.filter(&m));
        assert_eq!(h1_balance_residual_for(&eq, &s, &out).unwrap(), 0.0);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let s = solver(Preset::Ch, 20.0, 64);
        let fs = mollified_peakons(20.0, 64, &[1.0], &[10.0], 0.5).unwrap();
        assert!(matches!(s.step(&fs, 1.0), Err(Error::Cfl { .. })));
        assert!(FieldState::new(1.0, 0.0, vec![0.0; 24]).is_err());
    }

    #[test]
    fn smooth_balance_identity() {
        // mCH steepens quickly at larger amplitude, so it gets a gentler profile.
        for (preset, amp) in [(Preset::Ch, 0.8), (Preset::Mch, 0.4)] {
            let eq = preset.equation().unwrap();
            let (l, n) = (40.0, 512);
            let s = FieldSolver::new(&eq, l, n).unwrap();
            let u: Vec<f64> = (0..n)
                .map(|j| {
                    let x = j as f64 * l / n as f64 - 0.5 * l;
                    amp * (-x * x / 2.0).exp()
                })
                .collect();
            let fs = FieldState::new(l, 0.0, s.momentum_of(&u)).unwrap();
            let run = s.run(&fs, 1.0, 0.002, 1).unwrap();
            let r = h1_balance_residual_for(&eq, &s, &run).unwrap();
            assert!(r < 1e-4, "{preset:?}: {r}");
            let last = &run.snapshots.last().unwrap().m;
            let drift = (s.h1_norm_sq(last) / s.h1_norm_sq(&fs.m) - 1.0).abs();
            assert!(drift < 1e-5, "{preset:?}: {drift}");
        }
    }

    #[test]
    fn crests_are_located() {
        let fs = mollified_peakons(20.0, 1024, &[1.0, 0.5], &[6.3, 12.71], 0.1).unwrap();
        let xs = crest_positions(&fs.m, fs.spacing(), 2);
        assert!((xs[0] - 6.3).abs() < 1e-3 && (xs[1] - 12.71).abs() < 1e-3, "{xs:?}");
    }
}
