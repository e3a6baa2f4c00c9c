//! Adaptive Dormand-Prince 5(4) integration of peakon systems with dense
//! output and event location.
//!
//! Optional time regularization integrates in an arc-length-like variable
//! `s` with `dt/ds = 1 / (1 + |y'| / (1 + |y|))`, which lets runs follow an
//! amplitude blow-up up to the cap instead of stalling on step underflow.

use serde::{Deserialize, Serialize};

use crate::dynamics::{PeakonDerivative, PeakonState, PeakonSystem};
use crate::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MAX_FAILED_TRIALS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Collision,
    TurningPoint,
    BlowUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionPolicy {
    Stop,
    /// Merge the pair to exact coincidence and keep integrating.
    Continue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: Option<f64>,
    pub output_stride: usize,
    pub amplitude_cap: f64,
    /// Collision is declared when `|β_i - β_j|` falls to this value.
    pub min_separation: f64,
    pub event_tolerance: f64,
    /// Collisions and turning points to locate; blow-up is always on.
    pub events: Vec<EventKind>,
    pub collision_policy: CollisionPolicy,
    pub regularize: bool,
    pub max_steps: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 0.5,
            initial_step: None,
            output_stride: 1,
            amplitude_cap: 1e8,
            min_separation: 1e-10,
            event_tolerance: 1e-10,
            events: vec![EventKind::Collision, EventKind::TurningPoint],
            collision_policy: CollisionPolicy::Stop,
            regularize: false,
            max_steps: 2_000_000,
        }
    }
}

impl IntegrationConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.atol > 0.0
            && self.amplitude_cap > 0.0
            && self.min_separation >= 0.0
            && self.event_tolerance > 0.0
            && self.max_step > 0.0
            && self.output_stride > 0
            && self.initial_step.is_none_or(|h| h > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument("integration config out of range".into()))
        }
    }

    fn wants(&self, kind: EventKind) -> bool {
        self.events.contains(&kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    EndReached,
    Collision,
    BlowUp,
    StepUnderflow,
    StepLimit,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub kind: EventKind,
    pub t: f64,
    pub pair: Option<(usize, usize)>,
    pub state: PeakonState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub state: PeakonState,
    pub rates: PeakonDerivative,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<EventRecord>,
    pub termination: Termination,
    pub stats: Stats,
}

impl Trajectory {
    pub fn last(&self) -> &PeakonState {
        &self.samples.last().expect("trajectory has an initial sample").state
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &EventRecord> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Time span covered by the samples.
    pub fn window(&self) -> (f64, f64) {
        let first = self.samples.first().map_or(0.0, |s| s.state.t);
        let last = self.samples.last().map_or(0.0, |s| s.state.t);
        (first, last)
    }

    /// Cubic Hermite reconstruction from the stored samples and rates,
    /// returning the state at `t` and its time derivative.
    pub fn interpolate(&self, t: f64) -> Option<(PeakonState, PeakonDerivative)> {
        let (t0, t1) = self.window();
        if self.samples.is_empty() || !(t >= t0 && t <= t1) {
            return None;
        }
        let k = self.samples.partition_point(|s| s.state.t <= t).clamp(1, self.samples.len()) - 1;
        let a = &self.samples[k];
        let Some(b) = self.samples.get(k + 1).filter(|b| b.state.len() == a.state.len()) else {
            return Some((PeakonState { t, ..a.state.clone() }, a.rates.clone()));
        };
        let h = b.state.t - a.state.t;
        if h <= 0.0 {
            return Some((PeakonState { t, ..a.state.clone() }, a.rates.clone()));
        }
        let s = (t - a.state.t) / h;
        let (s2, s3) = (s * s, s * s * s);
        let (h00, h10, h01, h11) = (2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2);
        let (d00, d10, d01, d11) = (6.0 * (s2 - s) / h, 3.0 * s2 - 4.0 * s + 1.0, 6.0 * (s - s2) / h, 3.0 * s2 - 2.0 * s);
        let mix = |ya: &[f64], yb: &[f64], da: &[f64], db: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let n = ya.len();
            let mut y = Vec::with_capacity(n);
            let mut dy = Vec::with_capacity(n);
            for i in 0..n {
                y.push(h00 * ya[i] + h10 * h * da[i] + h01 * yb[i] + h11 * h * db[i]);
                dy.push(d00 * ya[i] + d10 * da[i] + d01 * yb[i] + d11 * db[i]);
            }
            (y, dy)
        };
        let (alphas, alpha_dots) =
            mix(&a.state.alphas, &b.state.alphas, &a.rates.alpha_dots, &b.rates.alpha_dots);
        let (betas, beta_dots) = mix(&a.state.betas, &b.state.betas, &a.rates.beta_dots, &b.rates.beta_dots);
        Some((PeakonState { t, alphas, betas }, PeakonDerivative { alpha_dots, beta_dots, degenerate: Vec::new() }))
    }
}

/// Runs a system backwards in time: integrating it to `t` gives the state
/// of the original at `-t`, up to the time label.
pub struct Reversed<S>(pub S);

impl<S: PeakonSystem> PeakonSystem for Reversed<S> {
    fn derivative(&self, alphas: &[f64], betas: &[f64]) -> Result<PeakonDerivative> {
        let mut d = self.0.derivative(alphas, betas)?;
        d.alpha_dots.iter_mut().chain(d.beta_dots.iter_mut()).for_each(|x| *x = -*x);
        Ok(d)
    }
}

/// Root of `g` on `[lo, hi]` by bisection, to width `tol`.
pub fn locate_event<G>(mut g: G, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let mut ga = g(a)?;
    let gb = g(b)?;
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if ga.signum() == gb.signum() {
        return Err(Error::NoSignChange(lo, hi));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a <= tol || mid <= a || mid >= b {
            break;
        }
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    Ok(b)
}

struct Ode<'a, S: ?Sized> {
    sys: &'a S,
    n: usize,
    regularize: bool,
}

impl<S: PeakonSystem + ?Sized> Ode<'_, S> {
    fn dim(&self) -> usize {
        2 * self.n + usize::from(self.regularize)
    }

    fn eval(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.n;
        let d = self.sys.derivative(&y[..n], &y[n..2 * n])?;
        out[..n].copy_from_slice(&d.alpha_dots);
        out[n..2 * n].copy_from_slice(&d.beta_dots);
        if self.regularize {
            let ynorm = y[..2 * n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let fnorm = out[..2 * n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let w = 1.0 / (1.0 + fnorm / (1.0 + ynorm));
            out[..2 * n].iter_mut().for_each(|x| *x *= w);
            out[2 * n] = w;
        }
        if out.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::Eval(crate::expr::EvalError::NonFinite))
        }
    }

    fn time(&self, s: f64, y: &[f64]) -> f64 {
        if self.regularize {
            y[2 * self.n]
        } else {
            s
        }
    }

    /// `dy/dt` from `dy/ds`.
    fn rates(&self, y: &[f64], k: &[f64]) -> PeakonDerivative {
        let n = self.n;
        let w = if self.regularize { k[2 * n] } else { 1.0 };
        PeakonDerivative {
            alpha_dots: k[..n].iter().map(|x| x / w).collect(),
            beta_dots: k[n..2 * n].iter().map(|x| x / w).collect(),
            degenerate: (0..n).filter(|&i| y[i] == 0.0).collect(),
        }
    }

    fn state(&self, s: f64, y: &[f64]) -> PeakonState {
        let n = self.n;
        PeakonState { t: self.time(s, y), alphas: y[..n].to_vec(), betas: y[n..2 * n].to_vec() }
    }

    fn sample(&self, s: f64, y: &[f64], k: &[f64]) -> Sample {
        Sample { state: self.state(s, y), rates: self.rates(y, k) }
    }
}

struct Dense {
    s0: f64,
    h: f64,
    r: [Vec<f64>; 5],
}

impl Dense {
    fn at(&self, theta: f64, out: &mut [f64]) {
        let t1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.r;
        for i in 0..out.len() {
            out[i] = r1[i] + theta * (r2[i] + t1 * (r3[i] + theta * (r4[i] + t1 * r5[i])));
        }
    }

    fn s(&self, theta: f64) -> f64 {
        self.s0 + theta * self.h
    }
}

fn rms_norm(v: &[f64], scale: &[f64]) -> f64 {
    (v.iter().zip(scale).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

struct Stepper<'a, 'b, S: ?Sized> {
    ode: &'a Ode<'b, S>,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
    evaluations: usize,
}

impl<S: PeakonSystem + ?Sized> Stepper<'_, '_, S> {
    fn new<'a, 'b>(ode: &'a Ode<'b, S>) -> Stepper<'a, 'b, S> {
        let d = ode.dim();
        Stepper {
            ode,
            k: std::array::from_fn(|_| vec![0.0; d]),
            tmp: vec![0.0; d],
            y_new: vec![0.0; d],
            evaluations: 0,
        }
    }

    fn f(&mut self, stage: usize) -> Result<()> {
        self.evaluations += 1;
        let (tmp, k) = (&self.tmp, &mut self.k);
        self.ode.eval(tmp, &mut k[stage])
    }

    fn comb(&mut self, y: &[f64], h: f64, coeffs: &[(usize, f64)]) {
        for i in 0..y.len() {
            let mut acc = 0.0;
            for &(j, c) in coeffs {
                acc += c * self.k[j][i];
            }
            self.tmp[i] = y[i] + h * acc;
        }
    }

    /// One trial step from `y` (with `k[0] = f(y)`); leaves the 5th-order
    /// solution in `y_new`, `f(y_new)` in `k[6]`, and returns the error norm.
    fn trial(&mut self, y: &[f64], h: f64, rtol: f64, atol: f64) -> Result<f64> {
        self.comb(y, h, &[(0, A21)]);
        self.f(1)?;
        self.comb(y, h, &[(0, A31), (1, A32)]);
        self.f(2)?;
        self.comb(y, h, &[(0, A41), (1, A42), (2, A43)]);
        self.f(3)?;
        self.comb(y, h, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        self.f(4)?;
        self.comb(y, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        self.f(5)?;
        self.comb(y, h, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)]);
        self.y_new.copy_from_slice(&self.tmp);
        self.f(6)?;
        let d = y.len();
        let mut err = vec![0.0; d];
        let mut scale = vec![0.0; d];
        for i in 0..d {
            let k = &self.k;
            err[i] = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            scale[i] = atol + rtol * y[i].abs().max(self.y_new[i].abs());
        }
        let e = rms_norm(&err, &scale);
        if e.is_finite() {
            Ok(e)
        } else {
            Err(Error::Eval(crate::expr::EvalError::NonFinite))
        }
    }

    fn dense(&self, s0: f64, h: f64, y: &[f64]) -> Dense {
        let d = y.len();
        let k = &self.k;
        let mut r: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; d]);
        for i in 0..d {
            let dy = self.y_new[i] - y[i];
            let bspl = h * k[0][i] - dy;
            r[0][i] = y[i];
            r[1][i] = dy;
            r[2][i] = bspl;
            r[3][i] = dy - h * k[6][i] - bspl;
            r[4][i] = h
                * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
        }
        Dense { s0, h, r }
    }
}

fn initial_step<S: PeakonSystem + ?Sized>(ode: &Ode<S>, y: &[f64], f0: &[f64], cfg: &IntegrationConfig) -> f64 {
    let scale: Vec<f64> = y.iter().map(|x| cfg.atol + cfg.rtol * x.abs()).collect();
    let d0 = rms_norm(y, &scale);
    let d1 = rms_norm(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; y.len()];
    let h1 = match ode.eval(&y1, &mut f1) {
        Ok(()) => {
            let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
            let d2 = rms_norm(&diff, &scale) / h0;
            let dm = d1.max(d2);
            if dm <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                (0.01 / dm).powf(0.2)
            }
        }
        Err(_) => h0 * 1e-3,
    };
    (100.0 * h0).min(h1).min(cfg.max_step)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Found {
    End,
    Collision(usize, usize),
    Turning(usize, usize),
    BlowUp,
}

impl Found {
    fn terminal(self) -> bool {
        !matches!(self, Found::Turning(..))
    }
}

/// Integrate `system` from `s0` to time `t1 > s0.t`.
pub fn integrate<S>(system: &S, s0: &PeakonState, t1: f64, cfg: &IntegrationConfig) -> Result<Trajectory>
where
    S: PeakonSystem + ?Sized,
{
    cfg.validate()?;
    PeakonState::new(s0.t, s0.alphas.clone(), s0.betas.clone())?;
    if !(t1 > s0.t) {
        return Err(Error::InvalidArgument(format!("end time {t1} must exceed start time {}", s0.t)));
    }
    let n = s0.len();
    let ode = Ode { sys: system, n, regularize: cfg.regularize };
    let mut y: Vec<f64> = s0.alphas.iter().chain(&s0.betas).copied().collect();
    if cfg.regularize {
        y.push(s0.t);
    }
    let mut s = s0.t;
    let mut st = Stepper::new(&ode);
    ode.eval(&y, &mut st.k[0])?;
    st.evaluations += 1;

    let mut traj = Trajectory {
        samples: vec![ode.sample(s, &y, &st.k[0])],
        events: Vec::new(),
        termination: Termination::EndReached,
        stats: Stats::default(),
    };
    let mut h = cfg.initial_step.unwrap_or_else(|| initial_step(&ode, &y, &st.k[0], cfg));
    let mut fac_old: f64 = 1e-4;
    let mut since_output = 0;
    let mut failures = 0;

    let finish = |mut traj: Trajectory, term: Termination, evals: usize| {
        traj.termination = term;
        traj.stats.evaluations = evals;
        traj
    };

    loop {
        if traj.stats.accepted + traj.stats.rejected >= cfg.max_steps {
            return Ok(finish(traj, Termination::StepLimit, st.evaluations));
        }
        h = h.min(cfg.max_step);
        let mut last = false;
        if !cfg.regularize && s + h >= t1 {
            h = t1 - s;
            last = true;
        }
        if h <= 1e-14 * s.abs().max(1.0) {
            return Ok(finish(traj, Termination::StepUnderflow, st.evaluations));
        }

        let err = match st.trial(&y, h, cfg.rtol, cfg.atol) {
            Ok(e) => e,
            Err(_) => {
                failures += 1;
                traj.stats.rejected += 1;
                if failures > MAX_FAILED_TRIALS {
                    return Ok(finish(traj, Termination::NonFinite, st.evaluations));
                }
                h *= 0.25;
                continue;
            }
        };
        let fac11 = err.powf(0.2 - BETA * 0.75);
        if err > 1.0 {
            traj.stats.rejected += 1;
            h /= (1.0 / FAC_MIN).min(fac11 / SAFETY);
            continue;
        }
        failures = 0;
        traj.stats.accepted += 1;
        let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        fac_old = err.max(1e-4);
        let h_next = h / fac;

        let dense = st.dense(s, h, &y);
        let found = scan_events(&ode, &dense, &y, &st, t1, cfg)?;
        let mut buf = vec![0.0; y.len()];
        let mut kbuf = vec![0.0; y.len()];
        let mut stop = None;
        for (theta, what) in found {
            dense.at(theta, &mut buf);
            let s_ev = dense.s(theta);
            ode.eval(&buf, &mut kbuf)?;
            let mut sample = ode.sample(s_ev, &buf, &kbuf);
            if matches!(what, Found::End) {
                sample.state.t = t1;
                traj.samples.push(sample);
                return Ok(finish(traj, Termination::EndReached, st.evaluations));
            }
            let (kind, pair) = match what {
                Found::Collision(i, j) => (EventKind::Collision, Some((i, j))),
                Found::Turning(i, j) => (EventKind::TurningPoint, Some((i, j))),
                _ => (EventKind::BlowUp, None),
            };
            traj.events.push(EventRecord { kind, t: sample.state.t, pair, state: sample.state.clone() });
            if what.terminal() {
                stop = Some((what, s_ev, sample));
                break;
            }
        }

        if let Some((what, s_ev, sample)) = stop {
            let restart = matches!(what, Found::Collision(..)) && cfg.collision_policy == CollisionPolicy::Continue;
            if traj.samples.last().is_some_and(|p| sample.state.t > p.state.t) {
                traj.samples.push(sample.clone());
            }
            if !restart {
                let term = if let Found::BlowUp = what { Termination::BlowUp } else { Termination::Collision };
                return Ok(finish(traj, term, st.evaluations));
            }
            if let Found::Collision(i, j) = what {
                let mut state = sample.state;
                let mid = 0.5 * (state.betas[i] + state.betas[j]);
                state.betas[i] = mid;
                state.betas[j] = mid;
                y[..n].copy_from_slice(&state.alphas);
                y[n..2 * n].copy_from_slice(&state.betas);
                if cfg.regularize {
                    y[2 * n] = state.t;
                }
                s = s_ev;
                ode.eval(&y, &mut st.k[0])?;
                st.evaluations += 1;
                h = cfg.initial_step.unwrap_or_else(|| initial_step(&ode, &y, &st.k[0], cfg));
                fac_old = 1e-4;
                since_output = 0;
                continue;
            }
        }

        y.copy_from_slice(&st.y_new);
        let k7 = st.k[6].clone();
        st.k[0].copy_from_slice(&k7);
        s = if last { t1 } else { s + h };
        since_output += 1;
        if last || since_output >= cfg.output_stride {
            let mut sample = ode.sample(s, &y, &st.k[0]);
            if last {
                sample.state.t = t1;
            }
            traj.samples.push(sample);
            since_output = 0;
        }
        if last {
            return Ok(finish(traj, Termination::EndReached, st.evaluations));
        }
        h = h_next;
    }
}

/// Events inside the accepted step, as `(theta, kind)` sorted by `theta`.
fn scan_events<S: PeakonSystem + ?Sized>(
    ode: &Ode<S>,
    dense: &Dense,
    y0: &[f64],
    st: &Stepper<S>,
    t1: f64,
    cfg: &IntegrationConfig,
) -> Result<Vec<(f64, Found)>> {
    let n = ode.n;
    let y1 = &st.y_new;
    let tol = cfg.event_tolerance / dense.h.abs();
    let mut buf = vec![0.0; y0.len()];
    let mut found = Vec::new();
    let mut root = |g: &mut dyn FnMut(&[f64]) -> Result<f64>, lo: f64, hi: f64, tol: f64| -> Result<f64> {
        let mut at = |theta: f64| {
            dense.at(theta, &mut buf);
            g(&buf)
        };
        match locate_event(&mut at, lo, hi, tol) {
            // The sign test used the step endpoints; the interpolant can
            // disagree by roundoff when the root sits at an endpoint.
            Err(Error::NoSignChange(..)) => Ok(if at(lo)?.abs() <= at(hi)?.abs() { lo } else { hi }),
            other => other,
        }
    };

    if cfg.regularize && y1[2 * n] >= t1 {
        let theta = root(&mut |y: &[f64]| Ok(y[2 * n] - t1), 0.0, 1.0, 1e-15)?;
        found.push((theta, Found::End));
    }

    let cap = cfg.amplitude_cap;
    let amp = |y: &[f64]| y[..n].iter().fold(0.0f64, |m, a| m.max(a.abs())) - cap;
    if amp(y0) < 0.0 && amp(y1) >= 0.0 {
        let theta = root(&mut |y: &[f64]| Ok(amp(y)), 0.0, 1.0, tol)?;
        found.push((theta, Found::BlowUp));
    }

    let eps = cfg.min_separation;
    let mut kb = vec![0.0; y0.len()];
    for i in 0..n {
        for j in i + 1..n {
            let gap = |y: &[f64]| y[n + i] - y[n + j];
            let rel = |k: &[f64]| k[n + i] - k[n + j];
            let (r0, r1) = (rel(&st.k[0]), rel(&st.k[6]));
            // Where the pair's relative speed changes sign inside the step.
            let turning = if r0 != 0.0 && r0 * r1 < 0.0 {
                Some(root(
                    &mut |y: &[f64]| {
                        ode.eval(y, &mut kb)?;
                        Ok(rel(&kb))
                    },
                    0.0,
                    1.0,
                    tol,
                )?)
            } else {
                None
            };
            if cfg.wants(EventKind::Collision) {
                let (g0, g1) = (gap(y0), gap(y1));
                let crossed = g0 != 0.0 && (g0 * g1 < 0.0 || g1 == 0.0);
                let near = |y: &[f64]| gap(y).abs() - eps;
                if crossed {
                    let th = root(&mut |y: &[f64]| Ok(gap(y)), 0.0, 1.0, tol)?;
                    let th = if eps > 0.0 && near(y0) > 0.0 {
                        root(&mut |y: &[f64]| Ok(near(y)), 0.0, th, tol)?
                    } else {
                        th
                    };
                    found.push((th, Found::Collision(i, j)));
                } else if eps > 0.0 && near(y0) > 0.0 && near(y1) <= 0.0 {
                    let th = root(&mut |y: &[f64]| Ok(near(y)), 0.0, 1.0, tol)?;
                    found.push((th, Found::Collision(i, j)));
                } else if let Some(tp) = turning.filter(|_| eps > 0.0 && near(y0) > 0.0) {
                    // A grazing approach that dips below the threshold and
                    // recovers within one step.
                    let mut at_tp = vec![0.0; y0.len()];
                    dense.at(tp, &mut at_tp);
                    if near(&at_tp) <= 0.0 {
                        let th = root(&mut |y: &[f64]| Ok(near(y)), 0.0, tp, tol)?;
                        found.push((th, Found::Collision(i, j)));
                    }
                }
            }
            if let Some(th) = turning.filter(|_| cfg.wants(EventKind::TurningPoint)) {
                found.push((th, Found::Turning(i, j)));
            }
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(found)
}

/// Fixed-step Dormand-Prince 5th-order solution, without events.
pub fn integrate_fixed<S>(system: &S, s0: &PeakonState, t1: f64, steps: usize) -> Result<PeakonState>
where
    S: PeakonSystem + ?Sized,
{
    if steps == 0 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }
    let n = s0.len();
    let ode = Ode { sys: system, n, regularize: false };
    let mut y: Vec<f64> = s0.alphas.iter().chain(&s0.betas).copied().collect();
    let mut st = Stepper::new(&ode);
    let h = (t1 - s0.t) / steps as f64;
    ode.eval(&y, &mut st.k[0])?;
    for _ in 0..steps {
        st.trial(&y, h, 1.0, 1.0)?;
        y.copy_from_slice(&st.y_new);
        let k7 = st.k[6].clone();
        st.k[0].copy_from_slice(&k7);
    }
    let mut out = ode.state(t1, &y);
    out.t = t1;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{GeneralRhs, GmchRhs};
    use crate::model::Preset;

    #[test]
    fn locate_linear_root() {
        let t = locate_event(|t| Ok(1.0 - t), 0.0, 2.0, 1e-12).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        assert!(matches!(locate_event(|t| Ok((t - 1.0) * (t - 1.0)), 0.0, 2.0, 1e-12), Err(Error::NoSignChange(..))));
    }

    #[test]
    fn ch_single_peakon_travels_at_unit_speed() {
        let rhs = GeneralRhs::new(Preset::Ch.equation().unwrap());
        let s0 = PeakonState::new(0.0, vec![1.0], vec![0.0]).unwrap();
        let tr = integrate(&rhs, &s0, 10.0, &IntegrationConfig::default()).unwrap();
        assert_eq!(tr.termination, Termination::EndReached);
        let end = tr.last();
        assert_eq!(end.t, 10.0);
        assert!((end.betas[0] - 10.0).abs() < 1e-7);
        assert!(tr.samples.iter().all(|s| s.state.alphas[0] == 1.0));
        assert!(tr.samples.windows(2).all(|w| w[1].state.t > w[0].state.t));
    }

    #[test]
    fn gmch_equal_magnitudes_keep_separation() {
        let s0 = PeakonState::new(0.0, vec![1.0, -1.0], vec![1.0, 0.0]).unwrap();
        let tr = integrate(&GmchRhs { p: 2 }, &s0, 10.0, &IntegrationConfig::default()).unwrap();
        for s in &tr.samples {
            assert!((s.state.betas[0] - s.state.betas[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gmch_p1_linear_collision_time() {
        let (a1, a2) = (1.0f64, 0.5f64);
        let gamma = 2.0 / 3.0 * (a1 * a1 - a2 * a2);
        let s0 = PeakonState::new(0.0, vec![a1, a2], vec![-1.5, 0.0]).unwrap();
        let cfg = IntegrationConfig { min_separation: 0.0, ..Default::default() };
        let tr = integrate(&GmchRhs { p: 1 }, &s0, 10.0, &cfg).unwrap();
        assert_eq!(tr.termination, Termination::Collision);
        let ev = tr.events_of(EventKind::Collision).next().unwrap();
        assert!((ev.t - 1.5 / gamma).abs() < 1e-9, "{}", ev.t);
    }

    #[test]
    fn ch_peakon_antipeakon_collides() {
        let rhs = GeneralRhs::new(Preset::Ch.equation().unwrap());
        let s0 = PeakonState::new(0.0, vec![1.0, -1.0], vec![-2.0, 2.0]).unwrap();
        let tr = integrate(&rhs, &s0, 20.0, &IntegrationConfig::default()).unwrap();
        assert_eq!(tr.termination, Termination::Collision);
        let ev = &tr.events[tr.events.len() - 1];
        assert!((ev.state.betas[0] - ev.state.betas[1]).abs() <= 1e-8);
    }

    #[test]
    fn continue_policy_restarts() {
        let s0 = PeakonState::new(0.0, vec![1.0, 0.5], vec![-1.5, 0.0]).unwrap();
        let cfg = IntegrationConfig { collision_policy: CollisionPolicy::Continue, ..Default::default() };
        let tr = integrate(&GmchRhs { p: 1 }, &s0, 6.0, &cfg).unwrap();
        assert_eq!(tr.termination, Termination::EndReached);
        assert_eq!(tr.events_of(EventKind::Collision).count(), 1);
        let end = tr.last();
        assert!(end.betas[0] > end.betas[1]);
    }

    #[test]
    fn fixed_step_converges() {
        let rhs = GeneralRhs::new(Preset::Ch.equation().unwrap());
        let s0 = PeakonState::new(0.0, vec![1.0, 0.4], vec![-3.0, 0.0]).unwrap();
        let reference = integrate_fixed(&rhs, &s0, 2.0, 4096).unwrap();
        let err = |k: usize| {
            let s = integrate_fixed(&rhs, &s0, 2.0, k).unwrap();
            (s.betas[0] - reference.betas[0]).abs() + (s.alphas[0] - reference.alphas[0]).abs()
        };
        assert!(err(20) / err(40) >= 16.0);
    }
}
