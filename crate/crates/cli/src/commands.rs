//! One function per subcommand.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use peakon_core::conservation::{invariant_columns, invariant_row, monitor, summarize_drift, InvariantReport};
use peakon_core::dynamics::{single_peakon_test, GeneralRhs};
use peakon_core::field::{h1_balance_residual, mollified_peakons, FieldTermination};
use peakon_core::twopeakon::classify_pair;
use peakon_core::wavebreak::{blowup_indicator, transport_coefficients};
use peakon_core::*;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, FieldInit, RunConfig};
use crate::output::{fmt_f64, read_csv, write_json, CsvOut};

/// How a command ended, mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    BlowUp,
    StepFailure,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::BlowUp => 2,
            Status::StepFailure => 3,
        }
    }
}

pub struct RunContext {
    pub cfg: RunConfig,
    /// Directory holding the config file; relative paths resolve against it.
    pub base: PathBuf,
    pub out: PathBuf,
    pub continue_through_collisions: bool,
}

impl RunContext {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn integration(&self) -> IntegrationConfig {
        let mut ic = self.cfg.integrator.clone();
        if self.continue_through_collisions {
            ic.collision_policy = CollisionPolicy::Continue;
        }
        ic
    }
}

fn status_of(t: Termination) -> Status {
    match t {
        Termination::EndReached | Termination::Collision => Status::Ok,
        Termination::BlowUp | Termination::NonFinite => Status::BlowUp,
        Termination::StepUnderflow | Termination::StepLimit => Status::StepFailure,
    }
}

fn trajectory_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("alpha_{i}")));
    h.extend((1..=n).map(|i| format!("beta_{i}")));
    h
}

fn write_invariants(path: &Path, report: &InvariantReport) -> Result<()> {
    let mut out = CsvOut::create(path, &report.columns)?;
    for row in &report.rows {
        out.row(row)?;
    }
    out.finish()
}

fn print_drift(report: &InvariantReport) {
    let parts: Vec<String> = report.columns[1..]
        .iter()
        .zip(&report.drift_excluding_events)
        .map(|(c, d)| format!("{c} {d:.3e}"))
        .collect();
    println!("drift: {}", parts.join(", "));
}

#[derive(Serialize)]
struct EventsFile<'a> {
    termination: Termination,
    stats: integrator::Stats,
    events: &'a [integrator::EventRecord],
}

pub fn simulate(ctx: &RunContext) -> Result<Status> {
    let cfg = &ctx.cfg;
    let eq = cfg.equation.equation()?;
    let s0 = cfg.initial_state()?;
    let t1 = cfg.t_end()?;
    let ic = ctx.integration();
    let traj = integrate(&GeneralRhs::new(eq), &s0, t1, &ic).map_err(|e| match e {
        Error::InvalidArgument(m) => anyhow!(ConfigError::at("integrator", m)),
        other => anyhow!(other),
    })?;

    let n = s0.len();
    let mut out = CsvOut::create(&ctx.path("trajectory.csv"), &trajectory_header(n))?;
    for s in &traj.samples {
        let st = &s.state;
        if st.len() != n {
            bail!("peakon count changed from {n} to {} at t = {}", st.len(), st.t);
        }
        let mut row = vec![st.t];
        row.extend(&st.alphas);
        row.extend(&st.betas);
        out.row(&row)?;
    }
    out.finish()?;
    let events = EventsFile { termination: traj.termination, stats: traj.stats, events: &traj.events };
    write_json(&ctx.path("events.json"), &events)?;

    if cfg.monitor {
        let family = cfg.equation.family()?;
        let model = if n == 2 { cfg.equation.two_peakon_model()? } else { None };
        let report = monitor(&traj, family.as_ref(), model, ic.event_tolerance)?;
        write_invariants(&ctx.path("invariants.csv"), &report)?;
        print_drift(&report);
    }
    let last = traj.last();
    println!(
        "termination: {}, t = {}, events: {}",
        serde_json::to_value(traj.termination)?.as_str().unwrap_or("?"),
        last.t,
        traj.events.len()
    );
    Ok(status_of(traj.termination))
}

/// Rebuild peakon states from a trajectory CSV.
pub fn read_trajectory(path: &Path) -> Result<Vec<PeakonState>> {
    let (header, rows) = read_csv(path)?;
    let n = (header.len().saturating_sub(1)) / 2;
    if n == 0 || header != trajectory_header(n) {
        bail!("{}: expected columns t, alpha_1..N, beta_1..N", path.display());
    }
    rows.into_iter()
        .map(|r| {
            if r.len() != 2 * n + 1 {
                bail!("{}: ragged row", path.display());
            }
            Ok(PeakonState::new(r[0], r[1..=n].to_vec(), r[n + 1..].to_vec())?)
        })
        .collect()
}

pub fn invariants(ctx: &RunContext) -> Result<Status> {
    let cfg = &ctx.cfg;
    let rel = cfg.trajectory.as_ref().ok_or_else(|| ConfigError::at("trajectory", "missing 'trajectory' path"))?;
    let states = read_trajectory(&ctx.base.join(rel))?;
    let family = cfg.equation.family()?;
    let model = if states[0].len() == 2 { cfg.equation.two_peakon_model()? } else { None };
    let rows: Vec<Vec<f64>> = states
        .par_iter()
        .map(|s| invariant_row(s, family.as_ref(), model))
        .collect::<peakon_core::Result<_>>()?;
    let excluded = vec![false; rows.len()];
    let report = summarize_drift(invariant_columns(family.as_ref(), model), rows, &excluded);
    write_invariants(&ctx.path("invariants.csv"), &report)?;
    print_drift(&report);
    Ok(Status::Ok)
}

pub fn single(ctx: &RunContext) -> Result<Status> {
    let eq = ctx.cfg.equation.equation()?;
    let (grid, tol) = ctx.cfg.amplitudes()?;
    let amps: Vec<f64> = grid.into_iter().filter(|a| *a != 0.0).collect();
    let reports = amps
        .par_iter()
        .map(|&a| single_peakon_test(&eq, a, tol))
        .collect::<peakon_core::Result<Vec<_>>>()?;
    let header = ["a", "is_tw", "condition_residual", "c"].map(String::from);
    let mut out = CsvOut::create(&ctx.path("single.csv"), &header)?;
    for r in &reports {
        out.text_row(&[fmt_f64(r.a), r.is_travelling_wave.to_string(), fmt_f64(r.condition_residual), fmt_f64(r.c)])?;
    }
    out.finish()?;
    let tw = reports.iter().filter(|r| r.is_travelling_wave).count();
    println!("{tw} of {} amplitudes give travelling waves", reports.len());
    Ok(Status::Ok)
}

pub fn classify2(ctx: &RunContext) -> Result<Status> {
    let cfg = &ctx.cfg;
    let model = cfg.equation.two_peakon_model()?.ok_or_else(|| {
        ConfigError::at("equation.preset", "two-peakon classification covers ch, gch with p = 2, and gmch with p = 1, 2")
    })?;
    let s0 = cfg.initial_state()?;
    if s0.len() != 2 {
        return Err(ConfigError::at("initial", format!("need exactly two peakons, got {}", s0.len())).into());
    }
    let report = classify_pair(model, &s0)?;
    write_json(&ctx.path("regime.json"), &report)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct BreakcheckFile {
    coefficients: BlowupCoefficients,
    velocity: String,
    reaction: String,
}

/// Grid solver and initial field from the `field` section.
fn field_setup(ctx: &RunContext, eq: &FgEquation) -> Result<(FieldSolver, FieldState)> {
    let spec = ctx.cfg.field()?;
    let solver = FieldSolver::new(eq, spec.period, spec.n).map_err(|e| ConfigError::at("field", e.to_string()))?;
    let init = match &spec.u0 {
        FieldInit::Gaussian { amplitude, center, width } => {
            let h = solver.spacing();
            let u: Vec<f64> =
                (0..spec.n).map(|j| amplitude * (-((j as f64 * h - center) / width).powi(2)).exp()).collect();
            FieldState::new(spec.period, 0.0, solver.momentum_of(&u))
        }
        FieldInit::Peakons { width } => {
            let init = ctx.cfg.initial.as_ref().ok_or_else(|| ConfigError::at("initial", "peakon field data needs 'initial'"))?;
            mollified_peakons(spec.period, spec.n, &init.alphas, &init.betas, *width)
        }
    };
    Ok((solver, init.map_err(|e| ConfigError::at("field.u0", e.to_string()))?))
}

fn field_status(t: FieldTermination) -> Status {
    match t {
        FieldTermination::EndReached => Status::Ok,
        FieldTermination::BlowUp => Status::BlowUp,
    }
}

pub fn breakcheck(ctx: &RunContext) -> Result<Status> {
    let cfg = &ctx.cfg;
    let eq = cfg.equation.equation()?;
    let coeffs = blowup_ab(&eq)?;
    let tf = transport_coefficients(&eq)?;
    println!("A = {}", coeffs.a_expr());
    println!("B = {}", coeffs.b_expr());
    let file = BreakcheckFile {
        coefficients: coeffs.clone(),
        velocity: tf.velocity.to_string(),
        reaction: tf.reaction.to_string(),
    };
    write_json(&ctx.path("breakcheck.json"), &file)?;
    if cfg.field.is_none() {
        return Ok(Status::Ok);
    }
    let (solver, init) = field_setup(ctx, &eq)?;
    let spec = cfg.field()?;
    let run = solver.run(&init, cfg.t_end()?, spec.max_dt, spec.sample_every)?;
    let w = cfg.indicator.unwrap_or_default();
    let header = ["t", "indicator", "breaking_integral", "max_abs_m"].map(String::from);
    let mut out = CsvOut::create(&ctx.path("indicator.csv"), &header)?;
    for snap in &run.snapshots {
        let ind = blowup_indicator(&coeffs, solver.samples(&snap.m), w.alpha, w.beta)
            .map_err(|e| ConfigError::at("indicator", e.to_string()))?;
        let integral = solver.breaking_integral(&coeffs, &snap.m)?;
        let mmax = snap.m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        out.row(&[snap.t, ind, integral, mmax])?;
    }
    out.finish()?;
    Ok(field_status(run.termination))
}

#[derive(Serialize)]
struct FieldSummary {
    termination: FieldTermination,
    steps: usize,
    snapshots: usize,
    t_end: f64,
    momentum_drift: f64,
    h1_drift: f64,
    h1m_balance_residual: f64,
}

pub fn field(ctx: &RunContext) -> Result<Status> {
    let cfg = &ctx.cfg;
    let eq = cfg.equation.equation()?;
    let (solver, init) = field_setup(ctx, &eq)?;
    let spec = cfg.field()?;
    let run = solver.run(&init, cfg.t_end()?, spec.max_dt, spec.sample_every).context("field run")?;
    let header = ["t", "x", "m", "u", "u_x"].map(String::from);
    let mut out = CsvOut::create(&ctx.path("field.csv"), &header)?;
    let h = solver.spacing();
    for snap in &run.snapshots {
        let d = solver.helmholtz_invert(&snap.m);
        for j in 0..solver.n() {
            out.row(&[snap.t, j as f64 * h, snap.m[j], d.u[j], d.ux[j]])?;
        }
    }
    out.finish()?;
    let first = &run.snapshots[0].m;
    let last = &run.snapshots.last().context("empty run")?.m;
    let drift = |f: &dyn Fn(&[f64]) -> f64| conservation::relative_drift(f(first), f(last));
    let residual = match blowup_ab(&eq) {
        Ok(c) if run.termination == FieldTermination::EndReached => h1_balance_residual(&solver, &c, &run)?,
        _ => f64::NAN,
    };
    let summary = FieldSummary {
        termination: run.termination,
        steps: run.steps,
        snapshots: run.snapshots.len(),
        t_end: run.snapshots.last().map_or(0.0, |s| s.t),
        momentum_drift: drift(&|m| solver.momentum(m)),
        h1_drift: drift(&|m| solver.h1_norm_sq(m)),
        h1m_balance_residual: residual,
    };
    write_json(&ctx.path("field_summary.json"), &summary)?;
    println!(
        "termination: {:?}, steps {}, momentum drift {:.3e}, H1 drift {:.3e}",
        run.termination, run.steps, summary.momentum_drift, summary.h1_drift
    );
    Ok(field_status(run.termination))
}
