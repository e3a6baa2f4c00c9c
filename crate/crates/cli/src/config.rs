//! The JSON run configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use peakon_core::model::PRESET_NAMES;
use peakon_core::{FgEquation, HamiltonianFamily, IntegrationConfig, PeakonState, Preset, TwoPeakonModel};
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

/// A problem with the configuration, reported with exit code 1.
#[derive(Debug)]
pub struct ConfigError {
    pub location: String,
    pub message: String,
}

impl ConfigError {
    pub fn at(location: impl Into<String>, message: impl Into<String>) -> ConfigError {
        ConfigError { location: location.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at {}: {}", self.location, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub equation: EquationSpec,
    #[serde(default)]
    pub initial: Option<InitialPeakons>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub integrator: IntegrationConfig,
    /// Write invariant columns next to a simulated trajectory.
    #[serde(default = "yes")]
    pub monitor: bool,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub field: Option<FieldSpec>,
    #[serde(default)]
    pub indicator: Option<IndicatorWeights>,
    /// Trajectory CSV read by `invariants`, relative to the config file.
    #[serde(default)]
    pub trajectory: Option<PathBuf>,
    /// Output directory when `--out` is not given, relative to the config file.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

/// An equation given by preset name, by `f`, `g` texts, or by `f1`, `g1`
/// texts in `s = u² - u_x²`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSpec {
    pub preset: Option<String>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub p: Option<i64>,
    pub k: Option<u32>,
    pub f: Option<String>,
    pub g: Option<String>,
    pub f1: Option<String>,
    pub g1: Option<String>,
    pub name: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialPeakons {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default)]
    pub amplitudes: Option<Vec<f64>>,
    #[serde(default)]
    pub from: Option<f64>,
    #[serde(default)]
    pub to: Option<f64>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default = "default_tw_tol")]
    pub tolerance: f64,
}

fn default_tw_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub period: f64,
    pub n: usize,
    pub max_dt: f64,
    #[serde(default = "one")]
    pub sample_every: usize,
    pub u0: FieldInit,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldInit {
    /// `u0 = amplitude exp(-((x - center) / width)²)`.
    Gaussian { amplitude: f64, center: f64, width: f64 },
    /// The peakons of `initial`, mollified by a Gaussian of this width.
    Peakons { width: f64 },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for IndicatorWeights {
    fn default() -> Self {
        IndicatorWeights { alpha: 1.0, beta: 1.0 }
    }
}

/// Parse a config document, naming the line and column of syntax and
/// schema errors.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
        let what = e.to_string();
        let message = what.rsplit_once(" at line ").map_or(what.as_str(), |(m, _)| m).to_string();
        ConfigError::at(format!("line {}, column {}", e.line(), e.column()), message)
    })?;
    if cfg.schema != SCHEMA_VERSION {
        return Err(ConfigError::at("schema", format!("unsupported schema {}, expected {SCHEMA_VERSION}", cfg.schema)));
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::at(path.display().to_string(), format!("cannot read: {e}")))?;
    parse_config(&text)
}

fn need<T: Copy>(v: Option<T>, field: &str, preset: &str) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError::at(format!("equation.{field}"), format!("preset '{preset}' needs '{field}'")))
}

impl EquationSpec {
    fn exponent(&self, preset: &str) -> Result<i64, ConfigError> {
        need(self.p, "p", preset)
    }

    fn unsigned_p(&self, preset: &str) -> Result<u32, ConfigError> {
        let p = self.exponent(preset)?;
        u32::try_from(p).map_err(|_| ConfigError::at("equation.p", format!("p must be a positive integer, got {p}")))
    }

    fn signed_p(&self, preset: &str) -> Result<i32, ConfigError> {
        let p = self.exponent(preset)?;
        i32::try_from(p).map_err(|_| ConfigError::at("equation.p", format!("p = {p} is out of range")))
    }

    /// The named preset, or `None` for equations given as text.
    pub fn preset(&self) -> Result<Option<Preset>, ConfigError> {
        let Some(name) = self.preset.as_deref() else {
            return Ok(None);
        };
        let preset = match name {
            "ch" => Preset::Ch,
            "dp" => Preset::Dp,
            "novikov" => Preset::Novikov,
            "mch" => Preset::Mch,
            "b-family" => Preset::BFamily { b: need(self.b, "b", name)? },
            "modified-b" => Preset::ModifiedB { b: need(self.b, "b", name)? },
            "unified-chdpn" => Preset::UnifiedChdpn { b: need(self.b, "b", name)?, p: self.signed_p(name)? },
            "unified-chdpnmch" => Preset::UnifiedChdpnMch {
                a: need(self.a, "a", name)?,
                b: need(self.b, "b", name)?,
                p: self.signed_p(name)?,
            },
            "gch" => Preset::Gch { p: self.unsigned_p(name)? },
            "gmch" => Preset::Gmch { p: self.unsigned_p(name)? },
            "unified-gch-gmch" => Preset::UnifiedGchGmch {
                k: need(self.k, "k", name)?,
                a: need(self.a, "a", name)?,
                b: need(self.b, "b", name)?,
            },
            "hamiltonian" => {
                let (Some(f1), Some(g1)) = (&self.f1, &self.g1) else {
                    return Err(ConfigError::at("equation", "preset 'hamiltonian' needs 'f1' and 'g1'"));
                };
                let family = HamiltonianFamily::from_text(self.name.as_deref().unwrap_or("hamiltonian"), f1, g1)
                    .map_err(|e| ConfigError::at("equation.f1/g1", e.to_string()))?;
                Preset::Hamiltonian(family)
            }
            other => {
                return Err(ConfigError::at(
                    "equation.preset",
                    format!("unknown preset '{other}', expected one of {}", PRESET_NAMES.join(", ")),
                ))
            }
        };
        Ok(Some(preset))
    }

    pub fn equation(&self) -> Result<FgEquation, ConfigError> {
        if let Some(preset) = self.preset()? {
            return preset.equation().map_err(|e| ConfigError::at("equation", e.to_string()));
        }
        let name = self.name.clone().unwrap_or_else(|| "custom".into());
        match (&self.f, &self.g, &self.f1, &self.g1) {
            (Some(f), Some(g), None, None) => {
                FgEquation::from_text(name, f, g).map_err(|e| ConfigError::at("equation.f/g", e.to_string()))
            }
            (None, None, Some(_), Some(_)) => self.family()?.unwrap().to_fg().map_err(|e| ConfigError::at("equation", e.to_string())),
            _ => Err(ConfigError::at("equation", "give 'preset', or both 'f' and 'g', or both 'f1' and 'g1'")),
        }
    }

    /// The Hamiltonian `(f1, g1)` pair when the equation has one.
    pub fn family(&self) -> Result<Option<HamiltonianFamily>, ConfigError> {
        if let Some(preset) = self.preset()? {
            return Ok(preset.hamiltonian_family());
        }
        match (&self.f1, &self.g1) {
            (Some(f1), Some(g1)) => {
                let name = self.name.as_deref().unwrap_or("custom");
                HamiltonianFamily::from_text(name, f1, g1)
                    .map(Some)
                    .map_err(|e| ConfigError::at("equation.f1/g1", e.to_string()))
            }
            _ => Ok(None),
        }
    }

    /// The two-peakon model that matches the preset, if any.
    pub fn two_peakon_model(&self) -> Result<Option<TwoPeakonModel>, ConfigError> {
        Ok(match self.preset()? {
            Some(Preset::Ch) | Some(Preset::Gch { p: 1 }) => Some(TwoPeakonModel::ChP1),
            Some(Preset::Gch { p: 2 }) => Some(TwoPeakonModel::GchP2),
            Some(Preset::Gmch { p: 1 }) => Some(TwoPeakonModel::GmchP1),
            Some(Preset::Gmch { p: 2 }) => Some(TwoPeakonModel::GmchP2),
            _ => None,
        })
    }
}

impl RunConfig {
    pub fn initial_state(&self) -> Result<PeakonState, ConfigError> {
        let init = self.initial.as_ref().ok_or_else(|| ConfigError::at("initial", "missing 'initial' peakons"))?;
        PeakonState::new(0.0, init.alphas.clone(), init.betas.clone())
            .map_err(|e| ConfigError::at("initial", e.to_string()))
    }

    pub fn t_end(&self) -> Result<f64, ConfigError> {
        match self.t_end {
            Some(t) if t.is_finite() && t > 0.0 => Ok(t),
            Some(t) => Err(ConfigError::at("t_end", format!("must be positive, got {t}"))),
            None => Err(ConfigError::at("t_end", "missing 't_end'")),
        }
    }

    pub fn amplitudes(&self) -> Result<(Vec<f64>, f64), ConfigError> {
        let sweep = self.sweep.as_ref().ok_or_else(|| ConfigError::at("sweep", "missing 'sweep'"))?;
        let grid = match (&sweep.amplitudes, sweep.from, sweep.to, sweep.count) {
            (Some(list), None, None, None) => list.clone(),
            (None, Some(a), Some(b), Some(n)) if n >= 2 => {
                (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
            }
            (None, Some(a), Some(_), Some(1)) => vec![a],
            _ => return Err(ConfigError::at("sweep", "give 'amplitudes', or 'from', 'to' and 'count'")),
        };
        if grid.is_empty() {
            return Err(ConfigError::at("sweep", "no amplitudes"));
        }
        Ok((grid, sweep.tolerance))
    }

    pub fn field(&self) -> Result<&FieldSpec, ConfigError> {
        self.field.as_ref().ok_or_else(|| ConfigError::at("field", "missing 'field' section"))
    }
}
