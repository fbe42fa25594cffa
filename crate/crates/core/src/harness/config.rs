//! Run configuration: a TOML document whose tables mirror the solver
//! blocks. Every field has a default, so an empty file is a valid config.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constitutive::{validate_params, ConstitutiveParams};
use crate::error::{Error, Result};
use crate::galerkin::Truncation;
use crate::integrator::StepConfig;
use crate::spectral::{band_limit, SpectralBasis, ScalarFamily};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    CONFIG_SCHEMA_VERSION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    /// Box side `L`.
    pub length: f64,
    /// Base resolution `N` (even, at least 4).
    pub resolution: usize,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            length: TAU,
            resolution: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `u = 0`, `H = B sin(κz) x̂`, uniform density.
    SingleModeDecay,
    /// `u = U sin(κx) ŷ`, `H = B cos(κz) x̂`, `ρ = ρ̄ + δ cos(κy)`.
    #[default]
    SingleModeMhd,
    /// `u = U(−sin κy, sin κx, 0)`, `H = B(−sin κy, sin 2κx, 0)`,
    /// `ρ = ρ̄ + δ cos κx`.
    OrszagTang,
    /// Seeded random coefficients with spectrum decaying like `1/(1+|n|²)`.
    RandomBandLimited,
    /// `ρ = ρ̄ + δ cos κz`, `u = U sin(κz) x̂`, `H = B sin(κz) x̂`.
    Layered,
}

/// Initial data. `κ = 2π/L`; every family adds
/// `θ₀ = θ̄ + θ_a cos(κx)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub family: Family,
    pub velocity: f64,
    pub magnetic: f64,
    pub rho_mean: f64,
    pub rho_amplitude: f64,
    pub theta_mean: f64,
    pub theta_amplitude: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            family: Family::default(),
            velocity: 0.5,
            magnetic: 0.5,
            rho_mean: 1.0,
            rho_amplitude: 0.2,
            theta_mean: 1.0,
            theta_amplitude: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Run directory below the output root; defaults to the config name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    /// Steps between diagnostics samples.
    pub cadence: usize,
    /// Write final-state field snapshots.
    pub snapshots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: None,
            cadence: 10,
            snapshots: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Truncation levels for the `k → ∞` study (`k_u = k_θ = k_H = k`).
    pub k_values: Vec<usize>,
    /// Density diffusion values for the `ε → 0` study.
    pub eps_values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorConfig {
    pub lambda: f64,
    pub decay_slack: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            decay_slack: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub name: String,
    pub seed: u64,
    pub constitutive: ConstitutiveParams<f64>,
    pub domain: DomainConfig,
    pub truncation: Truncation<f64>,
    pub time: StepConfig<f64>,
    pub initial: InitialConfig,
    pub output: OutputConfig,
    pub monitor: MonitorConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            name: "run".into(),
            seed: 0,
            constitutive: ConstitutiveParams::default(),
            domain: DomainConfig::default(),
            truncation: Truncation::default(),
            time: StepConfig::default(),
            initial: InitialConfig::default(),
            output: OutputConfig::default(),
            monitor: MonitorConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Parses without validating.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        Error::ConfigParse {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })
}

/// Parses and validates.
pub fn config_from_str(text: &str) -> Result<RunConfig> {
    let cfg = parse_config(text)?;
    validate_config(&cfg)?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    config_from_str(&std::fs::read_to_string(path)?)
}

pub fn to_toml(cfg: &RunConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Serialization(e.to_string()))
}

impl InitialConfig {
    /// Extreme values of the initial density and temperature.
    pub fn rho_range(&self) -> (f64, f64) {
        let d = self.rho_amplitude.abs();
        (self.rho_mean - d, self.rho_mean + d)
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_mean - self.theta_amplitude.abs()
    }
}

/// Collects every violated condition; the messages name the inequality.
pub fn config_violations(cfg: &RunConfig) -> Vec<String> {
    let mut v: Vec<String> = validate_params(&cfg.constitutive)
        .violations
        .into_iter()
        .map(|x| x.message)
        .collect();
    let p = &cfg.constitutive;
    if cfg.schema_version != CONFIG_SCHEMA_VERSION {
        v.push(format!(
            "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
            cfg.schema_version
        ));
    }
    let d = &cfg.domain;
    if !(d.length > 0.0 && d.length.is_finite()) {
        v.push("box length must be positive (length > 0)".into());
    }
    if d.resolution < 4 || d.resolution % 2 != 0 {
        v.push("resolution must be even and at least 4 (N even, N >= 4)".into());
    } else if d.length > 0.0 {
        let t = &cfg.truncation;
        let probe = SpectralBasis::<f64>::new(d.length, d.resolution, 0, 0, ScalarFamily::WithMean);
        if let Ok(b) = probe {
            if t.k_u.max(t.k_h) > b.available_vector_modes() {
                v.push(format!(
                    "insufficient resolution: {} vector modes requested, {} available at N = {} (band limit {})",
                    t.k_u.max(t.k_h),
                    b.available_vector_modes(),
                    d.resolution,
                    band_limit(d.resolution)
                ));
            }
            if t.k_theta > b.available_scalar_modes() {
                v.push(format!(
                    "insufficient resolution: {} scalar modes requested, {} available",
                    t.k_theta,
                    b.available_scalar_modes()
                ));
            }
        }
    }
    if cfg.truncation.k_theta == 0 {
        v.push("the temperature needs at least the constant mode (k_theta >= 1)".into());
    }
    if !(cfg.truncation.eps_density >= 0.0) {
        v.push("density diffusion must be non-negative (eps_density >= 0)".into());
    }
    if let Err(e) = cfg.time.validate() {
        v.push(e.to_string());
    }
    if cfg.output.cadence == 0 {
        v.push("output cadence must be at least 1 (cadence >= 1)".into());
    }
    if !(cfg.monitor.lambda > 0.0 && cfg.monitor.lambda < 1.0) {
        v.push("lambda must lie in (0, 1) (0 < lambda < 1)".into());
    }
    if !(cfg.monitor.decay_slack >= 0.0) {
        v.push("decay slack must be non-negative".into());
    }
    let ic = &cfg.initial;
    let (lo, hi) = ic.rho_range();
    if !(lo >= p.rho_low && hi <= p.rho_high) {
        v.push(format!(
            "initial density range [{lo}, {hi}] must lie within [{}, {}] (rho_low <= rho0 <= rho_high)",
            p.rho_low, p.rho_high
        ));
    }
    if !(ic.theta_min() >= p.theta_low && ic.theta_min() > 0.0) {
        v.push(format!(
            "initial temperature minimum {} must be at least the floor {} (0 < theta_low <= theta0)",
            ic.theta_min(),
            p.theta_low
        ));
    }
    for (name, x) in [("velocity", ic.velocity), ("magnetic", ic.magnetic)] {
        if !x.is_finite() {
            v.push(format!("initial {name} amplitude must be finite (finite initial energy)"));
        }
    }
    v
}

pub fn validate_config(cfg: &RunConfig) -> Result<()> {
    let v = config_violations(cfg);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::ConfigInvalid(v))
    }
}

/// Checks the sweep block: each list present must have at least 3 values.
pub fn validate_sweep(s: &SweepConfig) -> Result<()> {
    let mut v = Vec::new();
    if s.k_values.is_empty() && s.eps_values.is_empty() {
        v.push("sweep block lists no k_values or eps_values".to_string());
    }
    for (name, n) in [("k_values", s.k_values.len()), ("eps_values", s.eps_values.len())] {
        if n > 0 && n < 3 {
            v.push(format!("{name}: need >= 3 values, got {n}"));
        }
    }
    if s.eps_values.iter().any(|&e| !(e >= 0.0)) {
        v.push("eps_values must be non-negative".into());
    }
    if s.k_values.contains(&0) {
        v.push("k_values must be positive".into());
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::ConfigInvalid(v))
    }
}
