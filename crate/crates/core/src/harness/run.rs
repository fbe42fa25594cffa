//! Single-trajectory runs: build the system from a config, integrate with
//! a diagnostics monitor attached, and write the run directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{to_toml, RunConfig, CONFIG_SCHEMA_VERSION};
use super::initial::initial_state;
use crate::diagnostics::{
    apriori_monitor, write_csv, AprioriReport, DiagnosticsMonitor, DiagnosticsRecord, InvariantFlags, MonitorSettings,
    CSV_SCHEMA_VERSION,
};
use crate::error::{Error, Result};
use crate::galerkin::{GalerkinSystem, SimState};
use crate::integrator::{integrate, Observer, StepInfo};
use crate::spectral::{write_snapshot, Field, MODE_ORDERING_VERSION};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "MHDG_OUTPUT_ROOT";
pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Output root: explicit value, else `$MHDG_OUTPUT_ROOT`, else `./runs`.
pub fn output_root(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Pass,
    InvariantFailure,
    NumericalAbort,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::InvariantFailure => 1,
            RunStatus::NumericalAbort => 3,
        }
    }

    fn of_error(e: &Error) -> Self {
        if e.is_invariant() {
            RunStatus::InvariantFailure
        } else {
            RunStatus::NumericalAbort
        }
    }
}

/// One sampled state, kept for the convergence studies.
#[derive(Clone, Debug)]
pub struct TrajectorySample {
    pub t: f64,
    pub rho: Vec<f64>,
    pub a: Vec<f64>,
}

/// In-memory result of a trajectory.
#[derive(Debug)]
pub struct Simulation {
    pub system: GalerkinSystem<f64>,
    pub records: Vec<DiagnosticsRecord<f64>>,
    pub flags: InvariantFlags,
    pub trajectory: Vec<TrajectorySample>,
    pub final_state: Option<SimState<f64>>,
    pub total_clamps: usize,
    pub max_iterations: usize,
    /// Set when the integration stopped early; records hold the samples
    /// taken until then.
    pub error: Option<Error>,
}

impl Simulation {
    pub fn status(&self) -> RunStatus {
        match &self.error {
            Some(e) => RunStatus::of_error(e),
            None if self.flags.passed() => RunStatus::Pass,
            None => RunStatus::InvariantFailure,
        }
    }

    pub fn csv(&self) -> Result<String> {
        let mut out = Vec::new();
        write_csv(&mut out, &self.records)?;
        String::from_utf8(out).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Amplitude decay rate `−ln(‖H(T)‖/‖H(0)‖)/T` over the samples.
    pub fn magnetic_decay_rate(&self) -> Option<f64> {
        let (first, last) = (self.records.first()?, self.records.last()?);
        let dt = last.t - first.t;
        if dt <= 0.0 || first.h_norm_sqr <= 0.0 || last.h_norm_sqr <= 0.0 {
            return None;
        }
        Some(-0.5 * (last.h_norm_sqr / first.h_norm_sqr).ln() / dt)
    }
}

/// Knobs that are not part of the physical configuration.
#[derive(Clone, Copy, Debug)]
pub struct SimulateOptions {
    /// Keep `(t, ρ, a)` at every sample.
    pub keep_trajectory: bool,
    /// Multiplier of the Lorentz force in the momentum equation; `−1`
    /// injects a sign fault for mutation checks.
    pub lorentz_sign: f64,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            keep_trajectory: false,
            lorentz_sign: 1.0,
        }
    }
}

pub fn build_system(cfg: &RunConfig) -> Result<GalerkinSystem<f64>> {
    GalerkinSystem::new(
        cfg.constitutive.clone(),
        cfg.domain.length,
        cfg.domain.resolution,
        cfg.truncation.clone(),
    )
}

struct Recorder<'a> {
    monitor: &'a mut DiagnosticsMonitor<f64>,
    trajectory: Option<&'a mut Vec<TrajectorySample>>,
}

impl Observer<f64> for Recorder<'_> {
    fn observe(&mut self, sys: &GalerkinSystem<f64>, state: &SimState<f64>, info: &StepInfo<f64>) -> Result<()> {
        self.monitor.push(sys, state, info)?;
        if let Some(tr) = self.trajectory.as_deref_mut() {
            tr.push(TrajectorySample {
                t: state.t,
                rho: state.rho.clone(),
                a: state.a.clone(),
            });
        }
        Ok(())
    }
}

/// Integrates `cfg` without touching the file system. Configuration and
/// setup errors are returned; integration errors are stored in the result.
pub fn simulate(cfg: &RunConfig, opts: SimulateOptions) -> Result<Simulation> {
    let sys = build_system(cfg)?.with_lorentz_sign(opts.lorentz_sign);
    let state0 = initial_state(&sys, &cfg.initial, cfg.seed)?;
    let mut monitor = DiagnosticsMonitor::new(MonitorSettings {
        lambda: cfg.monitor.lambda,
        decay_slack: cfg.monitor.decay_slack,
        ..Default::default()
    });
    let mut trajectory = Vec::new();
    let outcome = {
        let mut rec = Recorder {
            monitor: &mut monitor,
            trajectory: opts.keep_trajectory.then_some(&mut trajectory),
        };
        integrate(&sys, &state0, &cfg.time, cfg.output.cadence, &mut [&mut rec])
    };
    let flags = monitor.flags().clone();
    let records = monitor.into_records();
    let (final_state, total_clamps, max_iterations, error) = match outcome {
        Ok(s) => (Some(s.final_state), s.total_clamps, s.max_iterations, None),
        Err(e) => (
            None,
            records.iter().map(|r| r.clamp_count).sum(),
            records.iter().map(|r| r.iterations).max().unwrap_or(0),
            Some(e),
        ),
    };
    Ok(Simulation {
        system: sys,
        records,
        flags,
        trajectory,
        final_state,
        total_clamps,
        max_iterations,
        error,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FlagCounts {
    pub decay_bound: usize,
    pub heat_decrease: usize,
    pub coercivity: usize,
    pub solenoidality: usize,
    pub negative_energy: usize,
    pub messages: Vec<String>,
}

impl From<&InvariantFlags> for FlagCounts {
    fn from(f: &InvariantFlags) -> Self {
        Self {
            decay_bound: f.decay_bound,
            heat_decrease: f.heat_decrease,
            coercivity: f.coercivity,
            solenoidality: f.solenoidality,
            negative_energy: f.negative_energy,
            messages: f.messages.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AprioriSummary {
    pub sup_energy: f64,
    pub sup_energy_time: f64,
    pub strain_r_integral: f64,
    pub curl_h_integral: f64,
    pub sup_rho_theta: f64,
    pub sup_theta_neg: f64,
    pub theta_p_integral: f64,
}

impl From<&AprioriReport<f64>> for AprioriSummary {
    fn from(r: &AprioriReport<f64>) -> Self {
        Self {
            sup_energy: r.sup_energy,
            sup_energy_time: r.sup_energy_time,
            strain_r_integral: r.strain_r_integral,
            curl_h_integral: r.curl_h_integral,
            sup_rho_theta: r.sup_rho_theta,
            sup_theta_neg: r.sup_theta_neg,
            theta_p_integral: r.theta_p_integral,
        }
    }
}

/// Machine-readable run summary (`summary.json`).
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub name: String,
    pub seed: u64,
    pub status: RunStatus,
    pub exit_code: i32,
    pub error: Option<String>,
    pub samples: usize,
    pub t_final: f64,
    pub e_kin: f64,
    pub e_mag: f64,
    pub heat_total: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub max_energy_residual: f64,
    pub max_kinetic_residual: f64,
    pub magnetic_decay_rate: Option<f64>,
    pub total_clamps: usize,
    pub max_iterations: usize,
    pub invariants_passed: bool,
    pub flags: FlagCounts,
    pub apriori: AprioriSummary,
}

impl RunSummary {
    pub fn new(cfg: &RunConfig, sim: &Simulation) -> Self {
        let last = sim.records.last().cloned().unwrap_or_default();
        let max_of = |f: fn(&DiagnosticsRecord<f64>) -> f64| sim.records.iter().map(|r| f(r).abs()).fold(0.0, f64::max);
        let status = sim.status();
        Self {
            schema_version: SUMMARY_SCHEMA_VERSION,
            name: cfg.name.clone(),
            seed: cfg.seed,
            status,
            exit_code: status.exit_code(),
            error: sim.error.as_ref().map(|e| e.to_string()),
            samples: sim.records.len(),
            t_final: last.t,
            e_kin: last.e_kin,
            e_mag: last.e_mag,
            heat_total: last.heat_total,
            rho_min: sim.records.iter().map(|r| r.rho_min).fold(f64::INFINITY, f64::min),
            rho_max: sim.records.iter().map(|r| r.rho_max).fold(f64::NEG_INFINITY, f64::max),
            max_energy_residual: max_of(|r| r.energy_residual),
            max_kinetic_residual: max_of(|r| r.kinetic_residual),
            magnetic_decay_rate: sim.magnetic_decay_rate(),
            total_clamps: sim.total_clamps,
            max_iterations: sim.max_iterations,
            invariants_passed: sim.flags.passed(),
            flags: (&sim.flags).into(),
            apriori: (&apriori_monitor(&sim.records)).into(),
        }
    }
}

pub fn json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Serialization(e.to_string()))
}

/// Contents of the `schema_version` stamp.
pub fn schema_stamp() -> String {
    format!(
        "config {CONFIG_SCHEMA_VERSION}\ndiagnostics {CSV_SCHEMA_VERSION}\nsummary {SUMMARY_SCHEMA_VERSION}\nmode_ordering {MODE_ORDERING_VERSION}\n"
    )
}

fn write_fields(dir: &Path, sim: &Simulation, state: &SimState<f64>) -> Result<()> {
    let sys = &sim.system;
    let b = sys.basis();
    let m = b.grid();
    let fields = [
        ("rho", Field::scalar(m, state.rho.clone())?),
        ("u", Field::vector(m, sys.vector_field(&state.a).0)?),
        ("theta", Field::scalar(m, sys.scalar_field(&state.b).0)?),
        ("h", Field::vector(m, sys.vector_field(&state.c).0)?),
    ];
    for (name, f) in fields {
        write_snapshot(&dir.join(name), b, &f, name, state.t)?;
    }
    Ok(())
}

/// Writes config copy, diagnostics, summary, schema stamp and optional
/// snapshots into `dir`.
pub fn write_run_directory(dir: &Path, cfg: &RunConfig, sim: &Simulation) -> Result<RunSummary> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), to_toml(cfg)?)?;
    fs::write(dir.join("diagnostics.csv"), sim.csv()?)?;
    fs::write(dir.join("schema_version"), schema_stamp())?;
    if cfg.output.snapshots {
        if let Some(st) = &sim.final_state {
            write_fields(dir, sim, st)?;
        }
    }
    let summary = RunSummary::new(cfg, sim);
    fs::write(dir.join("summary.json"), json(&summary)?)?;
    Ok(summary)
}

/// Directory of a run below `root`.
pub fn run_directory(root: &Path, cfg: &RunConfig) -> PathBuf {
    root.join(cfg.output.directory.as_deref().unwrap_or(&cfg.name))
}

#[derive(Debug)]
pub struct RunReport {
    pub directory: PathBuf,
    pub summary: RunSummary,
}

/// Runs `cfg` and writes its directory below `root`. Integration errors
/// do not abort the write; they appear in the summary status.
pub fn run(cfg: &RunConfig, root: &Path) -> Result<RunReport> {
    super::config::validate_config(cfg)?;
    let sim = simulate(cfg, SimulateOptions::default())?;
    let directory = run_directory(root, cfg);
    let summary = write_run_directory(&directory, cfg, &sim)?;
    Ok(RunReport { directory, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{config_from_str, Family};

    fn quick(text: &str) -> RunConfig {
        let mut cfg = config_from_str(text).unwrap();
        cfg.truncation = crate::galerkin::Truncation::uniform(8, 0.0);
        cfg.time.dt = 1e-3;
        cfg.time.t_end = 0.02;
        cfg
    }

    #[test]
    fn zero_data_passes_with_zero_energy() {
        let mut cfg = quick("");
        cfg.initial.velocity = 0.0;
        cfg.initial.magnetic = 0.0;
        let sim = simulate(&cfg, SimulateOptions::default()).unwrap();
        let s = RunSummary::new(&cfg, &sim);
        assert_eq!(s.status, RunStatus::Pass);
        assert_eq!(s.e_kin, 0.0);
        assert_eq!(s.e_mag, 0.0);
        assert_eq!(s.max_energy_residual, 0.0);
    }

    #[test]
    fn decay_rate_matches_diffusivity() {
        let mut cfg = quick("[time]\nfrozen_velocity = true\n");
        cfg.initial.family = Family::SingleModeDecay;
        cfg.time.t_end = 0.1;
        let sim = simulate(&cfg, SimulateOptions::default()).unwrap();
        let rate = sim.magnetic_decay_rate().unwrap();
        // ‖H‖ decays like exp(−ν|k|²t) with |k| = 1
        assert!((rate - cfg.constitutive.nu).abs() < 1e-4, "{rate}");
    }

    #[test]
    fn run_directory_contents() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = quick("name = \"contents\"\n[output]\nsnapshots = true\n");
        cfg.time.t_end = 0.005;
        let rep = run(&cfg, dir.path()).unwrap();
        for f in ["config.toml", "diagnostics.csv", "summary.json", "schema_version", "u.bin", "h.json"] {
            assert!(rep.directory.join(f).exists(), "{f}");
        }
        let copy = crate::harness::config::load_config(&rep.directory.join("config.toml")).unwrap();
        assert_eq!(copy, cfg);
    }

    #[test]
    fn output_root_prefers_explicit_path() {
        assert_eq!(output_root(Some(Path::new("/x"))), PathBuf::from("/x"));
    }
}
