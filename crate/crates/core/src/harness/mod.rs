//! Configuration, run orchestration, limit studies, the property suite
//! and the dense reference oracle. Everything here works in `f64`.

pub mod check;
pub mod config;
pub mod initial;
pub mod oracle;
pub mod run;
pub mod sweep;

pub use check::{properties, run_checks, select, CheckOptions, CheckReport, Outcome, Property, PropertyResult, SUITES};
pub use config::{
    config_from_str, config_violations, load_config, parse_config, to_toml, validate_config, validate_sweep,
    DomainConfig, Family, InitialConfig, MonitorConfig, OutputConfig, RunConfig, SweepConfig,
    CONFIG_SCHEMA_VERSION,
};
pub use initial::initial_state;
pub use oracle::{operator_oracle, oracle_params, random_band_limited_state, OracleReport, ORACLE_GRID};
pub use run::{
    build_system, output_root, run, run_directory, simulate, write_run_directory, RunReport, RunStatus, RunSummary,
    SimulateOptions, Simulation, TrajectorySample, OUTPUT_ROOT_ENV,
};
pub use sweep::{convergence_study, density_distance, velocity_distance, Difference, StudyReport, SweepReport};

/// Testcases shipped under `configs/`, as `(file stem, contents)`.
pub const SHIPPED_CONFIGS: [(&str, &str); 5] = [
    ("single-mode-decay", include_str!("../../../../configs/single-mode-decay.toml")),
    ("single-mode-mhd", include_str!("../../../../configs/single-mode-mhd.toml")),
    ("orszag-tang", include_str!("../../../../configs/orszag-tang.toml")),
    ("layered-density", include_str!("../../../../configs/layered-density.toml")),
    ("random-band-limited", include_str!("../../../../configs/random-band-limited.toml")),
];

/// Parsed and validated shipped testcase.
pub fn shipped_config(stem: &str) -> crate::error::Result<RunConfig> {
    let (_, text) = SHIPPED_CONFIGS
        .iter()
        .find(|(s, _)| *s == stem)
        .ok_or_else(|| crate::error::Error::Precondition(format!("no shipped testcase named {stem}")))?;
    config_from_str(text)
}
