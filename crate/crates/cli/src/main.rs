use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mhd_galerkin::harness::{self, CheckOptions, RunConfig, RunStatus};
use mhd_galerkin::Error;

const CONFIG_ERROR: u8 = 2;
const INVARIANT_FAILURE: u8 = 1;
const NUMERICAL_ABORT: u8 = 3;

#[derive(Parser)]
#[command(name = "mhdg", version, about = "Spectral Galerkin MHD simulator and verification suite")]
struct Cli {
    /// Root directory for run outputs.
    #[arg(long, global = true, env = harness::OUTPUT_ROOT_ENV)]
    output_dir: Option<PathBuf>,
    /// Override the seed of the configuration (or of the check suite).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write its run directory.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the k and eps limit studies listed in the config's sweep block.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the property suite.
    Check {
        /// `default`, `all`, a suite name, or `suite/property`.
        #[arg(long, default_value = "default")]
        suite: String,
        /// Flip the sign of the Lorentz force, to confirm the suite notices.
        #[arg(long)]
        inject_lorentz_flip: bool,
    },
}

fn error_code(e: &Error) -> u8 {
    if e.is_invariant() {
        INVARIANT_FAILURE
    } else if e.is_numerical() {
        NUMERICAL_ABORT
    } else {
        match e.root() {
            Error::ConfigParse { .. } | Error::ConfigInvalid(_) | Error::InvalidParams(_) | Error::InvalidStep(_) => {
                CONFIG_ERROR
            }
            Error::Io(_) | Error::Serialization(_) => NUMERICAL_ABORT,
            _ => CONFIG_ERROR,
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<RunConfig, ExitCode> {
    let mut cfg = harness::load_config(path).map_err(|e| {
        eprintln!("mhdg: {}: {e}", path.display());
        ExitCode::from(CONFIG_ERROR)
    })?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cli: &Cli, config: &Path) -> Result<ExitCode, ExitCode> {
    let cfg = load(config, cli.seed)?;
    let root = harness::output_root(cli.output_dir.as_deref());
    let report = harness::run(&cfg, &root).map_err(|e| {
        eprintln!("mhdg: {e}");
        ExitCode::from(error_code(&e))
    })?;
    let s = &report.summary;
    if let Some(e) = &s.error {
        eprintln!("mhdg: {e}");
    }
    for m in &s.flags.messages {
        eprintln!("mhdg: invariant: {m}");
    }
    if !cli.quiet {
        println!(
            "{}: {:?} after {} samples, t = {}, E_kin = {:.6e}, E_mag = {:.6e}, max energy residual {:.3e}",
            s.name, s.status, s.samples, s.t_final, s.e_kin, s.e_mag, s.max_energy_residual
        );
        println!("wrote {}", report.directory.display());
    }
    Ok(ExitCode::from(s.exit_code as u8))
}

fn sweep(cli: &Cli, config: &Path) -> Result<ExitCode, ExitCode> {
    let cfg = load(config, cli.seed)?;
    let root = harness::output_root(cli.output_dir.as_deref());
    let rep = harness::convergence_study(&cfg, Some(&root)).map_err(|e| {
        eprintln!("mhdg: {e}");
        ExitCode::from(error_code(&e))
    })?;
    let mut aborted = false;
    for s in [&rep.k_sweep, &rep.eps_sweep].into_iter().flatten() {
        for c in &s.cells {
            if c.status == RunStatus::NumericalAbort {
                aborted = true;
                eprintln!("mhdg: cell {} aborted: {}", c.label, c.error.as_deref().unwrap_or("unknown"));
            }
        }
        if !cli.quiet {
            println!("{} sweep: monotone = {}, complete = {}", s.parameter, s.monotone, s.complete);
            for d in &s.differences {
                match d.velocity {
                    Some(v) => println!("  {} -> {}: u {v:.6e}, rho {:.6e}", d.coarse, d.fine, d.density),
                    None => println!("  {} -> {}: rho {:.6e}", d.coarse, d.fine, d.density),
                }
            }
            for f in &s.uniformity_flags {
                println!("  note: {f}");
            }
        }
    }
    if !cli.quiet {
        println!("wrote {}", harness::run_directory(&root, &cfg).join("study.json").display());
    }
    Ok(if aborted {
        ExitCode::from(NUMERICAL_ABORT)
    } else if rep.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(INVARIANT_FAILURE)
    })
}

fn check(cli: &Cli, suite: &str, flip: bool) -> Result<ExitCode, ExitCode> {
    let Some(props) = harness::check::select(suite) else {
        eprintln!(
            "mhdg: unknown suite {suite:?}; expected default, all, one of {:?}, or suite/property",
            harness::SUITES
        );
        return Err(ExitCode::from(CONFIG_ERROR));
    };
    let opts = CheckOptions {
        seed: cli.seed.unwrap_or(0),
        lorentz_sign: if flip { -1.0 } else { 1.0 },
    };
    let quiet = cli.quiet;
    let report = harness::run_checks(&props, &opts, |r| {
        if !quiet || !r.outcome.passed {
            println!(
                "{} {}/{} ({:.2} s): {}",
                if r.outcome.passed { "PASS" } else { "FAIL" },
                r.suite,
                r.name,
                r.seconds,
                r.outcome.detail
            );
        }
    });
    if !quiet {
        let total: f64 = report.results.iter().map(|r| r.seconds).sum();
        println!(
            "{} of {} properties passed in {total:.1} s",
            report.results.len() - report.failures(),
            report.results.len()
        );
    }
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(INVARIANT_FAILURE)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Run { config } => run(&cli, config),
        Command::Sweep { config } => sweep(&cli, config),
        Command::Check {
            suite,
            inject_lorentz_flip,
        } => check(&cli, suite, *inject_lorentz_flip),
    };
    out.unwrap_or_else(|code| code)
}
