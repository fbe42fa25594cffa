//! The `k → ∞` and `ε → 0` limit studies. Each sweep cell is an ordinary
//! trajectory; cells run on separate threads and the report is assembled
//! afterwards in sweep order.

use std::path::Path;
use std::thread;

use serde::Serialize;

use super::config::{validate_config, validate_sweep, RunConfig};
use super::run::{json, simulate, write_run_directory, RunStatus, SimulateOptions, Simulation, TrajectorySample};
use crate::diagnostics::{apriori_monitor, k_uniformity_flags};
use crate::error::Result;
use crate::galerkin::{GalerkinSystem, Truncation};

#[derive(Clone, Debug, Serialize)]
pub struct CellReport {
    pub label: String,
    pub value: f64,
    pub status: RunStatus,
    pub error: Option<String>,
}

/// Difference between two consecutive sweep cells.
#[derive(Clone, Debug, Serialize)]
pub struct Difference {
    pub coarse: f64,
    pub fine: f64,
    /// `‖u − u'‖` in discrete `L²(0,T; W^{1,2})`; absent for the ε-sweep.
    pub velocity: Option<f64>,
    /// `‖ρ − ρ'‖` in `C([0,T]; L²)`.
    pub density: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub parameter: String,
    pub cells: Vec<CellReport>,
    pub differences: Vec<Difference>,
    /// Every listed norm decreases strictly from one pair to the next.
    pub monotone: bool,
    /// `ln(d_i / d_{i+1}) / |ln(h_i / h_{i+1})|` with `h` the swept value
    /// of the coarser cell of each pair; positive when differences shrink.
    pub density_rates: Vec<f64>,
    pub velocity_rates: Vec<f64>,
    /// Monitors that failed the k-uniformity test.
    pub uniformity_flags: Vec<String>,
    /// All cells completed and every difference could be formed.
    pub complete: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyReport {
    pub name: String,
    pub k_sweep: Option<SweepReport>,
    pub eps_sweep: Option<SweepReport>,
}

impl StudyReport {
    pub fn passed(&self) -> bool {
        [&self.k_sweep, &self.eps_sweep]
            .into_iter()
            .flatten()
            .all(|s| s.complete && s.monotone)
    }
}

/// Discrete `L²(0,T; W^{1,2})` distance of two velocity trajectories on
/// the shared samples. Coefficients are compared mode by mode, the shorter
/// vector padded with zeros, weighted by `1 + |k|²`.
pub fn velocity_distance(sys: &GalerkinSystem<f64>, x: &[TrajectorySample], y: &[TrajectorySample]) -> f64 {
    let modes = sys.basis().vector_modes();
    let sq: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .map(|(p, q)| {
            let n = p.a.len().max(q.a.len());
            let s = (0..n)
                .map(|i| {
                    let d = p.a.get(i).copied().unwrap_or(0.0) - q.a.get(i).copied().unwrap_or(0.0);
                    (1.0 + modes[i].wavenumber_sqr()) * d * d
                })
                .sum();
            (p.t, s)
        })
        .collect();
    sq.windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum::<f64>()
        .sqrt()
}

/// `max_t ‖ρ − ρ'‖_{L²}` over the shared samples.
pub fn density_distance(sys: &GalerkinSystem<f64>, x: &[TrajectorySample], y: &[TrajectorySample]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(p, q)| {
            let d: Vec<f64> = p.rho.iter().zip(&q.rho).map(|(a, b)| a - b).collect();
            sys.grid_dot(&d, &d).sqrt()
        })
        .fold(0.0, f64::max)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn rates(d: &[f64], h: &[f64]) -> Vec<f64> {
    d.windows(2)
        .zip(h.windows(2))
        .map(|(d, h)| (d[0] / d[1]).ln() / (h[0] / h[1]).ln().abs())
        .collect()
}

fn run_cells(cells: Vec<RunConfig>) -> Vec<Result<Simulation>> {
    let opts = SimulateOptions {
        keep_trajectory: true,
        ..Default::default()
    };
    thread::scope(|s| {
        let handles: Vec<_> = cells.iter().map(|c| s.spawn(move || simulate(c, opts))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep cell panicked")).collect()
    })
}

struct Cell {
    label: String,
    value: f64,
    cfg: RunConfig,
    sim: Option<Simulation>,
    report: CellReport,
}

fn execute(labelled: Vec<(String, f64, RunConfig)>) -> Vec<Cell> {
    let sims = run_cells(labelled.iter().map(|c| c.2.clone()).collect());
    labelled
        .into_iter()
        .zip(sims)
        .map(|((label, value, cfg), sim)| {
            let (status, error, sim) = match sim {
                Ok(s) => (s.status(), s.error.as_ref().map(|e| e.to_string()), Some(s)),
                Err(e) => (RunStatus::NumericalAbort, Some(e.to_string()), None),
            };
            Cell {
                report: CellReport {
                    label: label.clone(),
                    value,
                    status,
                    error,
                },
                label,
                value,
                cfg,
                sim,
            }
        })
        .collect()
}

fn assemble(parameter: &str, cells: &[Cell], with_velocity: bool) -> SweepReport {
    let mut differences = Vec::new();
    let mut complete = cells.iter().all(|c| c.sim.as_ref().is_some_and(|s| s.error.is_none()));
    for w in cells.windows(2) {
        let (Some(x), Some(y)) = (&w[0].sim, &w[1].sim) else {
            complete = false;
            continue;
        };
        if x.trajectory.len() != y.trajectory.len() {
            complete = false;
            continue;
        }
        // the finer system has the longer mode list
        let sys = if x.system.truncation().k_u >= y.system.truncation().k_u {
            &x.system
        } else {
            &y.system
        };
        differences.push(Difference {
            coarse: w[0].value,
            fine: w[1].value,
            velocity: with_velocity.then(|| velocity_distance(sys, &x.trajectory, &y.trajectory)),
            density: density_distance(sys, &x.trajectory, &y.trajectory),
        });
    }
    let dens: Vec<f64> = differences.iter().map(|d| d.density).collect();
    let vel: Vec<f64> = differences.iter().filter_map(|d| d.velocity).collect();
    let spacing: Vec<f64> = differences.iter().map(|d| d.coarse).collect();
    let monotone = !dens.is_empty() && strictly_decreasing(&dens) && strictly_decreasing(&vel);
    SweepReport {
        parameter: parameter.into(),
        cells: cells.iter().map(|c| c.report.clone()).collect(),
        monotone,
        density_rates: rates(&dens, &spacing),
        velocity_rates: rates(&vel, &spacing),
        differences,
        uniformity_flags: Vec::new(),
        complete,
    }
}

/// Runs the sweeps listed in `cfg.sweep`. With `root`, every cell writes
/// its own run directory and the study is saved as `study.json` next to
/// them.
pub fn convergence_study(cfg: &RunConfig, root: Option<&Path>) -> Result<StudyReport> {
    validate_config(cfg)?;
    validate_sweep(&cfg.sweep)?;
    let mut report = StudyReport {
        name: cfg.name.clone(),
        k_sweep: None,
        eps_sweep: None,
    };
    let mut all_cells = Vec::new();
    if !cfg.sweep.k_values.is_empty() {
        let mut ks = cfg.sweep.k_values.clone();
        ks.sort_unstable();
        ks.dedup();
        let cells: Vec<_> = ks
            .iter()
            .map(|&k| {
                let mut c = cfg.clone();
                c.truncation = Truncation::uniform(k, cfg.truncation.eps_density);
                (format!("k{k}"), k as f64, c)
            })
            .collect();
        for (_, _, c) in &cells {
            validate_config(c)?;
        }
        let cells = execute(cells);
        let mut sweep = assemble("k", &cells, true);
        let apriori: Vec<_> = cells
            .iter()
            .filter_map(|c| c.sim.as_ref().map(|s| (c.value as usize, apriori_monitor(&s.records))))
            .collect();
        sweep.uniformity_flags = k_uniformity_flags(&apriori);
        report.k_sweep = Some(sweep);
        all_cells.extend(cells);
    }
    if !cfg.sweep.eps_values.is_empty() {
        let mut es = cfg.sweep.eps_values.clone();
        es.sort_by(|a, b| b.total_cmp(a));
        es.dedup();
        let cells: Vec<_> = es
            .iter()
            .map(|&e| {
                let mut c = cfg.clone();
                c.truncation.eps_density = e;
                (format!("eps{e:e}"), e, c)
            })
            .collect();
        let cells = execute(cells);
        report.eps_sweep = Some(assemble("eps_density", &cells, false));
        all_cells.extend(cells);
    }
    if let Some(root) = root {
        let dir = super::run::run_directory(root, cfg);
        for c in &all_cells {
            if let Some(sim) = &c.sim {
                write_run_directory(&dir.join(&c.label), &c.cfg, sim)?;
            }
        }
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("study.json"), json(&report)?)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::harness::config::{Family, SweepConfig};

    #[test]
    fn two_value_sweep_rejected() {
        let mut cfg = RunConfig::default();
        cfg.sweep = SweepConfig {
            k_values: vec![8, 16],
            eps_values: vec![],
        };
        match convergence_study(&cfg, None) {
            Err(Error::ConfigInvalid(v)) => assert!(v[0].contains("need >= 3 values")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pure_diffusion_has_zero_k_differences() {
        // u = 0 and H in the first mode: the density is constant, the
        // velocity stays zero and H decays inside the shared mode
        let mut cfg = RunConfig::default();
        cfg.initial.family = Family::SingleModeDecay;
        cfg.time.t_end = 0.01;
        cfg.sweep.k_values = vec![8, 16, 32];
        let rep = convergence_study(&cfg, None).unwrap();
        let k = rep.k_sweep.unwrap();
        assert!(k.complete);
        for d in &k.differences {
            assert!(d.velocity.unwrap() < 1e-14 && d.density < 1e-14, "{d:?}");
        }
    }

    #[test]
    fn distances_vanish_for_identical_trajectories() {
        let cfg = RunConfig::default();
        let sys = super::super::run::build_system(&cfg).unwrap();
        let s = vec![
            TrajectorySample {
                t: 0.0,
                rho: vec![1.0; sys.basis().points()],
                a: vec![0.5; 4],
            };
            3
        ];
        assert_eq!(velocity_distance(&sys, &s, &s), 0.0);
        assert_eq!(density_distance(&sys, &s, &s), 0.0);
    }
}
