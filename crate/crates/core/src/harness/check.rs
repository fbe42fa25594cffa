//! The property suite behind `mhdg check`. Properties are grouped into
//! suites; each returns an [`Outcome`] and is timed individually.

use std::f64::consts::TAU;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{config_from_str, to_toml, RunConfig};
use super::oracle::{operator_oracle, oracle_params, random_band_limited_state};
use super::run::{simulate, SimulateOptions};
use super::sweep::convergence_study;
use super::{shipped_config, SHIPPED_CONFIGS};
use crate::constitutive::{
    heat_flux, stress_tensor, validate_params, ConductivityForm, ConstitutiveParams, SymTensor3, ViscosityForm,
};
use crate::diagnostics::{apriori_monitor, functional_inequality_check, k_uniformity_flags, vector_identity_check};
use crate::error::Result;
use crate::galerkin::{GalerkinSystem, Truncation};
use crate::integrator::{integrate, Scheme, StepConfig};
use crate::spectral::{build_basis, inner_product, max_divergence, Field};

/// Suite names in run order. `default` runs all but `limits`; `all` runs
/// everything.
pub const SUITES: [&str; 6] = ["constitutive", "spectral", "galerkin", "integrator", "harness", "limits"];

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub seed: u64,
    /// Multiplier of the Lorentz force; `−1` is a deliberate fault.
    pub lorentz_sign: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            lorentz_sign: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

pub struct Property {
    pub suite: &'static str,
    pub name: &'static str,
    pub run: fn(&CheckOptions) -> Result<Outcome>,
}

#[derive(Clone, Debug)]
pub struct PropertyResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub outcome: Outcome,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub results: Vec<PropertyResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.outcome.passed)
    }

    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| !r.outcome.passed).count()
    }
}

pub fn properties() -> Vec<Property> {
    macro_rules! p {
        ($suite:literal, $name:literal, $f:expr) => {
            Property {
                suite: $suite,
                name: $name,
                run: $f,
            }
        };
    }
    vec![
        p!("constitutive", "coercivity", |o| Ok(constitutive_inequalities(10_000, o.seed).outcome(0))),
        p!("constitutive", "growth", |o| Ok(constitutive_inequalities(10_000, o.seed).outcome(1))),
        p!("constitutive", "monotonicity", |o| Ok(constitutive_inequalities(10_000, o.seed).outcome(2))),
        p!("constitutive", "flux-bounds", |o| Ok(constitutive_inequalities(10_000, o.seed).outcome(3))),
        p!("spectral", "orthonormality", |_| orthonormality()),
        p!("spectral", "vector-identities", vector_identities),
        p!("spectral", "functional-inequalities", functional_inequalities),
        p!("galerkin", "operator-oracle", operator_oracles),
        p!("galerkin", "energy-identity", energy_identity),
        p!("galerkin", "mass-conservation", mass_conservation),
        p!("integrator", "magnetic-decay", |_| magnetic_decay()),
        p!("integrator", "density-maximum-principle", |_| density_maximum_principle()),
        p!("integrator", "energy-residual-order", energy_residual_order),
        p!("harness", "config-round-trip", |_| config_round_trip()),
        p!("harness", "determinism", |_| determinism()),
        p!("harness", "decay-bound", |_| decay_bound()),
        p!("harness", "apriori-k-uniformity", |_| apriori_uniformity()),
        p!("limits", "k-sweep", |_| limit_study(true)),
        p!("limits", "eps-sweep", |_| limit_study(false)),
    ]
}

/// Resolves a selector: `default`, `all`, a suite, or `suite/property`.
pub fn select(selector: &str) -> Option<Vec<Property>> {
    let all = properties();
    let picked: Vec<Property> = match selector {
        "default" => all.into_iter().filter(|p| p.suite != "limits").collect(),
        "all" => all,
        s => match s.split_once('/') {
            Some((suite, name)) => all.into_iter().filter(|p| p.suite == suite && p.name == name).collect(),
            None => all.into_iter().filter(|p| p.suite == s).collect(),
        },
    };
    (!picked.is_empty()).then_some(picked)
}

/// Runs `props` in order; `progress` sees each result as it completes. A
/// property that errors counts as failed.
pub fn run_checks(
    props: &[Property],
    opts: &CheckOptions,
    mut progress: impl FnMut(&PropertyResult),
) -> CheckReport {
    let mut report = CheckReport::default();
    for p in props {
        let start = Instant::now();
        let outcome = (p.run)(opts).unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let r = PropertyResult {
            suite: p.suite,
            name: p.name,
            outcome,
            seconds: start.elapsed().as_secs_f64(),
        };
        progress(&r);
        report.results.push(r);
    }
    report
}

// ---- constitutive ----

/// Violation counts of the four pointwise inequalities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InequalityCounts {
    pub samples: usize,
    /// coercivity, growth, monotonicity, flux bounds
    pub violations: [usize; 4],
    /// Worst amount by which each inequality was missed (negative = slack).
    pub worst: [f64; 4],
}

impl InequalityCounts {
    fn outcome(&self, which: usize) -> Outcome {
        Outcome::new(
            self.violations[which] == 0,
            format!(
                "{} violations in {} samples, worst margin {:.3e}",
                self.violations[which], self.samples, self.worst[which]
            ),
        )
    }

    pub fn passed(&self) -> bool {
        self.violations.iter().all(|&v| v == 0)
    }
}

/// Absolute slack of the pointwise inequality checks.
pub const INEQUALITY_SLACK: f64 = 1e-12;

fn random_params(rng: &mut ChaCha8Rng) -> ConstitutiveParams<f64> {
    let mu_low = rng.gen_range(0.1..1.0);
    let kappa_low = rng.gen_range(0.05..1.0);
    let p = ConstitutiveParams {
        r: rng.gen_range(2.01..4.0),
        alpha: rng.gen_range(-0.66..2.0),
        eps_const: rng.gen_range(0.0..1.0),
        mu_low,
        mu_high: mu_low + rng.gen_range(0.0..1.0),
        kappa_low,
        kappa_high: kappa_low + rng.gen_range(0.0..1.0),
        mu_form: [
            ViscosityForm::Constant,
            ViscosityForm::DensityLinear,
            ViscosityForm::ThermalSaturating,
        ][rng.gen_range(0..3)],
        kappa_form: [ConductivityForm::Constant, ConductivityForm::DensityLinear][rng.gen_range(0..2)],
        ..Default::default()
    };
    debug_assert!(validate_params(&p).passed());
    p
}

fn random_sym(rng: &mut ChaCha8Rng) -> SymTensor3<f64> {
    SymTensor3(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
}

/// Samples random admissible parameters, states and tensors and counts
/// violations of coercivity, growth, monotonicity and the flux bounds.
pub fn constitutive_inequalities(samples: usize, seed: u64) -> InequalityCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = InequalityCounts {
        samples,
        worst: [f64::NEG_INFINITY; 4],
        ..Default::default()
    };
    let mut record = |which: usize, miss: f64| {
        out.worst[which] = out.worst[which].max(miss);
        if miss > INEQUALITY_SLACK || miss.is_nan() {
            out.violations[which] += 1;
        }
    };
    for _ in 0..samples {
        let p = random_params(&mut rng);
        let rho = rng.gen_range(p.rho_low..=p.rho_high);
        let theta = rng.gen_range(p.theta_low..5.0);
        let d = random_sym(&mut rng);
        // half the pairs are close together, where monotonicity is tight
        let b = if rng.gen_bool(0.5) {
            random_sym(&mut rng)
        } else {
            let e = random_sym(&mut rng);
            SymTensor3(std::array::from_fn(|i| d.0[i] + 1e-3 * e.0[i]))
        };
        let (Ok(s), Ok(sb)) = (stress_tensor(&p, rho, theta, &d), stress_tensor(&p, rho, theta, &b)) else {
            (0..3).for_each(|w| record(w, f64::NAN));
            continue;
        };
        let n2 = d.norm_sqr();
        let pw = (p.eps_const + n2).powf(0.5 * (p.r - 2.0));
        record(0, p.mu_low * pw * n2 - s.ddot(&d));
        record(1, s.norm_sqr().sqrt() - p.mu_high * pw * n2.sqrt());
        record(2, -s.sub(&sb).ddot(&d.sub(&b)));

        let g: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        match heat_flux(&p, rho, theta, &g) {
            Ok(q) => {
                let g2 = g.iter().map(|x| x * x).sum::<f64>();
                let ta = theta.powf(p.alpha);
                let qg = q.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
                let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
                record(3, (p.kappa_low * ta * g2 - qg).max(qn - p.kappa_high * ta * g2.sqrt()));
            }
            Err(_) => record(3, f64::NAN),
        }
    }
    out
}

// ---- spectral ----

fn orthonormality() -> Result<Outcome> {
    let basis = build_basis(TAU, 8, 64, 33)?;
    let m = basis.grid();
    let fields: Vec<Field<f64>> = (0..basis.vector_modes().len())
        .map(|i| {
            let mut e = vec![0.0; i + 1];
            e[i] = 1.0;
            Field::vector(m, basis.vector_spectrum(&e).map(|s| basis.synthesize(&s)))
        })
        .collect::<Result<_>>()?;
    let mut gram = 0.0f64;
    let mut div = 0.0f64;
    for (i, f) in fields.iter().enumerate() {
        div = div.max(max_divergence(&basis, f)?);
        for (j, g) in fields.iter().enumerate().take(i + 1) {
            let want = if i == j { 1.0 } else { 0.0 };
            gram = gram.max((inner_product(&basis, f, g)? - want).abs());
        }
    }
    Ok(Outcome::new(
        gram < 1e-12 && div < 1e-12,
        format!("64 vector modes: Gram defect {gram:.2e}, max |div| {div:.2e}"),
    ))
}

fn vector_identities(o: &CheckOptions) -> Result<Outcome> {
    let sys = GalerkinSystem::new(oracle_params(), TAU, 8, Truncation::uniform(32, 0.0))?;
    let mut worst = 0.0f64;
    for seed in 0..3 {
        let st = random_band_limited_state(&sys, o.seed + seed, 0.5);
        worst = worst.max(vector_identity_check(sys.basis(), &st.a, &st.c, 0.7)?.max());
    }
    Ok(Outcome::new(worst < 1e-10, format!("max pointwise defect {worst:.2e} over 3 random fields")))
}

fn functional_inequalities(o: &CheckOptions) -> Result<Outcome> {
    let basis = build_basis(TAU, 8, 64, 1)?;
    let r = functional_inequality_check(&basis, 64, 100, o.seed)?;
    let poincare = (r.poincare_lowest - r.poincare_constant).abs();
    Ok(Outcome::new(
        poincare < 1e-12 && r.korn_max <= 1.0 + 1e-10 && r.poincare_max <= r.poincare_constant * (1.0 + 1e-12),
        format!(
            "Poincaré lowest-mode defect {poincare:.2e}, max Korn ratio {:.12} over {} fields",
            r.korn_max, r.fields
        ),
    ))
}

// ---- galerkin ----

fn operator_oracles(o: &CheckOptions) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut entries = 0;
    for (i, eps) in [0.0, 2e-3].into_iter().enumerate() {
        let sys = GalerkinSystem::new(oracle_params(), TAU, 8, Truncation::uniform(16, eps))?
            .with_lorentz_sign(o.lorentz_sign);
        for seed in 0..2 {
            let st = random_band_limited_state(&sys, o.seed + 10 * i as u64 + seed, 0.4);
            let r = operator_oracle(&sys, &st)?;
            worst = worst.max(r.max());
            entries += r.entries;
        }
    }
    Ok(Outcome::new(worst < 1e-10, format!("{entries} entries, max deviation {worst:.2e}")))
}

/// `(power, dissipation)` with `power = aᵀF_u + ½(ρ_t, |u|²) + cᵀċ`; the
/// energy identity says `power = −dissipation`.
pub fn energy_power(sys: &GalerkinSystem<f64>, st: &crate::galerkin::SimState<f64>) -> Result<(f64, f64)> {
    let ev = sys.evaluate(st)?;
    let rho_t = sys.density_rhs(&ev);
    let f = sys.momentum_rhs(&ev);
    let cdot = sys.induction_rhs(&ev, &st.c);
    let n = ev.rho.len();
    let sq = |v: &[Vec<f64>; 3]| -> Vec<f64> { (0..n).map(|g| (0..3).map(|c| v[c][g] * v[c][g]).sum()).collect() };
    let power = st.a.iter().zip(&f).map(|(a, f)| a * f).sum::<f64>()
        + 0.5 * sys.grid_dot(&rho_t, &sq(&ev.u))
        + st.c.iter().zip(&cdot).map(|(c, d)| c * d).sum::<f64>();
    let diss = sys.grid_sum(&ev.dissipation) + sys.params().nu * sys.grid_sum(&sq(&ev.j));
    Ok((power, diss))
}

fn energy_identity(o: &CheckOptions) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for eps in [0.0, 1e-2] {
        let sys = GalerkinSystem::new(oracle_params(), TAU, 8, Truncation::uniform(24, eps))?
            .with_lorentz_sign(o.lorentz_sign);
        for seed in 0..3 {
            let st = random_band_limited_state(&sys, o.seed + seed, 0.5);
            let (power, diss) = energy_power(&sys, &st)?;
            worst = worst.max((power + diss).abs() / diss);
        }
    }
    Ok(Outcome::new(worst < 1e-10, format!("max relative defect {worst:.2e}")))
}

fn mass_conservation(o: &CheckOptions) -> Result<Outcome> {
    let sys = GalerkinSystem::new(oracle_params(), TAU, 8, Truncation::uniform(16, 5e-3))?;
    let mut worst = 0.0f64;
    for seed in 0..4 {
        let st = random_band_limited_state(&sys, o.seed + seed, 0.5);
        let ev = sys.evaluate(&st)?;
        worst = worst.max(sys.grid_sum(&sys.density_rhs(&ev)).abs());
    }
    Ok(Outcome::new(worst < 1e-12, format!("max |d/dt ∫ρ| = {worst:.2e}")))
}

// ---- integrator ----

fn magnetic_decay() -> Result<Outcome> {
    let sys = GalerkinSystem::new(oracle_params(), TAU, 8, Truncation::uniform(12, 0.0))?;
    let mut st = sys.zero_state(1.0);
    st.b[0] = sys.basis().volume().sqrt();
    st.c[5] = 0.4;
    let cfg = StepConfig {
        dt: 1e-3,
        t_end: 0.1,
        scheme: Scheme::ImplicitMidpoint,
        frozen_velocity: true,
        ..Default::default()
    };
    let out = integrate(&sys, &st, &cfg, 100, &mut [])?;
    let k2 = sys.basis().vector_modes()[5].wavenumber_sqr();
    let exact = 0.4 * (-sys.params().nu * k2 * 0.1).exp();
    let got = out.final_state.c.iter().map(|x| x * x).sum::<f64>().sqrt();
    let rel = (got - exact).abs() / exact;
    Ok(Outcome::new(rel < 1e-6, format!("relative error of ‖H(0.1)‖ = {rel:.2e}")))
}

/// Drift of the density extrema beyond their initial values, per unit
/// time, over the shipped layered testcase (500 steps).
pub fn density_drift() -> Result<(f64, usize)> {
    let cfg = shipped_config("layered-density")?;
    let sim = simulate(&cfg, SimulateOptions::default())?;
    if let Some(e) = sim.error {
        return Err(e);
    }
    let r0 = &sim.records[0];
    let t = sim.records.last().map_or(0.0, |r| r.t);
    let drift = sim
        .records
        .iter()
        .map(|r| (r.rho_max - r0.rho_max).max(r0.rho_min - r.rho_min).max(0.0))
        .fold(0.0, f64::max);
    Ok((drift / t, cfg.time.steps()?))
}

fn density_maximum_principle() -> Result<Outcome> {
    let (drift, steps) = density_drift()?;
    Ok(Outcome::new(
        drift < 1e-10 && steps >= 500,
        format!("{steps} steps, extrema drift {drift:.2e} per unit time"),
    ))
}

/// Largest energy residual of the single-mode MHD testcase at `dt`.
pub fn energy_residual_at(eps: f64, dt: f64, lorentz_sign: f64) -> Result<f64> {
    let mut cfg = shipped_config("single-mode-mhd")?;
    cfg.truncation.eps_density = eps;
    cfg.time.dt = dt;
    cfg.time.t_end = 0.1;
    cfg.output.cadence = 1;
    let sim = simulate(
        &cfg,
        SimulateOptions {
            lorentz_sign,
            ..Default::default()
        },
    )?;
    if let Some(e) = sim.error {
        return Err(e);
    }
    Ok(sim.records.iter().map(|r| r.energy_residual.abs()).fold(0.0, f64::max))
}

fn energy_residual_order(o: &CheckOptions) -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.0, 1e-3] {
        let coarse = energy_residual_at(eps, 2e-4, o.lorentz_sign)?;
        let fine = energy_residual_at(eps, 1e-4, o.lorentz_sign)?;
        let ratio = coarse / fine;
        ok &= fine < 1e-6 && (3.5..=4.5).contains(&ratio);
        parts.push(format!("eps {eps:e}: max residual {fine:.2e} at dt 1e-4, ratio {ratio:.3}"));
    }
    Ok(Outcome::new(ok, parts.join("; ")))
}

// ---- harness ----

fn config_round_trip() -> Result<Outcome> {
    let mut bad = Vec::new();
    for (stem, text) in SHIPPED_CONFIGS {
        let cfg = config_from_str(text)?;
        if config_from_str(&to_toml(&cfg)?)? != cfg {
            bad.push(stem);
        }
    }
    Ok(Outcome::new(
        bad.is_empty(),
        format!("{} shipped configs, mismatches: {bad:?}", SHIPPED_CONFIGS.len()),
    ))
}

/// CSV text of two independent runs of the random testcase.
pub fn determinism_pair() -> Result<(String, String)> {
    let mut cfg = shipped_config("random-band-limited")?;
    cfg.time.t_end = 0.02;
    cfg.output.cadence = 1;
    let one = simulate(&cfg, SimulateOptions::default())?.csv()?;
    let two = simulate(&cfg, SimulateOptions::default())?.csv()?;
    Ok((one, two))
}

fn determinism() -> Result<Outcome> {
    let (a, b) = determinism_pair()?;
    Ok(Outcome::new(
        a == b,
        format!("{} bytes, identical: {}", a.len(), a == b),
    ))
}

/// `(testcase, samples, violations)` of the magnetic decay estimate for
/// every shipped testcase.
pub fn decay_bound_counts() -> Result<Vec<(&'static str, usize, usize)>> {
    SHIPPED_CONFIGS
        .iter()
        .map(|(stem, text)| {
            let cfg: RunConfig = config_from_str(text)?;
            let sim = simulate(&cfg, SimulateOptions::default())?;
            if let Some(e) = sim.error {
                return Err(e);
            }
            let ok = sim
                .records
                .iter()
                .filter(|r| r.h_norm_sqr > (1.0 + cfg.monitor.decay_slack) * r.decay_bound)
                .count();
            Ok((*stem, sim.records.len(), ok))
        })
        .collect()
}

fn decay_bound() -> Result<Outcome> {
    let counts = decay_bound_counts()?;
    let samples: usize = counts.iter().map(|c| c.1).sum();
    let bad: usize = counts.iter().map(|c| c.2).sum();
    Ok(Outcome::new(
        bad == 0,
        format!("{bad} violations in {samples} samples over {} testcases", counts.len()),
    ))
}

fn apriori_uniformity() -> Result<Outcome> {
    let cfg = shipped_config("layered-density")?;
    let mut reports = Vec::new();
    for k in [8, 16, 32] {
        let mut c = cfg.clone();
        c.truncation = Truncation::uniform(k, cfg.truncation.eps_density);
        c.time.t_end = 0.1;
        let sim = simulate(&c, SimulateOptions::default())?;
        if let Some(e) = sim.error {
            return Err(e);
        }
        reports.push((k, apriori_monitor(&sim.records)));
    }
    let flags = k_uniformity_flags(&reports);
    Ok(Outcome::new(flags.is_empty(), format!("k = 8, 16, 32; flags: {flags:?}")))
}

// ---- limits ----

fn limit_study(k_sweep: bool) -> Result<Outcome> {
    let mut cfg = shipped_config("single-mode-mhd")?;
    if k_sweep {
        cfg.sweep.eps_values.clear();
    } else {
        cfg.sweep.k_values.clear();
    }
    let rep = convergence_study(&cfg, None)?;
    let s = if k_sweep { rep.k_sweep } else { rep.eps_sweep }.expect("sweep configured");
    let diffs: Vec<String> = s
        .differences
        .iter()
        .map(|d| match d.velocity {
            Some(v) => format!("({}, {}): u {v:.3e}, rho {:.3e}", d.coarse, d.fine, d.density),
            None => format!("({:e}, {:e}): rho {:.3e}", d.coarse, d.fine, d.density),
        })
        .collect();
    Ok(Outcome::new(s.complete && s.monotone, diffs.join("; ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        assert_eq!(select("constitutive").unwrap().len(), 4);
        assert!(select("default").unwrap().iter().all(|p| p.suite != "limits"));
        assert_eq!(select("galerkin/energy-identity").unwrap().len(), 1);
        assert!(select("nope").is_none());
    }

    #[test]
    fn constitutive_suite_passes() {
        let c = constitutive_inequalities(2000, 9);
        assert!(c.passed(), "{c:?}");
    }

    #[test]
    fn lorentz_fault_breaks_energy_identity() {
        let good = energy_identity(&CheckOptions::default()).unwrap();
        assert!(good.passed, "{}", good.detail);
        let bad = energy_identity(&CheckOptions {
            lorentz_sign: -1.0,
            ..Default::default()
        })
        .unwrap();
        assert!(!bad.passed, "{}", bad.detail);
    }
}
