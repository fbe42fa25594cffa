//! Time stepping for the coupled density/coefficient system.
//!
//! The default scheme is the implicit midpoint rule applied to the whole
//! system, `Mass(ȳ)(y − yₙ) = dt F(ȳ)` with `ȳ = (y + yₙ)/2`, solved by a
//! fixed-point iteration preconditioned with the stiff diagonal parts
//! `Mass(ȳ) + (dt/2) L`. Density and velocity therefore share the same
//! midpoint state, which is what the discrete energy balance needs.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galerkin::{Evaluation, GalerkinSystem, MassKind, SimState};
use crate::scalar::{max_abs, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ExplicitRk4,
    ImexCnAb2,
    #[default]
    ImplicitMidpoint,
}

/// What to do when the reconstructed temperature dips below `θ*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ClampPolicy {
    /// Clamp inside the constitutive laws and count the incidents.
    #[default]
    Count,
    /// Treat any incident as an invariant violation.
    Abort,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepConfig<T> {
    pub dt: T,
    pub t_end: T,
    pub scheme: Scheme,
    /// Relative update tolerance of the implicit iteration.
    pub tolerance: T,
    pub max_iterations: usize,
    pub clamp_policy: ClampPolicy,
    /// Keep the velocity coefficients fixed.
    pub frozen_velocity: bool,
}

impl<T: Real> Default for StepConfig<T> {
    fn default() -> Self {
        Self {
            dt: T::lit(1e-3),
            t_end: T::lit(0.1),
            scheme: Scheme::default(),
            tolerance: T::lit(1e-12),
            max_iterations: 50,
            clamp_policy: ClampPolicy::default(),
            frozen_velocity: false,
        }
    }
}

/// Density may leave `[ρ_low, ρ_high]` by at most this much.
pub const DENSITY_TOLERANCE: f64 = 1e-10;
/// A state whose largest entry exceeds this is treated as blown up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

impl<T: Real> StepConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            bad.push("dt must be positive (dt > 0)".to_string());
        }
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            bad.push("t_end must be non-negative".to_string());
        }
        if !(self.tolerance > T::zero() && self.tolerance <= T::lit(1e-6)) {
            bad.push("tolerance must lie in (0, 1e-6]".to_string());
        }
        if self.max_iterations == 0 {
            bad.push("max_iterations must be at least 1".to_string());
        }
        if bad.is_empty() {
            self.steps().map(|_| ())
        } else {
            Err(Error::InvalidStep(bad.join("; ")))
        }
    }

    /// Number of steps; `t_end` has to be an integer multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > T::lit(1e-9) * self.t_end.max(self.dt) {
            return Err(Error::InvalidStep("t_end must be a multiple of dt".into()));
        }
        n.to_usize()
            .ok_or_else(|| Error::InvalidStep("step count out of range".into()))
    }
}

/// Time derivatives after the mass solves.
#[derive(Clone, Debug)]
struct Rates<T> {
    rho: Vec<T>,
    a: Vec<T>,
    b: Vec<T>,
    c: Vec<T>,
}

/// Diagonal stiffness used to precondition the implicit solve and as the
/// implicit part of the IMEX split.
#[derive(Clone, Debug)]
struct Stiff<T> {
    /// `ε|k|²` per FFT index.
    rho: Vec<T>,
    a: Vec<T>,
    b: Vec<T>,
    c: Vec<T>,
}

fn stiff_diagonals<T: Real>(sys: &GalerkinSystem<T>, ev: &Evaluation<T>) -> Stiff<T> {
    let p = sys.params();
    let basis = sys.basis();
    let tr = sys.truncation();
    let eps = tr.eps_density;
    let rho = (0..basis.points())
        .map(|i| {
            let k = basis.symbol_vec(i);
            eps * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2])
        })
        .collect();
    let mut d2max = T::zero();
    let mut mu_max = T::zero();
    for g in 0..ev.rho.len() {
        let mut d2 = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let d = ev.grad_u[i][j][g] + ev.grad_u[j][i][g];
                d2 += d * d;
            }
        }
        d2max = d2max.max(d2);
        mu_max = mu_max.max(p.viscosity(ev.rho[g], ev.theta_c[g]));
    }
    let mu_eff = mu_max * (p.eps_const + d2max).powf(T::lit(0.5) * (p.r - T::lit(2.0)));
    let theta_ref = if p.alpha >= T::zero() {
        ev.theta_c.iter().fold(p.theta_low, |m, &t| m.max(t))
    } else {
        p.theta_low
    };
    let kappa_eff = p.kappa_high * theta_ref.powf(p.alpha);
    let two = T::lit(2.0);
    Stiff {
        rho,
        a: basis.vector_modes()[..tr.k_u]
            .iter()
            .map(|m| two * mu_eff * m.wavenumber_sqr())
            .collect(),
        b: basis.scalar_modes()[..tr.k_theta]
            .iter()
            .map(|m| kappa_eff * m.wavenumber_sqr())
            .collect(),
        c: sys.magnetic_stiffness(),
    }
}

fn combine<T: Real>(x: &[T], y: &[T], sx: T, sy: T) -> Vec<T> {
    x.iter().zip(y).map(|(&a, &b)| sx * a + sy * b).collect()
}

fn with_rates<T: Real>(y: &SimState<T>, r: &Rates<T>, h: T) -> SimState<T> {
    let one = T::one();
    SimState {
        t: y.t + h,
        rho: combine(&y.rho, &r.rho, one, h),
        a: combine(&y.a, &r.a, one, h),
        b: combine(&y.b, &r.b, one, h),
        c: combine(&y.c, &r.c, one, h),
    }
}

/// Per-step bookkeeping reported to observers.
#[derive(Clone, Debug, PartialEq)]
pub struct StepInfo<T> {
    pub step: usize,
    pub t: T,
    /// Nonlinear iterations used by the step that produced this state.
    pub iterations: usize,
    /// Temperature clamp incidents in this state.
    pub clamp_count: usize,
}

/// Advances one trajectory. Holds the multistep history of the IMEX scheme.
pub struct Integrator<'a, T: Real> {
    sys: &'a GalerkinSystem<T>,
    cfg: StepConfig<T>,
    imex: Option<(Stiff<T>, Rates<T>)>,
}

impl<'a, T: Real> Integrator<'a, T> {
    pub fn new(sys: &'a GalerkinSystem<T>, cfg: StepConfig<T>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { sys, cfg, imex: None })
    }

    pub fn config(&self) -> &StepConfig<T> {
        &self.cfg
    }

    fn rates(&self, y: &SimState<T>) -> Result<(Rates<T>, Evaluation<T>)> {
        let sys = self.sys;
        let ev = sys.evaluate(y)?;
        let tend = sys.tendencies_of(&ev, y)?;
        let a = if self.cfg.frozen_velocity {
            vec![T::zero(); y.a.len()]
        } else {
            sys.assemble_mass(&ev, MassKind::Velocity)?
                .cholesky()?
                .solve(&tend.momentum)?
        };
        let b = if y.b.is_empty() {
            Vec::new()
        } else {
            sys.assemble_mass(&ev, MassKind::Thermal)?
                .cholesky()?
                .solve(&tend.thermal)?
        };
        Ok((
            Rates {
                rho: tend.rho,
                a,
                b,
                c: tend.induction,
            },
            ev,
        ))
    }

    /// Multiplies the density part in Fourier space by `f(ε|k|²)`.
    fn density_filter(&self, r: &[T], stiff: &[T], f: impl Fn(T) -> T) -> Vec<T> {
        let b = self.sys.basis();
        let inv = T::from_usize_lossy(b.points()).recip();
        let mut s = b.analyze(r);
        for (z, &l) in s.iter_mut().zip(stiff) {
            *z = *z * (f(l) * inv);
        }
        b.synthesize(&s)
    }

    fn implicit_midpoint(&self, yn: &SimState<T>) -> Result<(SimState<T>, usize)> {
        let sys = self.sys;
        let dt = self.cfg.dt;
        let half = T::lit(0.5) * dt;
        let mut y = yn.clone();
        let mut last = T::zero();
        for it in 1..=self.cfg.max_iterations {
            let ybar = SimState {
                t: yn.t + half,
                rho: combine(&y.rho, &yn.rho, T::lit(0.5), T::lit(0.5)),
                a: combine(&y.a, &yn.a, T::lit(0.5), T::lit(0.5)),
                b: combine(&y.b, &yn.b, T::lit(0.5), T::lit(0.5)),
                c: combine(&y.c, &yn.c, T::lit(0.5), T::lit(0.5)),
            };
            let ev = sys.evaluate(&ybar)?;
            let tend = sys.tendencies_of(&ev, &ybar)?;
            let stiff = stiff_diagonals(sys, &ev);

            let r_rho: Vec<T> = (0..y.rho.len())
                .map(|g| (y.rho[g] - yn.rho[g]) - dt * tend.rho[g])
                .collect();
            let d_rho = self.density_filter(&r_rho, &stiff.rho, |l| -(T::one() + half * l).recip());

            let d_a = if self.cfg.frozen_velocity {
                vec![T::zero(); y.a.len()]
            } else {
                let mut m = sys.assemble_mass(&ev, MassKind::Velocity)?;
                let da = combine(&y.a, &yn.a, T::one(), -T::one());
                let r: Vec<T> = combine(&m.mul_vec(&da), &tend.momentum, -T::one(), dt);
                m.add_diagonal(&stiff.a.iter().map(|&l| half * l).collect::<Vec<_>>());
                m.cholesky()?.solve(&r)?
            };

            let d_b = if y.b.is_empty() {
                Vec::new()
            } else {
                let mut n = sys.assemble_mass(&ev, MassKind::Thermal)?;
                let db = combine(&y.b, &yn.b, T::one(), -T::one());
                let r: Vec<T> = combine(&n.mul_vec(&db), &tend.thermal, -T::one(), dt);
                n.add_diagonal(&stiff.b.iter().map(|&l| half * l).collect::<Vec<_>>());
                n.cholesky()?.solve(&r)?
            };

            let d_c: Vec<T> = (0..y.c.len())
                .map(|j| -((y.c[j] - yn.c[j]) - dt * tend.induction[j]) / (T::one() + half * stiff.c[j]))
                .collect();

            let mut upd = T::zero();
            for (x, d) in [(&mut y.rho, &d_rho), (&mut y.a, &d_a), (&mut y.b, &d_b), (&mut y.c, &d_c)] {
                for (xi, &di) in x.iter_mut().zip(d.iter()) {
                    *xi += di;
                }
                upd = upd.max(max_abs(d));
            }
            if !upd.is_finite() {
                return Err(Error::BlowUp((yn.t + dt).to_f64_lossy()));
            }
            last = upd;
            if upd <= self.cfg.tolerance * y.max_norm().max(T::one()) {
                y.t = yn.t + dt;
                return Ok((y, it));
            }
        }
        Err(Error::NonlinearSolveFailed {
            iterations: self.cfg.max_iterations,
            update: last.to_f64_lossy(),
        })
    }

    fn rk4(&self, y: &SimState<T>) -> Result<SimState<T>> {
        let dt = self.cfg.dt;
        let h = T::lit(0.5) * dt;
        let (k1, _) = self.rates(y)?;
        let (k2, _) = self.rates(&with_rates(y, &k1, h))?;
        let (k3, _) = self.rates(&with_rates(y, &k2, h))?;
        let (k4, _) = self.rates(&with_rates(y, &k3, dt))?;
        let sixth = dt / T::lit(6.0);
        let two = T::lit(2.0);
        let mix = |y: &[T], a: &[T], b: &[T], c: &[T], d: &[T]| -> Vec<T> {
            (0..y.len())
                .map(|i| y[i] + sixth * (a[i] + two * b[i] + two * c[i] + d[i]))
                .collect()
        };
        Ok(SimState {
            t: y.t + dt,
            rho: mix(&y.rho, &k1.rho, &k2.rho, &k3.rho, &k4.rho),
            a: mix(&y.a, &k1.a, &k2.a, &k3.a, &k4.a),
            b: mix(&y.b, &k1.b, &k2.b, &k3.b, &k4.b),
            c: mix(&y.c, &k1.c, &k2.c, &k3.c, &k4.c),
        })
    }

    /// Crank–Nicolson on the stiff diagonal, second-order Adams–Bashforth
    /// on the remainder. The first step is an implicit midpoint step.
    fn imex(&mut self, y: &SimState<T>) -> Result<(SimState<T>, usize)> {
        let (g, ev) = self.rates(y)?;
        let stiff = match &self.imex {
            Some((s, _)) => s.clone(),
            None => {
                // scale the coefficient stiffness by the mass it will be
                // compared against after the solve
                let mut s = stiff_diagonals(self.sys, &ev);
                let p = self.sys.params();
                let n = T::from_usize_lossy(ev.rho.len());
                let rho_mean = ev.rho.iter().copied().sum::<T>() / n;
                let heat_mean = ev
                    .rho
                    .iter()
                    .zip(&ev.theta_c)
                    .map(|(&r, &t)| r * crate::constitutive::cnu_of_theta(p, t))
                    .sum::<T>()
                    / n;
                s.a.iter_mut().for_each(|l| *l = *l / rho_mean);
                s.b.iter_mut().for_each(|l| *l = *l / heat_mean);
                s
            }
        };
        let explicit = self.explicit_part(y, &g, &stiff);
        let Some((_, prev)) = self.imex.replace((stiff.clone(), explicit.clone())) else {
            return self.implicit_midpoint(y);
        };
        let dt = self.cfg.dt;
        let h = T::lit(0.5) * dt;
        let (c1, c0) = (T::lit(1.5) * dt, T::lit(-0.5) * dt);
        let coef = |x: &[T], n1: &[T], n0: &[T], l: &[T]| -> Vec<T> {
            (0..x.len())
                .map(|i| ((T::one() - h * l[i]) * x[i] + c1 * n1[i] + c0 * n0[i]) / (T::one() + h * l[i]))
                .collect()
        };
        let b = self.sys.basis();
        let inv = T::from_usize_lossy(b.points()).recip();
        let sx = b.analyze(&y.rho);
        let s1 = b.analyze(&explicit.rho);
        let s0 = b.analyze(&prev.rho);
        let spec: Vec<Complex<T>> = (0..b.points())
            .map(|i| {
                let l = stiff.rho[i];
                (sx[i] * (T::one() - h * l) + s1[i] * c1 + s0[i] * c0) * (inv / (T::one() + h * l))
            })
            .collect();
        let a = if self.cfg.frozen_velocity {
            y.a.clone()
        } else {
            coef(&y.a, &explicit.a, &prev.a, &stiff.a)
        };
        Ok((
            SimState {
                t: y.t + dt,
                rho: b.synthesize(&spec),
                a,
                b: coef(&y.b, &explicit.b, &prev.b, &stiff.b),
                c: coef(&y.c, &explicit.c, &prev.c, &stiff.c),
            },
            1,
        ))
    }

    /// `G(y) + L y`, the part advanced explicitly by the IMEX scheme.
    fn explicit_part(&self, y: &SimState<T>, g: &Rates<T>, l: &Stiff<T>) -> Rates<T> {
        let add = |r: &[T], x: &[T], l: &[T]| -> Vec<T> { (0..r.len()).map(|i| r[i] + l[i] * x[i]).collect() };
        let lrho = self.density_filter(&y.rho, &l.rho, |k| k);
        Rates {
            rho: combine(&g.rho, &lrho, T::one(), T::one()),
            a: add(&g.a, &y.a, &l.a),
            b: add(&g.b, &y.b, &l.b),
            c: add(&g.c, &y.c, &l.c),
        }
    }

    /// One step with the runtime checks: blow-up, density bounds and the
    /// temperature clamp policy.
    pub fn step(&mut self, state: &SimState<T>) -> Result<(SimState<T>, StepInfo<T>)> {
        let (next, iterations) = match self.cfg.scheme {
            Scheme::ImplicitMidpoint => self.implicit_midpoint(state)?,
            Scheme::ExplicitRk4 => (self.rk4(state)?, 1),
            Scheme::ImexCnAb2 => self.imex(state)?,
        };
        let t = next.t.to_f64_lossy();
        let norm = next.max_norm();
        if !next.is_finite() || !(norm <= T::lit(BLOW_UP_THRESHOLD)) {
            return Err(Error::BlowUp(t));
        }
        let p = self.sys.params();
        let tol = T::lit(DENSITY_TOLERANCE);
        let (lo, hi) = next.rho_bounds();
        if lo < p.rho_low - tol || hi > p.rho_high + tol {
            return Err(Error::Invariant {
                t,
                what: format!(
                    "density left [{}, {}]: min {:e}, max {:e}",
                    p.rho_low, p.rho_high, lo, hi
                ),
            });
        }
        let clamp_count = self.sys.clamp_count(&next);
        if clamp_count > 0 && self.cfg.clamp_policy == ClampPolicy::Abort {
            return Err(Error::Invariant {
                t,
                what: format!("temperature below floor at {clamp_count} grid points"),
            });
        }
        let info = StepInfo {
            step: 0,
            t: next.t,
            iterations,
            clamp_count,
        };
        Ok((next, info))
    }
}

/// A single step from a fresh integrator (IMEX starts with midpoint).
pub fn step<T: Real>(sys: &GalerkinSystem<T>, state: &SimState<T>, cfg: &StepConfig<T>) -> Result<SimState<T>> {
    Ok(Integrator::new(sys, cfg.clone())?.step(state)?.0)
}

/// Receives sampled states during [`integrate`]. Calls happen in time order
/// on the integrating thread.
pub trait Observer<T: Real> {
    fn observe(&mut self, sys: &GalerkinSystem<T>, state: &SimState<T>, info: &StepInfo<T>) -> Result<()>;
}

impl<T: Real, F> Observer<T> for F
where
    F: FnMut(&GalerkinSystem<T>, &SimState<T>, &StepInfo<T>) -> Result<()>,
{
    fn observe(&mut self, sys: &GalerkinSystem<T>, state: &SimState<T>, info: &StepInfo<T>) -> Result<()> {
        self(sys, state, info)
    }
}

#[derive(Clone, Debug)]
pub struct IntegrationSummary<T> {
    pub final_state: SimState<T>,
    pub steps: usize,
    pub samples: usize,
    pub total_clamps: usize,
    pub max_iterations: usize,
}

/// Runs to `cfg.t_end`, sampling at step 0, every `cadence` steps, and at
/// the final step. Step errors come back wrapped with their time.
pub fn integrate<T: Real>(
    sys: &GalerkinSystem<T>,
    state0: &SimState<T>,
    cfg: &StepConfig<T>,
    cadence: usize,
    observers: &mut [&mut dyn Observer<T>],
) -> Result<IntegrationSummary<T>> {
    let mut integ = Integrator::new(sys, cfg.clone())?;
    let steps = cfg.steps()?;
    let cadence = cadence.max(1);
    let t0 = state0.t;
    let mut state = state0.clone();
    let mut info = StepInfo {
        step: 0,
        t: t0,
        iterations: 0,
        clamp_count: sys.clamp_count(&state),
    };
    let mut samples = 1;
    let mut total_clamps = info.clamp_count;
    let mut max_iterations = 0;
    for o in observers.iter_mut() {
        o.observe(sys, &state, &info)?;
    }
    for n in 1..=steps {
        let (mut next, mut ni) = integ.step(&state).map_err(|e| Error::StepFailed {
            t: state.t.to_f64_lossy(),
            source: Box::new(e),
        })?;
        // times as multiples of dt keep samples exactly reproducible
        next.t = t0 + T::from_usize_lossy(n) * cfg.dt;
        ni.t = next.t;
        ni.step = n;
        total_clamps += ni.clamp_count;
        max_iterations = max_iterations.max(ni.iterations);
        state = next;
        info = ni;
        if n % cadence == 0 || n == steps {
            samples += 1;
            for o in observers.iter_mut() {
                o.observe(sys, &state, &info)?;
            }
        }
    }
    Ok(IntegrationSummary {
        final_state: state,
        steps,
        samples,
        total_clamps,
        max_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::tests::{random_state, system};

    fn mode_norm(c: &[f64]) -> f64 {
        c.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn config_validation() {
        let mut cfg = StepConfig::<f64>::default();
        assert!(cfg.validate().is_ok());
        cfg.dt = 0.0;
        assert!(matches!(cfg.validate(), Err(Error::InvalidStep(_))));
        cfg.dt = 0.03;
        assert!(cfg.validate().is_err());
        cfg.dt = 1e-3;
        cfg.tolerance = 1e-3;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_state_stays_zero() {
        let sys = system(8, 1e-3);
        let mut st = sys.zero_state(1.0);
        st.b[0] = 2.0;
        for scheme in [Scheme::ImplicitMidpoint, Scheme::ExplicitRk4, Scheme::ImexCnAb2] {
            let cfg = StepConfig {
                dt: 0.05,
                scheme,
                ..Default::default()
            };
            let next = step(&sys, &st, &cfg).unwrap();
            assert!(next.a.iter().chain(&next.c).all(|x| x.abs() < 1e-15));
            assert!(next.rho.iter().all(|r| (r - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn single_mode_magnetic_decay() {
        let sys = system(4, 0.0);
        let mut st = sys.zero_state(1.0);
        st.b[0] = 1.0;
        st.c[1] = 0.3;
        let cfg = StepConfig {
            dt: 1e-3,
            t_end: 0.1,
            frozen_velocity: true,
            ..Default::default()
        };
        let out = integrate(&sys, &st, &cfg, 10, &mut []).unwrap();
        let k2 = sys.basis().vector_modes()[1].wavenumber_sqr();
        let exact = 0.3 * (-0.7 * k2 * 0.1f64).exp();
        let got = mode_norm(&out.final_state.c);
        assert!(((got - exact) / exact).abs() < 1e-6, "{got} vs {exact}");
    }

    #[test]
    fn schemes_agree_on_short_run() {
        let sys = system(12, 1e-3);
        let st = random_state(&sys, 4);
        let run = |scheme, dt| {
            let cfg = StepConfig {
                dt,
                t_end: 0.02,
                scheme,
                ..Default::default()
            };
            integrate(&sys, &st, &cfg, 100, &mut []).unwrap().final_state
        };
        let reference = run(Scheme::ExplicitRk4, 1e-3);
        for (scheme, tol) in [(Scheme::ImplicitMidpoint, 1e-5), (Scheme::ImexCnAb2, 1e-3)] {
            let s = run(scheme, 1e-3);
            let err = s.a.iter().zip(&reference.a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err < tol, "{scheme:?}: {err}");
        }
    }

    #[test]
    fn observers_see_increasing_times() {
        let sys = system(8, 0.0);
        let st = random_state(&sys, 1);
        let cfg = StepConfig {
            dt: 1e-3,
            t_end: 0.01,
            ..Default::default()
        };
        let mut times = Vec::new();
        let mut obs = |_: &GalerkinSystem<f64>, s: &SimState<f64>, _: &StepInfo<f64>| -> Result<()> {
            times.push(s.t);
            Ok(())
        };
        let out = integrate(&sys, &st, &cfg, 3, &mut [&mut obs]).unwrap();
        assert_eq!(times.len(), out.samples);
        assert_eq!(times.len(), 5);
        assert!(times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_end_time_gives_one_sample() {
        let sys = system(8, 0.0);
        let st = random_state(&sys, 1);
        let cfg = StepConfig {
            t_end: 0.0,
            ..Default::default()
        };
        let out = integrate(&sys, &st, &cfg, 1, &mut []).unwrap();
        assert_eq!(out.samples, 1);
        assert_eq!(out.final_state, st);
    }

    #[test]
    fn density_heat_kernel_decay() {
        let eps = 0.02;
        let sys = system(4, eps);
        let b = sys.basis();
        let mut st = sys.zero_state(1.0);
        st.b[0] = 1.0;
        st.rho = crate::spectral::Field::scalar_from_fn(b, |x| 1.0 + 0.1 * (x[1] + x[2]).sin())
            .values(0)
            .unwrap()
            .to_vec();
        let cfg = StepConfig {
            dt: 1e-3,
            t_end: 0.1,
            frozen_velocity: true,
            ..Default::default()
        };
        let out = integrate(&sys, &st, &cfg, 100, &mut []).unwrap();
        let decay = (-eps * 2.0 * 0.1f64).exp();
        for (g, r) in out.final_state.rho.iter().enumerate() {
            let x = b.node(g);
            let expect = 1.0 + 0.1 * decay * (x[1] + x[2]).sin();
            assert!((r - expect).abs() < 1e-6 * 0.1);
        }
    }
}
