use super::record::DiagnosticsRecord;
use crate::constitutive::q_of_theta;
use crate::error::Result;
use crate::galerkin::{GalerkinSystem, SimState};
use crate::integrator::{Observer, StepInfo};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct MonitorSettings<T> {
    /// Exponent of the negative-power temperature monitor, in `(0, 1)`.
    pub lambda: T,
    /// Relative slack on the magnetic decay estimate.
    pub decay_slack: T,
    /// Allowed decrease of the total heat between samples.
    pub heat_slack: T,
    /// Allowed shortfall of `d_visc` below its coercivity floor.
    pub coercivity_slack: T,
    /// Largest admissible `max |div u|`, `max |div H|`.
    pub divergence_tolerance: T,
}

impl<T: Real> Default for MonitorSettings<T> {
    fn default() -> Self {
        Self {
            lambda: T::lit(0.5),
            decay_slack: T::lit(0.01),
            heat_slack: T::lit(1e-10),
            coercivity_slack: T::lit(1e-9),
            divergence_tolerance: T::lit(1e-12),
        }
    }
}

/// Counts of runtime invariant violations seen by a monitor.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvariantFlags {
    pub decay_bound: usize,
    pub heat_decrease: usize,
    pub coercivity: usize,
    pub solenoidality: usize,
    pub negative_energy: usize,
    /// First few violation messages, for reports.
    pub messages: Vec<String>,
}

impl InvariantFlags {
    pub fn total(&self) -> usize {
        self.decay_bound + self.heat_decrease + self.coercivity + self.solenoidality + self.negative_energy
    }

    pub fn passed(&self) -> bool {
        self.total() == 0
    }

    fn note(&mut self, msg: String) {
        if self.messages.len() < 16 {
            self.messages.push(msg);
        }
    }
}

/// Instantaneous quantities at one state, including the rates that enter
/// the running integrals.
#[derive(Clone, Debug)]
pub struct Sample<T> {
    pub record: DiagnosticsRecord<T>,
    /// Integrand of the kinetic identity.
    pub kinetic_power: T,
    /// `‖∇u‖`, the forcing of the magnetic decay estimate.
    pub grad_u_norm: T,
}

/// Evaluates every per-sample quantity at `state`.
pub fn measure<T: Real>(sys: &GalerkinSystem<T>, state: &SimState<T>, lambda: T) -> Result<Sample<T>> {
    let ev = sys.evaluate(state)?;
    let tend = sys.tendencies_of(&ev, state)?;
    let p = sys.params();
    let n = ev.rho.len();
    let eps = sys.eps_density();
    let half = T::lit(0.5);

    let mut u2 = vec![T::zero(); n];
    let mut j2 = vec![T::zero(); n];
    let mut h2 = vec![T::zero(); n];
    let mut grad_u2 = vec![T::zero(); n];
    let mut grad_h2 = vec![T::zero(); n];
    let mut strain2 = vec![T::zero(); n];
    let mut strain_r = vec![T::zero(); n];
    let mut floor = vec![T::zero(); n];
    let mut convect = vec![T::zero(); n];
    let mut div_u = T::zero();
    let mut div_h = T::zero();
    let exponent = half * (p.r - T::lit(2.0));
    for g in 0..n {
        let mut du = T::zero();
        let mut dh = T::zero();
        let mut d2 = T::zero();
        let mut cv = T::zero();
        for i in 0..3 {
            u2[g] += ev.u[i][g] * ev.u[i][g];
            h2[g] += ev.h[i][g] * ev.h[i][g];
            j2[g] += ev.j[i][g] * ev.j[i][g];
            du += ev.grad_u[i][i][g];
            dh += ev.grad_h[i][i][g];
            for j in 0..3 {
                let gu = ev.grad_u[i][j][g];
                grad_u2[g] += gu * gu;
                grad_h2[g] += ev.grad_h[i][j][g] * ev.grad_h[i][j][g];
                let d = gu + ev.grad_u[j][i][g];
                d2 += d * d;
                cv += ev.u[i][g] * ev.u[j][g] * gu;
            }
        }
        div_u = div_u.max(du.abs());
        div_h = div_h.max(dh.abs());
        strain2[g] = d2;
        strain_r[g] = d2.sqrt().powf(p.r);
        floor[g] = p.mu_low * (p.eps_const + d2).powf(exponent) * d2;
        convect[g] = ev.rho[g] * cv;
    }

    let lam = lambda;
    let pw = half * (p.alpha - lam + T::one());
    let mut heat = vec![T::zero(); n];
    let mut rho_theta = vec![T::zero(); n];
    let mut w12 = vec![T::zero(); n];
    let mut theta_neg = T::zero();
    let mut theta_min = T::infinity();
    for g in 0..n {
        let th = ev.theta_c[g];
        heat[g] = ev.rho[g] * q_of_theta(p, th);
        rho_theta[g] = (ev.rho[g] * th).abs();
        theta_neg = theta_neg.max(th.powf(-lam));
        theta_min = theta_min.min(ev.theta[g]);
        let gt2 = (0..3).map(|c| ev.grad_theta[c][g] * ev.grad_theta[c][g]).sum::<T>();
        let grad_part = if ev.theta[g] > p.theta_low {
            pw * pw * th.powf(T::lit(2.0) * pw - T::lit(2.0)) * gt2
        } else {
            T::zero()
        };
        w12[g] = th.powf(T::lit(2.0) * pw) + grad_part;
    }
    if sys.truncation().k_theta == 0 {
        theta_min = p.theta_low;
    }

    let grad_u_sqr = sys.grid_sum(&grad_u2);
    let strain_sqr = sys.grid_sum(&strain2);
    let h_sqr: T = state.c.iter().map(|&c| c * c).sum();
    let grad_h_sqr = sys.grid_sum(&grad_h2);
    let ratio = |num: T, den: T| if den > T::zero() { (num / den).sqrt() } else { T::zero() };
    let (rho_min, rho_max) = state.rho_bounds();
    let a_f: T = state.a.iter().zip(&tend.momentum).map(|(&a, &f)| a * f).sum();
    let kinetic_power = sys.grid_dot(&tend.rho, &u2) + a_f
        - sys.grid_sum(&convect)
        - half * eps * sys.grid_dot(&ev.lap_rho, &u2);

    let record = DiagnosticsRecord {
        step: 0,
        t: state.t,
        e_kin: half * sys.grid_dot(&ev.rho, &u2),
        e_mag: half * h_sqr,
        d_visc: sys.grid_sum(&ev.dissipation),
        d_visc_lower: sys.grid_sum(&floor),
        d_mag: p.nu * sys.grid_sum(&j2),
        heat_total: sys.grid_sum(&heat),
        energy_residual: T::zero(),
        kinetic_residual: T::zero(),
        rho_min,
        rho_max,
        theta_min,
        clamp_count: ev.clamp_count,
        div_u,
        div_h,
        korn_ratio: ratio(grad_u_sqr, strain_sqr),
        poincare_ratio: ratio(h_sqr, grad_h_sqr),
        h_norm_sqr: h_sqr,
        decay_bound: T::zero(),
        strain_r_norm: sys.grid_sum(&strain_r),
        curl_h_sqr: sys.grid_sum(&j2),
        rho_theta_l1: sys.grid_sum(&rho_theta),
        theta_neg_power: theta_neg,
        theta_p_w12: sys.grid_sum(&w12),
        iterations: 0,
    };
    Ok(Sample {
        record,
        kinetic_power,
        grad_u_norm: grad_u_sqr.sqrt(),
    })
}

struct Previous<T> {
    t: T,
    dissipation: T,
    kinetic_power: T,
    grad_u_norm: T,
    heat: T,
}

/// Observer that records one [`DiagnosticsRecord`] per sample and keeps
/// the running time integrals and invariant flags.
pub struct DiagnosticsMonitor<T> {
    settings: MonitorSettings<T>,
    records: Vec<DiagnosticsRecord<T>>,
    flags: InvariantFlags,
    e0: T,
    k0: T,
    h0_sqr: T,
    t0: T,
    dissipated: T,
    kinetic_work: T,
    decay_integral: T,
    prev: Option<Previous<T>>,
}

impl<T: Real> DiagnosticsMonitor<T> {
    pub fn new(settings: MonitorSettings<T>) -> Self {
        Self {
            settings,
            records: Vec::new(),
            flags: InvariantFlags::default(),
            e0: T::zero(),
            k0: T::zero(),
            h0_sqr: T::zero(),
            t0: T::zero(),
            dissipated: T::zero(),
            kinetic_work: T::zero(),
            decay_integral: T::zero(),
            prev: None,
        }
    }

    pub fn records(&self) -> &[DiagnosticsRecord<T>] {
        &self.records
    }

    pub fn into_records(self) -> Vec<DiagnosticsRecord<T>> {
        self.records
    }

    pub fn flags(&self) -> &InvariantFlags {
        &self.flags
    }

    /// Decay-rate constant `C = 2π/L`, the reciprocal Poincaré constant of
    /// the box.
    pub fn decay_constant(sys: &GalerkinSystem<T>) -> T {
        sys.basis().lowest_wavenumber()
    }

    pub fn push(&mut self, sys: &GalerkinSystem<T>, state: &SimState<T>, info: &StepInfo<T>) -> Result<()> {
        let s = measure(sys, state, self.settings.lambda)?;
        let mut r = s.record;
        r.step = info.step;
        r.iterations = info.iterations;
        let half = T::lit(0.5);
        let cnu = Self::decay_constant(sys) * sys.params().nu;
        match &self.prev {
            None => {
                self.e0 = r.energy();
                self.k0 = r.e_kin;
                self.h0_sqr = r.h_norm_sqr;
                self.t0 = r.t;
            }
            Some(p) => {
                let dt = r.t - p.t;
                self.dissipated += half * dt * (p.dissipation + r.dissipation());
                self.kinetic_work += half * dt * (p.kinetic_power + s.kinetic_power);
                let decay = (-cnu * dt).exp();
                self.decay_integral = decay * self.decay_integral + half * dt * (decay * p.grad_u_norm + s.grad_u_norm);
                if r.heat_total < p.heat - self.settings.heat_slack {
                    self.flags.heat_decrease += 1;
                    self.flags
                        .note(format!("total heat decreased at t = {}: {:e} -> {:e}", r.t, p.heat, r.heat_total));
                }
            }
        }
        r.energy_residual = r.energy() - self.e0 + self.dissipated;
        r.kinetic_residual = r.e_kin - self.k0 - self.kinetic_work;
        r.decay_bound = self.h0_sqr * (-cnu * (r.t - self.t0)).exp() + T::lit(2.0) / cnu * self.decay_integral;

        let st = &self.settings;
        if r.h_norm_sqr > (T::one() + st.decay_slack) * r.decay_bound {
            self.flags.decay_bound += 1;
            self.flags.note(format!(
                "magnetic decay estimate violated at t = {}: {:e} > {:e}",
                r.t, r.h_norm_sqr, r.decay_bound
            ));
        }
        if r.d_visc < r.d_visc_lower - st.coercivity_slack {
            self.flags.coercivity += 1;
            self.flags.note(format!("viscous dissipation below coercivity floor at t = {}", r.t));
        }
        if r.div_u > st.divergence_tolerance || r.div_h > st.divergence_tolerance {
            self.flags.solenoidality += 1;
            self.flags.note(format!("divergence {:e}/{:e} at t = {}", r.div_u, r.div_h, r.t));
        }
        if r.e_kin < T::zero() || r.d_visc < T::zero() || r.d_mag < T::zero() {
            self.flags.negative_energy += 1;
            self.flags.note(format!("negative energy or dissipation at t = {}", r.t));
        }
        self.prev = Some(Previous {
            t: r.t,
            dissipation: r.dissipation(),
            kinetic_power: s.kinetic_power,
            grad_u_norm: s.grad_u_norm,
            heat: r.heat_total,
        });
        self.records.push(r);
        Ok(())
    }
}

impl<T: Real> Observer<T> for DiagnosticsMonitor<T> {
    fn observe(&mut self, sys: &GalerkinSystem<T>, state: &SimState<T>, info: &StepInfo<T>) -> Result<()> {
        self.push(sys, state, info)
    }
}
