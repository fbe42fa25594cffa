//! Energies, dissipation rates, identity residuals and a priori monitors.
//!
//! [`DiagnosticsMonitor`] is an integrator observer producing one
//! [`DiagnosticsRecord`] per sample; the free functions post-process a
//! trajectory or check a functional identity directly.

mod checks;
mod monitor;
mod record;

pub use checks::{
    apriori_monitor, energy_balance, functional_inequality_check, k_uniformity_flags, kinetic_identity_check,
    korn_ratio, observed_order, poincare_ratio, refinement_ratio, vector_identity_check, AprioriReport,
    FunctionalReport, IdentityDefects, ResidualReport, K_UNIFORMITY_GROWTH,
};
pub use monitor::{measure, DiagnosticsMonitor, InvariantFlags, MonitorSettings, Sample};
pub use record::{csv_header, write_csv, DiagnosticsRecord, CSV_COLUMNS, CSV_SCHEMA_VERSION};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::tests::{random_state, system};
    use crate::integrator::{integrate, StepConfig};
    use crate::spectral::{build_basis, Field};

    #[test]
    fn zero_state_diagnostics_vanish() {
        let sys = system(8, 0.0);
        let mut st = sys.zero_state(1.0);
        st.b[0] = 1.0;
        let cfg = StepConfig {
            dt: 1e-2,
            t_end: 0.05,
            ..Default::default()
        };
        let mut mon = DiagnosticsMonitor::new(MonitorSettings::default());
        integrate(&sys, &st, &cfg, 1, &mut [&mut mon]).unwrap();
        let rep = energy_balance(mon.records()).unwrap();
        assert_eq!(rep.max_abs, 0.0);
        assert_eq!(kinetic_identity_check(mon.records()).unwrap().max_abs, 0.0);
        let ap = apriori_monitor(mon.records());
        assert_eq!(ap.sup_energy, 0.0);
        assert!(ap.sup_theta_neg > 0.0);
        assert!(mon.flags().passed());
    }

    #[test]
    fn one_sample_is_rejected() {
        assert!(energy_balance::<f64>(&[DiagnosticsRecord::default()]).is_err());
    }

    #[test]
    fn energy_and_kinetic_residuals_are_small() {
        let sys = system(12, 1e-3);
        let st = random_state(&sys, 5);
        let cfg = StepConfig {
            dt: 1e-3,
            t_end: 0.05,
            ..Default::default()
        };
        let mut mon = DiagnosticsMonitor::new(MonitorSettings::default());
        integrate(&sys, &st, &cfg, 1, &mut [&mut mon]).unwrap();
        let e = energy_balance(mon.records()).unwrap();
        let k = kinetic_identity_check(mon.records()).unwrap();
        let e0 = mon.records()[0].energy();
        assert!(e.max_abs < 1e-5 * e0, "{e:?}");
        assert!(k.max_abs < 1e-5 * e0, "{k:?}");
        assert!(mon.flags().passed(), "{:?}", mon.flags());
    }

    #[test]
    fn decay_run_energy_peaks_at_start() {
        let sys = system(4, 0.0);
        let mut st = sys.zero_state(1.0);
        st.b[0] = 1.0;
        st.c[0] = 0.5;
        let cfg = StepConfig {
            dt: 1e-3,
            t_end: 0.02,
            frozen_velocity: true,
            ..Default::default()
        };
        let mut mon = DiagnosticsMonitor::new(MonitorSettings::default());
        integrate(&sys, &st, &cfg, 2, &mut [&mut mon]).unwrap();
        assert_eq!(apriori_monitor(mon.records()).sup_energy_time, 0.0);
    }

    #[test]
    fn identities_hold_on_random_fields() {
        let sys = system(30, 0.0);
        for seed in 0..3 {
            let st = random_state(&sys, seed);
            let d = vector_identity_check(sys.basis(), &st.a, &st.c, 0.7).unwrap();
            assert!(d.max() < 1e-10, "{d:?}");
        }
        let zero = vec![0.0; 30];
        let d = vector_identity_check(sys.basis(), &zero, &zero, 0.7).unwrap();
        assert_eq!(d.max(), 0.0);
    }

    #[test]
    fn functional_constants() {
        let basis = build_basis(3.0f64, 8, 64, 1).unwrap();
        let rep = functional_inequality_check(&basis, 64, 20, 7).unwrap();
        assert!(rep.korn_max <= 1.0 + 1e-10);
        assert!((rep.korn_max - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(rep.korn_parseval_defect < 1e-12);
        assert!(rep.poincare_max <= rep.poincare_constant + 1e-12);
        assert!((rep.poincare_lowest - rep.poincare_constant).abs() < 1e-12);
    }

    #[test]
    fn gradient_field_rejected_by_korn() {
        let basis = build_basis(1.0f64, 8, 4, 1).unwrap();
        let k = basis.lowest_wavenumber();
        let g = Field::vector_from_fn(&basis, |x| [(k * x[0]).cos(), 0.0, 0.0]);
        assert!(matches!(korn_ratio(&basis, &g), Err(crate::error::Error::NotSolenoidal(_))));
    }

    #[test]
    fn uniformity_flags() {
        let a = AprioriReport {
            sup_energy: 1.0,
            ..Default::default()
        };
        let mut b = a.clone();
        assert!(k_uniformity_flags(&[(8, a.clone()), (16, b.clone())]).is_empty());
        b.sup_energy = 2.0;
        assert_eq!(k_uniformity_flags(&[(8, a), (16, b)]).len(), 1);
    }
}
