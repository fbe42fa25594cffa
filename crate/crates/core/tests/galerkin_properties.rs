use std::f64::consts::TAU;

use mhd_galerkin::harness::{check::energy_power, operator_oracle, oracle_params, random_band_limited_state};
use mhd_galerkin::{System, Truncation};
use proptest::prelude::*;

fn system(k: usize, eps: f64, sign: f64) -> System {
    System::new(oracle_params(), TAU, 8, Truncation::uniform(k, eps))
        .unwrap()
        .with_lorentz_sign(sign)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn pseudospectral_operators_match_dense_oracle(seed in 0u64..1_000_000, eps in 0.0f64..5e-3, amp in 0.05f64..0.6) {
        let sys = system(16, eps, 1.0);
        let st = random_band_limited_state(&sys, seed, amp);
        let r = operator_oracle(&sys, &st).unwrap();
        prop_assert!(r.max() < 1e-10, "deviation {:e}", r.max());
    }

    #[test]
    fn nonlinear_terms_do_not_create_energy(seed in 0u64..1_000_000, eps in 0.0f64..2e-2) {
        let sys = system(24, eps, 1.0);
        let st = random_band_limited_state(&sys, seed, 0.5);
        let (power, diss) = energy_power(&sys, &st).unwrap();
        prop_assert!(diss > 0.0);
        prop_assert!((power + diss).abs() <= 1e-10 * diss, "power {power:e}, dissipation {diss:e}");
    }

    #[test]
    fn density_rhs_has_zero_mean(seed in 0u64..1_000_000, eps in 0.0f64..1e-2) {
        let sys = system(16, eps, 1.0);
        let st = random_band_limited_state(&sys, seed, 0.5);
        let ev = sys.evaluate(&st).unwrap();
        prop_assert!(sys.grid_sum(&sys.density_rhs(&ev)).abs() < 1e-12);
    }
}

#[test]
fn flipped_lorentz_coupling_breaks_the_energy_identity() {
    let sys = system(24, 0.0, -1.0);
    let st = random_band_limited_state(&sys, 7, 0.5);
    let (power, diss) = energy_power(&sys, &st).unwrap();
    assert!((power + diss).abs() > 1e-4 * diss);
}
