//! The semi-discrete system: density transport on the quadrature grid and
//! coefficient equations for velocity, temperature and magnetic field.
//!
//! Velocity and temperature satisfy `M(ρ) ȧ = F_u` and `N(ρ, θ) ḃ = F_θ`
//! with state-dependent mass matrices; the magnetic coefficients evolve as
//! `ċ = −A(u) c`. Nonlinear terms are formed pointwise on the `M³` grid and
//! tested against the modes with the uniform rule.

mod state;
mod system;

pub use state::{SimState, Truncation};
pub use system::{
    Evaluation, GalerkinOperators, GalerkinSystem, MassKind, MomentumTerms, Tendencies, ThermalTerms,
};

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::constitutive::ConstitutiveParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn system(k: usize, eps: f64) -> GalerkinSystem<f64> {
        let params = ConstitutiveParams {
            nu: 0.7,
            ..Default::default()
        };
        GalerkinSystem::new(params, std::f64::consts::TAU, 8, Truncation::uniform(k, eps)).unwrap()
    }

    pub(crate) fn random_state(sys: &GalerkinSystem<f64>, seed: u64) -> SimState<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = sys.basis();
        let tr = sys.truncation();
        let mut gen = |n: usize, s: f64| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-s..s)).collect() };
        let a = gen(tr.k_u, 0.5);
        let c = gen(tr.k_h, 0.5);
        let mut th = gen(tr.k_theta, 0.05);
        th[0] = b.volume().sqrt();
        let modes = gen(12, 0.04);
        let mut rho = Field::scalar_from_fn(b, |x| {
            let mut r = 1.0;
            for (i, w) in modes.chunks(4).enumerate() {
                let n = (i + 1) as f64;
                r += w[0] * (n * x[0] + w[3]).cos() + w[1] * (x[1] - n * x[2]).sin() + w[2] * (x[2] + x[0]).cos();
            }
            r
        })
        .values(0)
        .unwrap()
        .to_vec();
        sys.filter_density(&mut rho);
        SimState::new(rho, a, th, c)
    }

    use crate::spectral::Field;

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn zero_state_is_fixed_point() {
        let sys = system(12, 1e-3);
        let mut st = sys.zero_state(1.0);
        st.b[0] = sys.basis().volume().sqrt();
        let t = sys.tendencies(&st).unwrap();
        assert!(max_abs(&t.rho) < 1e-14);
        assert!(max_abs(&t.momentum) < 1e-14);
        assert!(max_abs(&t.thermal) < 1e-14);
        assert!(max_abs(&t.induction) < 1e-14);
    }

    #[test]
    fn constant_density_is_steady() {
        let sys = system(16, 1e-2);
        let mut st = random_state(&sys, 3);
        st.rho.iter_mut().for_each(|r| *r = 1.3);
        let ev = sys.evaluate(&st).unwrap();
        assert!(max_abs(&sys.density_rhs(&ev)) < 1e-12);
    }

    #[test]
    fn density_heat_kernel() {
        let eps = 0.01;
        let sys = system(4, eps);
        let b = sys.basis();
        let mut st = sys.zero_state(1.0);
        st.rho = Field::scalar_from_fn(b, |x| 1.0 + 0.1 * (x[0] + 2.0 * x[2]).cos())
            .values(0)
            .unwrap()
            .to_vec();
        let ev = sys.evaluate(&st).unwrap();
        let rate = sys.density_rhs(&ev);
        for (g, r) in rate.iter().enumerate() {
            let x = b.node(g);
            let expect = -eps * 5.0 * 0.1 * (x[0] + 2.0 * x[2]).cos();
            assert!((r - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn mass_matrix_examples() {
        let sys = system(20, 0.0);
        let mut st = sys.zero_state(1.0);
        st.b[0] = 1.0;
        let ev = sys.evaluate(&st).unwrap();
        let m = sys.assemble_mass(&ev, MassKind::Velocity).unwrap();
        let i = crate::linalg::DenseMatrix::<f64>::identity(20);
        assert!(max_abs(m.as_slice().iter().zip(i.as_slice()).map(|(a, b)| a - b).collect::<Vec<_>>().as_slice()) < 1e-12);
        st.rho.iter_mut().for_each(|r| *r = 1.7);
        let ev = sys.evaluate(&st).unwrap();
        let m = sys.assemble_mass(&ev, MassKind::Velocity).unwrap();
        for r in 0..20 {
            for c in 0..20 {
                let e = if r == c { 1.7 } else { 0.0 };
                assert!((m[(r, c)] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mass_matrix_spectrum_within_density_bounds() {
        let sys = system(40, 0.0);
        for seed in 0..4 {
            let st = random_state(&sys, seed);
            let (lo, hi) = st.rho_bounds();
            let ev = sys.evaluate(&st).unwrap();
            let m = sys.assemble_mass(&ev, MassKind::Velocity).unwrap();
            assert!(m.max_asymmetry() == 0.0);
            let na = nalgebra::DMatrix::from_row_slice(40, 40, m.as_slice());
            let eig = na.symmetric_eigen().eigenvalues;
            for &e in eig.iter() {
                assert!(e >= lo - 1e-8 && e <= hi + 1e-8, "{e} outside [{lo}, {hi}]");
            }
        }
    }

    #[test]
    fn mass_is_conserved() {
        let sys = system(16, 5e-3);
        for seed in 0..5 {
            let st = random_state(&sys, seed);
            let ev = sys.evaluate(&st).unwrap();
            let rate = sys.density_rhs(&ev);
            assert!(sys.grid_sum(&rate).abs() < 1e-12);
        }
    }

    #[test]
    fn semi_discrete_energy_identity() {
        for eps in [0.0, 1e-2] {
            let sys = system(24, eps);
            for seed in 0..4 {
                let st = random_state(&sys, seed);
                let ev = sys.evaluate(&st).unwrap();
                let rho_t = sys.density_rhs(&ev);
                let f = sys.momentum_rhs(&ev);
                let cdot = sys.induction_rhs(&ev, &st.c);
                let u2: Vec<f64> = (0..ev.rho.len())
                    .map(|g| (0..3).map(|c| ev.u[c][g] * ev.u[c][g]).sum())
                    .collect();
                let power: f64 = st.a.iter().zip(&f).map(|(a, f)| a * f).sum::<f64>()
                    + 0.5 * sys.grid_dot(&rho_t, &u2)
                    + st.c.iter().zip(&cdot).map(|(c, d)| c * d).sum::<f64>();
                let j2: Vec<f64> = (0..ev.rho.len())
                    .map(|g| (0..3).map(|c| ev.j[c][g] * ev.j[c][g]).sum())
                    .collect();
                let diss = sys.grid_sum(&ev.dissipation) + sys.params().nu * sys.grid_sum(&j2);
                assert!((power + diss).abs() < 1e-10 * diss, "eps {eps}: {power} vs {diss}");
            }
        }
    }

    #[test]
    fn flipped_lorentz_breaks_energy_identity() {
        let sys = system(24, 0.0).with_lorentz_sign(-1.0);
        let st = random_state(&sys, 1);
        let ev = sys.evaluate(&st).unwrap();
        let rho_t = sys.density_rhs(&ev);
        let f = sys.momentum_rhs(&ev);
        let cdot = sys.induction_rhs(&ev, &st.c);
        let u2: Vec<f64> = (0..ev.rho.len())
            .map(|g| (0..3).map(|c| ev.u[c][g] * ev.u[c][g]).sum())
            .collect();
        let power: f64 = st.a.iter().zip(&f).map(|(a, f)| a * f).sum::<f64>()
            + 0.5 * sys.grid_dot(&rho_t, &u2)
            + st.c.iter().zip(&cdot).map(|(c, d)| c * d).sum::<f64>();
        let j2: Vec<f64> = (0..ev.rho.len())
            .map(|g| (0..3).map(|c| ev.j[c][g] * ev.j[c][g]).sum())
            .collect();
        let diss = sys.grid_sum(&ev.dissipation) + sys.params().nu * sys.grid_sum(&j2);
        assert!((power + diss).abs() > 1e-6 * diss);
    }

    #[test]
    fn induction_matrix_consistent_with_rhs() {
        let sys = system(20, 0.0);
        let st = random_state(&sys, 9);
        let ev = sys.evaluate(&st).unwrap();
        let a = sys.induction_matrix(&ev);
        let ac = a.mul_vec(&st.c);
        let rhs = sys.induction_rhs(&ev, &st.c);
        for (x, y) in ac.iter().zip(&rhs) {
            assert!((x + y).abs() < 1e-11);
        }
        // transport part reproduces the stretching term
        let stiff = sys.magnetic_stiffness();
        let diff: f64 = st.c.iter().zip(&stiff).map(|(c, s)| c * c * s).sum();
        let transport = a.bilinear(&st.c, &st.c) - diff;
        let stretch: Vec<f64> = (0..ev.rho.len())
            .map(|g| {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += ev.h[i][g] * ev.grad_u[i][j][g] * ev.h[j][g];
                    }
                }
                s
            })
            .collect();
        assert!((transport + sys.grid_sum(&stretch)).abs() < 1e-10);
    }

    #[test]
    fn induction_matrix_without_flow_is_diffusion() {
        let sys = system(16, 0.0);
        let mut st = random_state(&sys, 2);
        st.a.iter_mut().for_each(|a| *a = 0.0);
        let ev = sys.evaluate(&st).unwrap();
        let a = sys.induction_matrix(&ev);
        for (i, m) in sys.basis().vector_modes()[..16].iter().enumerate() {
            for j in 0..16 {
                let e = if i == j { 0.7 * m.wavenumber_sqr() } else { 0.0 };
                assert!((a[(i, j)] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn thermal_balance_with_unit_test_function() {
        let sys = system(16, 1e-3);
        for seed in 0..3 {
            let st = random_state(&sys, seed);
            let ev = sys.evaluate(&st).unwrap();
            let rho_t = sys.density_rhs(&ev);
            let terms = sys.thermal_terms(&ev, &rho_t).unwrap();
            // constant mode has no gradient
            assert!(terms.convection[0].abs() < 1e-14 && terms.flux[0].abs() < 1e-14);
            assert!(terms.joule[0] + terms.viscous[0] >= 0.0);
            let total = sys.thermal_rhs(&ev, &rho_t).unwrap();
            let sqrt_vol = sys.basis().volume().sqrt();
            let q: Vec<f64> = ev.theta_c.iter().map(|&t| crate::constitutive::q_of_theta(sys.params(), t)).collect();
            let heat_rate = sqrt_vol * total[0] + sys.grid_dot(&rho_t, &q);
            let j2: Vec<f64> = (0..ev.rho.len())
                .map(|g| (0..3).map(|c| ev.j[c][g] * ev.j[c][g]).sum())
                .collect();
            let src = sys.grid_sum(&ev.dissipation) + sys.params().nu * sys.grid_sum(&j2);
            assert!((heat_rate - src).abs() < 1e-10 * src);
        }
    }
}
