//! Named initial-data families and their projection onto the Galerkin
//! spaces. Velocity and magnetic coefficients are inner products with the
//! solenoidal modes, the temperature is projected onto the scalar modes,
//! and the density is sampled on the quadrature grid and band-filtered.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Family, InitialConfig};
use crate::error::{Error, Result};
use crate::galerkin::{GalerkinSystem, SimState};

type Vector = [f64; 3];

fn project_vector(sys: &GalerkinSystem<f64>, count: usize, f: impl Fn([f64; 3]) -> Vector) -> Vec<f64> {
    let b = sys.basis();
    let mut comps = [vec![0.0; b.points()], vec![0.0; b.points()], vec![0.0; b.points()]];
    for idx in 0..b.points() {
        let v = f(b.node(idx));
        for c in 0..3 {
            comps[c][idx] = v[c];
        }
    }
    let spec = comps.each_ref().map(|g| b.analyze(g));
    b.project_vector(&spec, count)
}

fn project_scalar(sys: &GalerkinSystem<f64>, count: usize, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
    let b = sys.basis();
    let g: Vec<f64> = (0..b.points()).map(|i| f(b.node(i))).collect();
    b.project_scalar(&b.analyze(&g), count)
}

fn density(sys: &GalerkinSystem<f64>, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
    let b = sys.basis();
    let mut rho: Vec<f64> = (0..b.points()).map(|i| f(b.node(i))).collect();
    sys.filter_density(&mut rho);
    rho
}

/// Random coefficients with amplitude `scale / (1 + |n|²)`, rescaled so the
/// field has `L²` norm `scale · √|Ω|`.
fn random_coefficients(rng: &mut ChaCha8Rng, weights: impl Iterator<Item = f64>, norm: f64) -> Vec<f64> {
    let mut c: Vec<f64> = weights.map(|n2| rng.gen_range(-1.0..1.0) / (1.0 + n2)).collect();
    let s = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if s > 0.0 {
        c.iter_mut().for_each(|x| *x *= norm / s);
    }
    c
}

/// Builds the initial state of `cfg` for `sys`.
pub fn initial_state(sys: &GalerkinSystem<f64>, cfg: &InitialConfig, seed: u64) -> Result<SimState<f64>> {
    let b = sys.basis();
    let t = sys.truncation();
    let kappa = b.lowest_wavenumber();
    let (uu, bb) = (cfg.velocity, cfg.magnetic);
    let (rm, rd) = (cfg.rho_mean, cfg.rho_amplitude);
    let theta = |x: [f64; 3]| cfg.theta_mean + cfg.theta_amplitude * (kappa * x[0]).cos();
    let b_coeffs = project_scalar(sys, t.k_theta, theta);

    let (rho, a, c) = match cfg.family {
        Family::SingleModeDecay => (
            density(sys, |_| rm),
            vec![0.0; t.k_u],
            project_vector(sys, t.k_h, |x| [bb * (kappa * x[2]).sin(), 0.0, 0.0]),
        ),
        Family::SingleModeMhd => (
            density(sys, |x| rm + rd * (kappa * x[1]).cos()),
            project_vector(sys, t.k_u, |x| [0.0, uu * (kappa * x[0]).sin(), 0.0]),
            project_vector(sys, t.k_h, |x| [bb * (kappa * x[2]).cos(), 0.0, 0.0]),
        ),
        Family::OrszagTang => (
            density(sys, |x| rm + rd * (kappa * x[0]).cos()),
            project_vector(sys, t.k_u, |x| {
                [-uu * (kappa * x[1]).sin(), uu * (kappa * x[0]).sin(), 0.0]
            }),
            project_vector(sys, t.k_h, |x| {
                [-bb * (kappa * x[1]).sin(), bb * (2.0 * kappa * x[0]).sin(), 0.0]
            }),
        ),
        Family::Layered => (
            density(sys, |x| rm + rd * (kappa * x[2]).cos()),
            project_vector(sys, t.k_u, |x| [uu * (kappa * x[2]).sin(), 0.0, 0.0]),
            project_vector(sys, t.k_h, |x| [bb * (kappa * x[2]).sin(), 0.0, 0.0]),
        ),
        Family::RandomBandLimited => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let root_vol = b.volume().sqrt();
            let n2 = |n: [i32; 3]| (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64;
            let vm = b.vector_modes();
            let a = random_coefficients(&mut rng, vm[..t.k_u].iter().map(|m| n2(m.n)), uu * root_vol);
            let c = random_coefficients(&mut rng, vm[..t.k_h].iter().map(|m| n2(m.n)), bb * root_vol);
            // density perturbation from the shell-one scalar modes, scaled
            // so that its peak equals the configured amplitude
            let phases: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
            let shape = |x: [f64; 3]| -> f64 {
                (0..3)
                    .map(|d| (kappa * x[d] + phases[d]).cos() * (0.5 + 0.5 * phases[d + 3].cos()))
                    .sum()
            };
            let peak = (0..b.points()).map(|i| shape(b.node(i)).abs()).fold(0.0, f64::max);
            let scale = if peak > 0.0 { rd / peak } else { 0.0 };
            (density(sys, |x| rm + scale * shape(x)), a, c)
        }
    };
    let state = SimState::new(rho, a, b_coeffs, c);
    if !state.is_finite() {
        return Err(Error::NonFinite("initial state"));
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::Truncation;
    use crate::spectral::{max_divergence, Field};
    use std::f64::consts::TAU;

    fn sys(k: usize) -> GalerkinSystem<f64> {
        GalerkinSystem::new(Default::default(), TAU, 8, Truncation::uniform(k, 0.0)).unwrap()
    }

    #[test]
    fn single_mode_decay_is_one_mode() {
        let s = sys(16);
        let ic = InitialConfig {
            family: Family::SingleModeDecay,
            magnetic: 0.3,
            ..Default::default()
        };
        let st = initial_state(&s, &ic, 0).unwrap();
        let nonzero: Vec<_> = st.c.iter().enumerate().filter(|(_, x)| x.abs() > 1e-12).collect();
        assert_eq!(nonzero.len(), 1);
        // ‖0.3 sin z‖ = 0.3 √(|Ω|/2)
        let expect = 0.3 * (TAU.powi(3) / 2.0).sqrt();
        assert!((nonzero[0].1.abs() - expect).abs() < 1e-12);
        assert!(st.a.iter().all(|&x| x == 0.0));
        assert!((st.b[0] - TAU.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn families_lie_in_low_modes_and_bounds() {
        let s = sys(32);
        for family in [
            Family::SingleModeMhd,
            Family::OrszagTang,
            Family::Layered,
            Family::RandomBandLimited,
        ] {
            let ic = InitialConfig {
                family,
                ..Default::default()
            };
            let st = initial_state(&s, &ic, 7).unwrap();
            let (lo, hi) = st.rho_bounds();
            assert!(lo >= 0.8 - 1e-12 && hi <= 1.2 + 1e-12, "{family:?} {lo} {hi}");
            let (u, _) = s.vector_field(&st.a);
            let f = Field::vector(s.basis().grid(), u).unwrap();
            assert!(max_divergence(s.basis(), &f).unwrap() < 1e-12);
        }
    }

    #[test]
    fn single_mode_mhd_lives_on_first_shell() {
        let st = initial_state(&sys(32), &InitialConfig::default(), 0).unwrap();
        assert!(st.a[12..].iter().chain(&st.c[12..]).all(|x| x.abs() < 1e-12));
        // u = U sin(x) ŷ is the sine mode along x with polarization −ŷ
        assert!(st.a[..11].iter().all(|x| x.abs() < 1e-12) && st.a[11] < 0.0);
        // H = B cos(z) x̂ is the cosine mode along z with polarization −x̂
        assert!(st.c[2] < 0.0);
        assert!(st.c[..12].iter().enumerate().all(|(i, x)| i == 2 || x.abs() < 1e-12));
    }

    #[test]
    fn random_family_is_seeded() {
        let s = sys(16);
        let ic = InitialConfig {
            family: Family::RandomBandLimited,
            ..Default::default()
        };
        let a = initial_state(&s, &ic, 3).unwrap();
        assert_eq!(a, initial_state(&s, &ic, 3).unwrap());
        assert_ne!(a, initial_state(&s, &ic, 4).unwrap());
    }
}
