//! Brute-force reference for the Galerkin operators. Every field is
//! evaluated by direct trigonometric sums on a dense `Q³` grid and every
//! projection is a plain quadrature against the mode functions; no FFT and
//! none of the spectral assembly code is involved.
//!
//! With `r = 4`, `α = 0`, constant coefficient forms and no temperature
//! clamping all integrands are trigonometric polynomials of degree below
//! `Q`, so the dense rule is exact and so is the `M³` rule of the solver.
//! The two must then agree to rounding.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constitutive::{heat_flux, q_of_theta, stress_tensor, ConstitutiveParams, SymTensor3};
use crate::error::Result;
use crate::galerkin::{GalerkinSystem, SimState};
use crate::spectral::{Trig, VectorMode};

/// Points per axis of the reference grid.
pub const ORACLE_GRID: usize = 16;

/// Parameters for which both quadratures are exact.
pub fn oracle_params() -> ConstitutiveParams<f64> {
    ConstitutiveParams {
        r: 4.0,
        alpha: 0.0,
        eps_const: 0.1,
        nu: 0.7,
        mu_low: 0.8,
        mu_high: 0.8,
        kappa_low: 0.3,
        kappa_high: 0.3,
        ..Default::default()
    }
}

/// Random coefficients of size `amplitude`, temperature mean 2 with small
/// fluctuations, and a band-limited density within `[0.7, 1.3]`.
pub fn random_band_limited_state(sys: &GalerkinSystem<f64>, seed: u64, amplitude: f64) -> SimState<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = sys.basis();
    let t = sys.truncation();
    let mut gen = |n: usize, s: f64| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-s..s)).collect() };
    let a = gen(t.k_u, amplitude);
    let c = gen(t.k_h, amplitude);
    let mut th = gen(t.k_theta, 0.05);
    if let Some(t0) = th.first_mut() {
        *t0 = 2.0 * b.volume().sqrt();
    }
    let w = gen(8, 0.06);
    let kappa = b.lowest_wavenumber();
    let mut rho: Vec<f64> = (0..b.points())
        .map(|i| {
            let x = b.node(i).map(|v| kappa * v);
            1.0 + w[0] * (x[0] + 10.0 * w[3]).cos()
                + w[1] * (2.0 * x[1] - x[2] + 10.0 * w[4]).cos()
                + w[2] * (x[0] + x[1] + 3.0 * x[2]).sin()
                + w[5] * (4.0 * x[2] - x[0]).cos()
                + w[6] * (x[1] + 10.0 * w[7]).sin()
        })
        .collect();
    sys.filter_density(&mut rho);
    SimState::new(rho, a, th, c)
}

/// Largest absolute deviation per compared quantity.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OracleReport {
    pub induction_matrix: f64,
    pub lorentz: f64,
    pub density_rate: f64,
    pub convection: f64,
    pub flux: f64,
    pub joule: f64,
    pub viscous: f64,
    pub storage: f64,
    /// Number of compared entries.
    pub entries: usize,
}

impl OracleReport {
    pub fn max(&self) -> f64 {
        [
            self.induction_matrix,
            self.lorentz,
            self.density_rate,
            self.convection,
            self.flux,
            self.joule,
            self.viscous,
            self.storage,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn trig(t: Trig, phase: f64) -> (f64, f64) {
    match t {
        Trig::Const => (1.0, 0.0),
        Trig::Cos => (phase.cos(), -phase.sin()),
        Trig::Sin => (phase.sin(), phase.cos()),
    }
}

type V3 = [f64; 3];
type M3 = [[f64; 3]; 3];

/// Value and gradient (`g[i][c] = ∂_i v_c`) of one vector mode.
fn vector_mode(m: &VectorMode<f64>, x: &V3) -> (V3, M3) {
    let phase = m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2];
    let (v, dv) = trig(m.trig, phase);
    let val = m.e.map(|e| m.norm * e * v);
    let grad = m.k.map(|ki| m.e.map(|e| m.norm * e * ki * dv));
    (val, grad)
}

/// Spectral content of a grid function, `f(x) = Σ f̂_n e^{iκn·x}`.
struct Series {
    kappa: f64,
    terms: Vec<([i32; 3], Complex<f64>)>,
}

impl Series {
    /// Direct DFT of uniform samples with `|n_i| <= cutoff`.
    fn analyze(values: &[f64], m: usize, length: f64, cutoff: i32) -> Self {
        let kappa = std::f64::consts::TAU / length;
        let h = length / m as f64;
        let axis: Vec<Vec<Complex<f64>>> = (-cutoff..=cutoff)
            .map(|n| (0..m).map(|i| Complex::from_polar(1.0, -kappa * n as f64 * h * i as f64)).collect())
            .collect();
        let c = cutoff as usize;
        let inv = 1.0 / (m * m * m) as f64;
        let mut terms = Vec::new();
        for n2 in -cutoff..=cutoff {
            for n1 in -cutoff..=cutoff {
                for n0 in -cutoff..=cutoff {
                    let (e0, e1, e2) = (
                        &axis[(n0 + cutoff) as usize],
                        &axis[(n1 + cutoff) as usize],
                        &axis[(n2 + cutoff) as usize],
                    );
                    let mut s = Complex::new(0.0, 0.0);
                    for k in 0..m {
                        for j in 0..m {
                            let ejk = e1[j] * e2[k];
                            for i in 0..m {
                                s += values[i + m * (j + m * k)] * e0[i] * ejk;
                            }
                        }
                    }
                    terms.push(([n0, n1, n2], s * inv));
                }
            }
        }
        debug_assert_eq!(terms.len(), (2 * c + 1).pow(3));
        Self { kappa, terms }
    }

    /// Value, gradient and Laplacian at `x`.
    fn eval(&self, x: &V3) -> (f64, V3, f64) {
        let (mut v, mut g, mut lap) = (0.0, [0.0; 3], 0.0);
        for (n, z) in &self.terms {
            let k = n.map(|c| self.kappa * c as f64);
            let e = *z * Complex::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            v += e.re;
            for d in 0..3 {
                // ∂_d e^{ik·x} = i k_d e^{ik·x}
                g[d] -= k[d] * e.im;
            }
            lap -= (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * e.re;
        }
        (v, g, lap)
    }
}

struct Point {
    x: V3,
    rho: f64,
    grad_rho: V3,
    lap_rho: f64,
    u: V3,
    grad_u: M3,
    h: V3,
    grad_h: M3,
    theta: f64,
    grad_theta: V3,
}

fn add_vector(modes: &[VectorMode<f64>], coeffs: &[f64], x: &V3) -> (V3, M3) {
    let (mut v, mut g) = ([0.0; 3], [[0.0; 3]; 3]);
    for (m, &a) in modes.iter().zip(coeffs) {
        let (mv, mg) = vector_mode(m, x);
        for c in 0..3 {
            v[c] += a * mv[c];
            for i in 0..3 {
                g[i][c] += a * mg[i][c];
            }
        }
    }
    (v, g)
}

fn curl(g: &M3) -> V3 {
    [g[1][2] - g[2][1], g[2][0] - g[0][2], g[0][1] - g[1][0]]
}

fn cross(a: &V3, b: &V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Compares the solver's induction matrix, Lorentz projection, density
/// rate and thermal source projections at `state` with the dense
/// reference.
pub fn operator_oracle(sys: &GalerkinSystem<f64>, state: &SimState<f64>) -> Result<OracleReport> {
    let b = sys.basis();
    let p = sys.params();
    let t = sys.truncation();
    let q = ORACLE_GRID;
    let length = b.length();
    let hq = length / q as f64;
    let w = b.volume() / (q * q * q) as f64;
    let vm = b.vector_modes();
    let sm = b.scalar_modes();
    let cut = b.dealias_cutoff();
    let rho_series = Series::analyze(&state.rho, b.grid(), length, cut);

    let points: Vec<Point> = (0..q * q * q)
        .map(|idx| {
            let x = [idx % q, (idx / q) % q, idx / (q * q)].map(|i| hq * i as f64);
            let (rho, grad_rho, lap_rho) = rho_series.eval(&x);
            let (u, grad_u) = add_vector(&vm[..t.k_u], &state.a, &x);
            let (h, grad_h) = add_vector(&vm[..t.k_h], &state.c, &x);
            let (mut theta, mut grad_theta) = (0.0, [0.0; 3]);
            for (m, &c) in sm[..t.k_theta].iter().zip(&state.b) {
                let (v, dv) = trig(m.trig, dot(&m.k, &x));
                theta += c * m.norm * v;
                for d in 0..3 {
                    grad_theta[d] += c * m.norm * m.k[d] * dv;
                }
            }
            Point {
                x,
                rho,
                grad_rho,
                lap_rho,
                u,
                grad_u,
                h,
                grad_h,
                theta,
                grad_theta,
            }
        })
        .collect();

    let ev = sys.evaluate(state)?;
    let mut rep = OracleReport::default();

    // induction matrix, column by column
    let sys_a = sys.induction_matrix(&ev);
    let kh = t.k_h;
    let mut dense = vec![0.0; kh * kh];
    for pt in &points {
        let div = pt.grad_u[0][0] + pt.grad_u[1][1] + pt.grad_u[2][2];
        let modes: Vec<(V3, M3)> = vm[..kh].iter().map(|m| vector_mode(m, &pt.x)).collect();
        for (i, (wi, gwi)) in modes.iter().enumerate() {
            let mut v = [0.0; 3];
            for c in 0..3 {
                v[c] = div * wi[c];
                for d in 0..3 {
                    v[c] += pt.u[d] * gwi[d][c] - wi[d] * pt.grad_u[d][c];
                }
            }
            for (j, (wj, _)) in modes.iter().enumerate() {
                dense[j * kh + i] += w * dot(&v, wj);
            }
        }
    }
    for i in 0..kh {
        dense[i * kh + i] += p.nu * vm[i].wavenumber_sqr();
    }
    rep.induction_matrix = max_dev(&dense, sys_a.as_slice());
    rep.entries += kh * kh;

    // Lorentz projection
    let sign = sys.lorentz_sign();
    let mut lorentz = vec![0.0; t.k_u];
    for pt in &points {
        let f = cross(&curl(&pt.grad_h), &pt.h);
        for (j, m) in vm[..t.k_u].iter().enumerate() {
            lorentz[j] += sign * w * dot(&f, &vector_mode(m, &pt.x).0);
        }
    }
    rep.lorentz = max_dev(&lorentz, &sys.momentum_terms(&ev).lorentz);
    rep.entries += t.k_u;

    // density rate: −div(ρu) + εΔρ, band-limited; div u is kept
    let eps = t.eps_density;
    let raw: Vec<f64> = points
        .iter()
        .map(|pt| {
            let div = pt.grad_u[0][0] + pt.grad_u[1][1] + pt.grad_u[2][2];
            -(dot(&pt.grad_rho, &pt.u) + pt.rho * div) + eps * pt.lap_rho
        })
        .collect();
    let rate = Series::analyze(&raw, q, length, cut);
    let rho_t: Vec<f64> = points.iter().map(|pt| rate.eval(&pt.x).0).collect();
    let sys_rate = sys.density_rhs(&ev);
    rep.density_rate = (0..b.points())
        .map(|g| (rate.eval(&b.node(g)).0 - sys_rate[g]).abs())
        .fold(0.0, f64::max);
    rep.entries += b.points();

    // thermal sources
    let kt = t.k_theta;
    let (mut conv, mut flux, mut joule, mut visc, mut store) =
        (vec![0.0; kt], vec![0.0; kt], vec![0.0; kt], vec![0.0; kt], vec![0.0; kt]);
    for (pt, &rt) in points.iter().zip(&rho_t) {
        let th = pt.theta.max(p.theta_low);
        let q_th = q_of_theta(p, th);
        let qf = heat_flux(p, pt.rho, th, &pt.grad_theta)?;
        let j = curl(&pt.grad_h);
        let jj = p.nu * dot(&j, &j);
        let d = SymTensor3::strain_from_gradient(&pt.grad_u);
        let s = stress_tensor(p, pt.rho, th, &d)?;
        let sd = s.ddot(&d);
        for (k, m) in sm[..kt].iter().enumerate() {
            let (v, dv) = trig(m.trig, dot(&m.k, &pt.x));
            let om = m.norm * v;
            let grad_om = m.k.map(|kd| m.norm * kd * dv);
            conv[k] += w * pt.rho * q_th * dot(&pt.u, &grad_om);
            flux[k] += w * dot(&qf, &grad_om);
            joule[k] += w * jj * om;
            visc[k] += w * sd * om;
            store[k] += w * rt * q_th * om;
        }
    }
    let terms = sys.thermal_terms(&ev, &sys_rate)?;
    rep.convection = max_dev(&conv, &terms.convection);
    rep.flux = max_dev(&flux, &terms.flux);
    rep.joule = max_dev(&joule, &terms.joule);
    rep.viscous = max_dev(&visc, &terms.viscous);
    rep.storage = max_dev(&store, &terms.storage);
    rep.entries += 5 * kt;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::Truncation;

    #[test]
    fn solver_matches_dense_reference() {
        let sys =
            GalerkinSystem::new(oracle_params(), std::f64::consts::TAU, 8, Truncation::uniform(12, 2e-3)).unwrap();
        let st = random_band_limited_state(&sys, 11, 0.4);
        assert_eq!(sys.clamp_count(&st), 0);
        let rep = operator_oracle(&sys, &st).unwrap();
        assert!(rep.max() < 1e-10, "{rep:?}");
    }
}
