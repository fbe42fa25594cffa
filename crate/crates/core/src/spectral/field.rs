//! Sampled fields and the spectral operators acting on them.
//!
//! Spectral payloads hold Fourier coefficients normalized so that
//! `f(x) = Σ_m f̂(m) e^{i m·x}`, i.e. the forward FFT divided by `M³`.

use num_complex::Complex;

use super::basis::SpectralBasis;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rank {
    Scalar,
    Vector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Grid,
    Spectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffOp {
    Grad,
    Div,
    Curl,
}

#[derive(Clone, Debug, PartialEq)]
enum Payload<T> {
    Grid(Vec<Vec<T>>),
    Spectral(Vec<Vec<Complex<T>>>),
}

/// A scalar or vector field on the `M³` quadrature grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: usize,
    payload: Payload<T>,
}

impl<T: Real> Field<T> {
    pub fn scalar(grid: usize, values: Vec<T>) -> Result<Self> {
        Self::from_components(grid, vec![values])
    }

    pub fn vector(grid: usize, values: [Vec<T>; 3]) -> Result<Self> {
        Self::from_components(grid, values.into())
    }

    fn from_components(grid: usize, comps: Vec<Vec<T>>) -> Result<Self> {
        let n = grid * grid * grid;
        if let Some(c) = comps.iter().find(|c| c.len() != n) {
            return Err(Error::ResolutionMismatch(c.len(), n));
        }
        Ok(Self {
            grid,
            payload: Payload::Grid(comps),
        })
    }

    pub fn zeros(grid: usize, rank: Rank) -> Self {
        let n = grid * grid * grid;
        let comps = match rank {
            Rank::Scalar => 1,
            Rank::Vector => 3,
        };
        Self {
            grid,
            payload: Payload::Grid(vec![vec![T::zero(); n]; comps]),
        }
    }

    /// Samples `f` at the grid nodes of `basis`.
    pub fn scalar_from_fn(basis: &SpectralBasis<T>, f: impl Fn([T; 3]) -> T) -> Self {
        let values = (0..basis.points()).map(|i| f(basis.node(i))).collect();
        Self {
            grid: basis.grid(),
            payload: Payload::Grid(vec![values]),
        }
    }

    pub fn vector_from_fn(basis: &SpectralBasis<T>, f: impl Fn([T; 3]) -> [T; 3]) -> Self {
        let mut comps = vec![Vec::with_capacity(basis.points()); 3];
        for i in 0..basis.points() {
            let v = f(basis.node(i));
            for c in 0..3 {
                comps[c].push(v[c]);
            }
        }
        Self {
            grid: basis.grid(),
            payload: Payload::Grid(comps),
        }
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn rank(&self) -> Rank {
        if self.components() == 1 {
            Rank::Scalar
        } else {
            Rank::Vector
        }
    }

    pub fn components(&self) -> usize {
        match &self.payload {
            Payload::Grid(c) => c.len(),
            Payload::Spectral(c) => c.len(),
        }
    }

    pub fn representation(&self) -> Representation {
        match self.payload {
            Payload::Grid(_) => Representation::Grid,
            Payload::Spectral(_) => Representation::Spectral,
        }
    }

    /// Grid samples of component `c`, if the field is in grid form.
    pub fn values(&self, c: usize) -> Option<&[T]> {
        match &self.payload {
            Payload::Grid(v) => v.get(c).map(|x| x.as_slice()),
            Payload::Spectral(_) => None,
        }
    }

    pub fn coefficients(&self, c: usize) -> Option<&[Complex<T>]> {
        match &self.payload {
            Payload::Spectral(v) => v.get(c).map(|x| x.as_slice()),
            Payload::Grid(_) => None,
        }
    }

    fn check_basis(&self, basis: &SpectralBasis<T>) -> Result<()> {
        if self.grid != basis.grid() {
            return Err(Error::ResolutionMismatch(self.grid, basis.grid()));
        }
        Ok(())
    }

    pub fn to_spectral(&self, basis: &SpectralBasis<T>) -> Result<Self> {
        self.check_basis(basis)?;
        let payload = match &self.payload {
            Payload::Spectral(_) => return Ok(self.clone()),
            Payload::Grid(comps) => {
                let scale = T::from_usize_lossy(basis.points()).recip();
                Payload::Spectral(
                    comps
                        .iter()
                        .map(|f| basis.analyze(f).into_iter().map(|z| z * scale).collect())
                        .collect(),
                )
            }
        };
        Ok(Self {
            grid: self.grid,
            payload,
        })
    }

    pub fn to_grid(&self, basis: &SpectralBasis<T>) -> Result<Self> {
        self.check_basis(basis)?;
        let payload = match &self.payload {
            Payload::Grid(_) => return Ok(self.clone()),
            Payload::Spectral(comps) => {
                Payload::Grid(comps.iter().map(|s| basis.synthesize(s)).collect())
            }
        };
        Ok(Self {
            grid: self.grid,
            payload,
        })
    }

    fn spectral_components(&self, basis: &SpectralBasis<T>) -> Result<Vec<Vec<Complex<T>>>> {
        match self.to_spectral(basis)?.payload {
            Payload::Spectral(c) => Ok(c),
            Payload::Grid(_) => unreachable!(),
        }
    }

    fn grid_components(&self, basis: &SpectralBasis<T>) -> Result<Vec<Vec<T>>> {
        match self.to_grid(basis)?.payload {
            Payload::Grid(c) => Ok(c),
            Payload::Spectral(_) => unreachable!(),
        }
    }

    fn spectral(grid: usize, comps: Vec<Vec<Complex<T>>>) -> Self {
        Self {
            grid,
            payload: Payload::Spectral(comps),
        }
    }

    /// Converts back to the representation of `like`.
    fn in_representation_of(self, basis: &SpectralBasis<T>, like: &Self) -> Result<Self> {
        match like.representation() {
            Representation::Grid => self.to_grid(basis),
            Representation::Spectral => self.to_spectral(basis),
        }
    }
}

/// Spectral derivative. Nyquist symbols are zeroed so `D` is skew and the
/// identities `curl ∘ grad = 0`, `div ∘ curl = 0` hold to rounding.
pub fn differentiate<T: Real>(basis: &SpectralBasis<T>, f: &Field<T>, op: DiffOp) -> Result<Field<T>> {
    let s = f.spectral_components(basis)?;
    let ik = |idx: usize, a: usize, z: Complex<T>| {
        let k = basis.symbol_vec(idx)[a];
        Complex::new(-z.im * k, z.re * k)
    };
    let n = basis.points();
    let out = match (op, f.rank()) {
        (DiffOp::Grad, Rank::Scalar) => (0..3)
            .map(|a| (0..n).map(|i| ik(i, a, s[0][i])).collect())
            .collect(),
        (DiffOp::Div, Rank::Vector) => {
            vec![(0..n)
                .map(|i| ik(i, 0, s[0][i]) + ik(i, 1, s[1][i]) + ik(i, 2, s[2][i]))
                .collect()]
        }
        (DiffOp::Curl, Rank::Vector) => (0..3)
            .map(|c| {
                let (a, b) = ((c + 1) % 3, (c + 2) % 3);
                (0..n).map(|i| ik(i, a, s[b][i]) - ik(i, b, s[a][i])).collect()
            })
            .collect(),
        (DiffOp::Grad, Rank::Vector) => return Err(Error::RankMismatch("grad expects a scalar field")),
        (_, Rank::Scalar) => return Err(Error::RankMismatch("div and curl expect a vector field")),
    };
    Field::spectral(f.grid, out).in_representation_of(basis, f)
}

/// Divergence-free part: `v̂ ↦ v̂ − (k·v̂) k / |k|²`, mean preserved.
pub fn leray_project<T: Real>(basis: &SpectralBasis<T>, v: &Field<T>) -> Result<Field<T>> {
    if v.rank() != Rank::Vector {
        return Err(Error::RankMismatch("leray projection expects a vector field"));
    }
    let mut s = v.spectral_components(basis)?;
    for i in 0..basis.points() {
        let k = basis.symbol_vec(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == T::zero() {
            continue;
        }
        let kv = s[0][i] * k[0] + s[1][i] * k[1] + s[2][i] * k[2];
        for c in 0..3 {
            let d = kv * (k[c] / k2);
            s[c][i] -= d;
        }
    }
    Field::spectral(v.grid, s).in_representation_of(basis, v)
}

/// Quadrature `∫ f·g dx` with the uniform grid rule.
pub fn inner_product<T: Real>(basis: &SpectralBasis<T>, f: &Field<T>, g: &Field<T>) -> Result<T> {
    if f.grid != g.grid {
        return Err(Error::ResolutionMismatch(f.grid, g.grid));
    }
    if f.components() != g.components() {
        return Err(Error::RankMismatch("inner product of scalar and vector"));
    }
    let fa = f.grid_components(basis)?;
    let ga = g.grid_components(basis)?;
    let s: T = fa
        .iter()
        .zip(&ga)
        .map(|(x, y)| x.iter().zip(y).map(|(&a, &b)| a * b).sum::<T>())
        .sum();
    Ok(s * basis.weight())
}

/// Zeroes every coefficient with some `|n_i| > 2 K_c`.
pub fn dealias<T: Real>(basis: &SpectralBasis<T>, f: &Field<T>) -> Result<Field<T>> {
    let mut s = f.spectral_components(basis)?;
    let cut = basis.dealias_cutoff();
    for comp in &mut s {
        for (i, z) in comp.iter_mut().enumerate() {
            if !basis.within_band(i, cut) {
                *z = Complex::new(T::zero(), T::zero());
            }
        }
    }
    Field::spectral(f.grid, s).in_representation_of(basis, f)
}

/// `Σ_m |f̂(m)|² · |Ω|`, the spectral side of Parseval.
pub fn spectral_norm_sqr<T: Real>(basis: &SpectralBasis<T>, f: &Field<T>) -> Result<T> {
    let s = f.spectral_components(basis)?;
    let sum: T = s.iter().flat_map(|c| c.iter()).map(|z| z.norm_sqr()).sum();
    Ok(sum * basis.volume())
}

/// Max |div v| on the grid.
pub fn max_divergence<T: Real>(basis: &SpectralBasis<T>, v: &Field<T>) -> Result<T> {
    let d = differentiate(basis, v, DiffOp::Div)?.to_grid(basis)?;
    Ok(crate::scalar::max_abs(d.values(0).unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::basis::build_basis;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis() -> SpectralBasis<f64> {
        build_basis(2.0, 8, 8, 3).unwrap()
    }

    /// Band-limited random vector field (not solenoidal).
    fn random_vector(b: &SpectralBasis<f64>, seed: u64) -> Field<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = std::f64::consts::TAU / b.length();
        let terms: Vec<([f64; 3], [f64; 3], [f64; 3])> = (0..6)
            .map(|_| {
                let n = [0; 3].map(|_| rng.gen_range(-2i32..=2) as f64 * t);
                let a = [0; 3].map(|_| rng.gen_range(-1.0..1.0));
                let c = [0; 3].map(|_| rng.gen_range(-1.0..1.0));
                (n, a, c)
            })
            .collect();
        Field::vector_from_fn(b, |x| {
            let mut v = [0.0; 3];
            for (n, a, c) in &terms {
                let p = n[0] * x[0] + n[1] * x[1] + n[2] * x[2];
                for i in 0..3 {
                    v[i] += a[i] * p.cos() + c[i] * p.sin();
                }
            }
            v
        })
    }

    fn max_diff(b: &SpectralBasis<f64>, f: &Field<f64>, g: &Field<f64>) -> f64 {
        let f = f.to_grid(b).unwrap();
        let g = g.to_grid(b).unwrap();
        (0..f.components())
            .flat_map(|c| {
                f.values(c)
                    .unwrap()
                    .iter()
                    .zip(g.values(c).unwrap())
                    .map(|(x, y)| (x - y).abs())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn single_mode_derivative() {
        let b = basis();
        let k = std::f64::consts::TAU / b.length();
        let f = Field::scalar_from_fn(&b, |x| (k * x[0]).sin());
        let g = differentiate(&b, &f, DiffOp::Grad).unwrap();
        let expect = Field::vector_from_fn(&b, |x| [k * (k * x[0]).cos(), 0.0, 0.0]);
        assert!(max_diff(&b, &g, &expect) < 1e-12);
    }

    #[test]
    fn projector_examples() {
        let b = basis();
        let k = std::f64::consts::TAU / b.length();
        // v̂ = (1,1,0) on k ∝ x̂
        let v = Field::vector_from_fn(&b, |x| [(k * x[0]).cos(), (k * x[0]).cos(), 0.0]);
        let p = leray_project(&b, &v).unwrap();
        let expect = Field::vector_from_fn(&b, |x| [0.0, (k * x[0]).cos(), 0.0]);
        assert!(max_diff(&b, &p, &expect) < 1e-12);
        // gradient kernel
        let phi = Field::scalar_from_fn(&b, |x| (k * x[1]).sin() * (2.0 * k * x[2]).cos());
        let g = differentiate(&b, &phi, DiffOp::Grad).unwrap();
        let pg = leray_project(&b, &g).unwrap();
        assert!(max_diff(&b, &pg, &Field::zeros(b.grid(), Rank::Vector)) < 1e-12);
        // constant mean is kept
        let c = Field::vector_from_fn(&b, |_| [1.0, 2.0, 3.0]);
        assert!(max_diff(&b, &leray_project(&b, &c).unwrap(), &c) < 1e-14);
    }

    #[test]
    fn sine_norm() {
        let b = basis();
        let k = std::f64::consts::TAU / b.length();
        let f = Field::scalar_from_fn(&b, |x| (k * x[0]).sin());
        let ip = inner_product(&b, &f, &f).unwrap();
        assert!((ip - b.volume() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank_errors() {
        let b = basis();
        let f = Field::zeros(b.grid(), Rank::Scalar);
        assert!(differentiate(&b, &f, DiffOp::Curl).is_err());
        let v = Field::zeros(b.grid(), Rank::Vector);
        assert!(differentiate(&b, &v, DiffOp::Grad).is_err());
        assert!(inner_product(&b, &f, &v).is_err());
        let other = Field::zeros(10, Rank::Scalar);
        assert!(matches!(inner_product(&b, &f, &other), Err(Error::ResolutionMismatch(..))));
    }

    #[test]
    fn dealias_zeroes_high_mode() {
        let b = basis();
        let k = std::f64::consts::TAU / b.length();
        let low = Field::scalar_from_fn(&b, |x| (2.0 * k * x[0]).cos());
        assert!(max_diff(&b, &dealias(&b, &low).unwrap(), &low) < 1e-13);
        let high = Field::scalar_from_fn(&b, |x| (5.0 * k * x[1]).sin());
        let d = dealias(&b, &high).unwrap();
        assert!(max_diff(&b, &d, &Field::zeros(b.grid(), Rank::Scalar)) < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn round_trip_and_parseval(seed in any::<u64>()) {
            let b = basis();
            let v = random_vector(&b, seed);
            let back = v.to_spectral(&b).unwrap().to_grid(&b).unwrap();
            prop_assert!(max_diff(&b, &v, &back) < 1e-12);
            let grid = inner_product(&b, &v, &v).unwrap();
            let spec = spectral_norm_sqr(&b, &v).unwrap();
            prop_assert!((grid - spec).abs() <= 1e-10 * grid.max(1.0));
        }

        #[test]
        fn vector_calculus_identities(seed in any::<u64>()) {
            let b = basis();
            let v = random_vector(&b, seed);
            let curl = differentiate(&b, &v, DiffOp::Curl).unwrap();
            prop_assert!(max_divergence(&b, &curl).unwrap() < 1e-12);
            let phi = differentiate(&b, &v, DiffOp::Div).unwrap();
            let g = differentiate(&b, &phi, DiffOp::Grad).unwrap();
            let cg = differentiate(&b, &g, DiffOp::Curl).unwrap();
            prop_assert!(max_diff(&b, &cg, &Field::zeros(b.grid(), Rank::Vector)) < 1e-11);
        }

        #[test]
        fn leray_is_orthogonal_projector(s1 in any::<u64>(), s2 in any::<u64>()) {
            let b = basis();
            let v = random_vector(&b, s1);
            let w = random_vector(&b, s2);
            let pv = leray_project(&b, &v).unwrap();
            let ppv = leray_project(&b, &pv).unwrap();
            prop_assert!(max_diff(&b, &pv, &ppv) < 1e-12);
            prop_assert!(max_divergence(&b, &pv).unwrap() < 1e-12);
            let pw = leray_project(&b, &w).unwrap();
            let lhs = inner_product(&b, &pv, &w).unwrap();
            let rhs = inner_product(&b, &v, &pw).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10);
            // curl commutes with the projector
            let a = differentiate(&b, &pv, DiffOp::Curl).unwrap();
            let c = leray_project(&b, &differentiate(&b, &v, DiffOp::Curl).unwrap()).unwrap();
            prop_assert!(max_diff(&b, &a, &c) < 1e-11);
        }

        #[test]
        fn inner_product_symmetric(s1 in any::<u64>(), s2 in any::<u64>()) {
            let b = basis();
            let v = random_vector(&b, s1);
            let w = random_vector(&b, s2);
            let d = inner_product(&b, &v, &w).unwrap() - inner_product(&b, &w, &v).unwrap();
            prop_assert!(d.abs() < 1e-12);
        }

        #[test]
        fn dealias_idempotent(seed in any::<u64>()) {
            let b = basis();
            let v = random_vector(&b, seed);
            let sq = Field::vector(b.grid(), [0, 1, 2].map(|c| {
                v.values(c).unwrap().iter().map(|x| x * x * x).collect()
            })).unwrap();
            let d1 = dealias(&b, &sq).unwrap();
            let d2 = dealias(&b, &d1).unwrap();
            prop_assert!(max_diff(&b, &d1, &d2) < 1e-12);
        }
    }
}
