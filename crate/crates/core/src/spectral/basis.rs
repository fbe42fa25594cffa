//! Real trigonometric bases on the periodic box `[0, L)³`.
//!
//! Wavevectors are `k = (2π/L) n` with integer `n` in the half space (first
//! nonzero component positive), restricted by the 2/3 rule on the base
//! resolution `N`: `max |n_i| < N/3`. Each such `n` carries two unit
//! polarizations orthogonal to `n` and a cos/sin pair, giving four
//! divergence-free vector modes; scalar modes are the cos/sin pair plus an
//! optional constant.
//!
//! Fields are sampled on the quadrature grid of `M ≥ 3N/2` points per axis.
//! The uniform rule on that grid integrates every product of up to four
//! basis-band trigonometric factors exactly, so all mode inner products
//! below are exact up to rounding when the integrand is polynomial.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::fft::Fft3;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::{cross3, dot3, Real, Vec3};

/// Bumped whenever the deterministic mode ordering changes.
pub const MODE_ORDERING_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trig {
    Const,
    Cos,
    Sin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarFamily {
    #[default]
    WithMean,
    ZeroMean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarMode<T> {
    pub n: [i32; 3],
    pub k: Vec3<T>,
    pub trig: Trig,
    pub norm: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorMode<T> {
    pub n: [i32; 3],
    pub k: Vec3<T>,
    pub trig: Trig,
    pub polarization: usize,
    /// Unit polarization, orthogonal to `k`.
    pub e: Vec3<T>,
    pub norm: T,
}

impl<T: Real> ScalarMode<T> {
    pub fn wavenumber_sqr(&self) -> T {
        dot3(&self.k, &self.k)
    }
}

impl<T: Real> VectorMode<T> {
    pub fn wavenumber_sqr(&self) -> T {
        dot3(&self.k, &self.k)
    }
}

#[derive(Clone, Debug)]
pub struct SpectralBasis<T: Real> {
    length: T,
    resolution: usize,
    grid: usize,
    cutoff: i32,
    available_reps: usize,
    vector_modes: Vec<VectorMode<T>>,
    scalar_modes: Vec<ScalarMode<T>>,
    scalar_family: ScalarFamily,
    symbols: Vec<T>,
    fft: Fft3<T>,
}

/// Band limit `K_c` for base resolution `N`: the largest integer below `N/3`.
pub fn band_limit(resolution: usize) -> i32 {
    (resolution as i32 + 2) / 3 - 1
}

/// Quadrature grid size: the smallest even integer `≥ 3N/2`.
pub fn quadrature_grid(resolution: usize) -> usize {
    let m = (3 * resolution).div_ceil(2);
    m + m % 2
}

fn half_space_reps(cutoff: i32) -> Vec<[i32; 3]> {
    let mut reps = Vec::new();
    for x in -cutoff..=cutoff {
        for y in -cutoff..=cutoff {
            for z in -cutoff..=cutoff {
                let n = [x, y, z];
                let first = n.iter().copied().find(|&c| c != 0);
                if matches!(first, Some(c) if c > 0) {
                    reps.push(n);
                }
            }
        }
    }
    reps.sort_by_key(|n| (n[0] * n[0] + n[1] * n[1] + n[2] * n[2], *n));
    reps
}

fn polarizations<T: Real>(n: [i32; 3]) -> [Vec3<T>; 2] {
    let nv: Vec3<T> = n.map(|c| T::from_i32(c).unwrap());
    let mut axis = 0;
    for i in 1..3 {
        if n[i].abs() < n[axis].abs() {
            axis = i;
        }
    }
    let mut a = [T::zero(); 3];
    a[axis] = T::one();
    let unit = |v: Vec3<T>| {
        let s = dot3(&v, &v).sqrt();
        v.map(|c| c / s)
    };
    let e1 = unit(cross3(&nv, &a));
    let e2 = unit(cross3(&nv, &e1));
    [e1, e2]
}

impl<T: Real> SpectralBasis<T> {
    /// Builds `vector_count` divergence-free modes and `scalar_count` scalar
    /// modes in the deterministic order: `|n|`, then lexicographic `n`, then
    /// polarization, then cos before sin.
    pub fn new(
        length: T,
        resolution: usize,
        vector_count: usize,
        scalar_count: usize,
        scalar_family: ScalarFamily,
    ) -> Result<Self> {
        if resolution < 4 || resolution % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "resolution must be even and at least 4, got {resolution}"
            )));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidGrid("box length must be positive".into()));
        }
        let cutoff = band_limit(resolution);
        let grid = quadrature_grid(resolution);
        let reps = half_space_reps(cutoff);
        let available_vec = 4 * reps.len();
        let available_sca = 2 * reps.len() + usize::from(scalar_family == ScalarFamily::WithMean);
        if vector_count > available_vec {
            return Err(Error::InsufficientResolution {
                family: "vector",
                requested: vector_count,
                available: available_vec,
                resolution,
            });
        }
        if scalar_count > available_sca {
            return Err(Error::InsufficientResolution {
                family: "scalar",
                requested: scalar_count,
                available: available_sca,
                resolution,
            });
        }
        let two_pi_over_l = T::TAU() / length;
        let volume = length * length * length;
        let wave_norm = (T::lit(2.0) / volume).sqrt();
        let wave = |n: [i32; 3]| n.map(|c| two_pi_over_l * T::from_i32(c).unwrap());

        let mut vector_modes = Vec::with_capacity(vector_count);
        'outer: for &n in &reps {
            let pols = polarizations::<T>(n);
            for (p, e) in pols.iter().enumerate() {
                for trig in [Trig::Cos, Trig::Sin] {
                    if vector_modes.len() == vector_count {
                        break 'outer;
                    }
                    vector_modes.push(VectorMode {
                        n,
                        k: wave(n),
                        trig,
                        polarization: p,
                        e: *e,
                        norm: wave_norm,
                    });
                }
            }
        }

        let mut scalar_modes = Vec::with_capacity(scalar_count);
        if scalar_family == ScalarFamily::WithMean && scalar_count > 0 {
            scalar_modes.push(ScalarMode {
                n: [0; 3],
                k: [T::zero(); 3],
                trig: Trig::Const,
                norm: volume.sqrt().recip(),
            });
        }
        'outer_s: for &n in &reps {
            for trig in [Trig::Cos, Trig::Sin] {
                if scalar_modes.len() == scalar_count {
                    break 'outer_s;
                }
                scalar_modes.push(ScalarMode {
                    n,
                    k: wave(n),
                    trig,
                    norm: wave_norm,
                });
            }
        }

        let half = grid as i32 / 2;
        let symbols = (0..grid)
            .map(|i| {
                let f = i as i32;
                let m = if f < half {
                    f
                } else if f == half {
                    0
                } else {
                    f - grid as i32
                };
                two_pi_over_l * T::from_i32(m).unwrap()
            })
            .collect();

        Ok(Self {
            length,
            resolution,
            grid,
            cutoff,
            available_reps: reps.len(),
            vector_modes,
            scalar_modes,
            scalar_family,
            symbols,
            fft: Fft3::new(grid),
        })
    }

    pub fn length(&self) -> T {
        self.length
    }

    /// Base resolution `N`.
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Quadrature grid points per axis, `M`.
    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn points(&self) -> usize {
        self.grid * self.grid * self.grid
    }

    /// Largest `|n_i|` carried by any basis mode.
    pub fn cutoff(&self) -> i32 {
        self.cutoff
    }

    /// Grid fields are filtered to `max |n_i| ≤ 2 K_c`, which still holds
    /// every product of two basis-band fields.
    pub fn dealias_cutoff(&self) -> i32 {
        2 * self.cutoff
    }

    pub fn volume(&self) -> T {
        self.length * self.length * self.length
    }

    /// Uniform quadrature weight `|Ω| / M³`.
    pub fn weight(&self) -> T {
        self.volume() / T::from_usize_lossy(self.points())
    }

    pub fn vector_modes(&self) -> &[VectorMode<T>] {
        &self.vector_modes
    }

    pub fn scalar_modes(&self) -> &[ScalarMode<T>] {
        &self.scalar_modes
    }

    pub fn scalar_family(&self) -> ScalarFamily {
        self.scalar_family
    }

    pub fn available_vector_modes(&self) -> usize {
        4 * self.available_reps
    }

    pub fn available_scalar_modes(&self) -> usize {
        2 * self.available_reps + usize::from(self.scalar_family == ScalarFamily::WithMean)
    }

    pub fn fft(&self) -> &Fft3<T> {
        &self.fft
    }

    /// Lowest nonzero wavenumber `2π/L`.
    pub fn lowest_wavenumber(&self) -> T {
        T::TAU() / self.length
    }

    /// Derivative symbol along one axis for FFT index `i` (Nyquist → 0).
    #[inline]
    pub fn symbol(&self, i: usize) -> T {
        self.symbols[i]
    }

    /// Signed integer frequency for FFT index `i`; Nyquist maps to `+M/2`.
    #[inline]
    pub fn frequency(&self, i: usize) -> i32 {
        let m = self.grid as i32;
        let f = i as i32;
        if f <= m / 2 {
            f
        } else {
            f - m
        }
    }

    #[inline]
    fn wrap(&self, c: i32) -> usize {
        c.rem_euclid(self.grid as i32) as usize
    }

    #[inline]
    pub fn flat_index(&self, n: [i32; 3]) -> usize {
        let m = self.grid;
        self.wrap(n[0]) + m * (self.wrap(n[1]) + m * self.wrap(n[2]))
    }

    #[inline]
    pub fn unflatten(&self, idx: usize) -> [usize; 3] {
        let m = self.grid;
        [idx % m, (idx / m) % m, idx / (m * m)]
    }

    pub fn node(&self, idx: usize) -> Vec3<T> {
        let h = self.length / T::from_usize_lossy(self.grid);
        self.unflatten(idx).map(|i| h * T::from_usize_lossy(i))
    }

    /// Derivative symbol vector `(k_x, k_y, k_z)` at flat index `idx`.
    #[inline]
    pub fn symbol_vec(&self, idx: usize) -> Vec3<T> {
        self.unflatten(idx).map(|i| self.symbols[i])
    }

    /// True if every `|n_i|` at `idx` is within `cutoff`.
    #[inline]
    pub fn within_band(&self, idx: usize, cutoff: i32) -> bool {
        self.unflatten(idx)
            .iter()
            .all(|&i| self.frequency(i).abs() <= cutoff)
    }

    pub fn zero_spectrum(&self) -> Vec<Complex<T>> {
        vec![Complex::new(T::zero(), T::zero()); self.points()]
    }

    /// Adds `amp · trig(n·x)` to an unnormalized synthesis spectrum.
    #[inline]
    pub fn add_to_spectrum(&self, spec: &mut [Complex<T>], n: [i32; 3], trig: Trig, amp: T) {
        let h = amp * T::lit(0.5);
        match trig {
            Trig::Const => spec[0].re += amp,
            Trig::Cos => {
                spec[self.flat_index(n)].re += h;
                spec[self.flat_index(n.map(|c| -c))].re += h;
            }
            Trig::Sin => {
                spec[self.flat_index(n)].im -= h;
                spec[self.flat_index(n.map(|c| -c))].im += h;
            }
        }
    }

    /// `Σ_g f_g trig(n·x_g)` from a forward (unnormalized) spectrum of `f`.
    #[inline]
    pub fn trig_sum(&self, spec: &[Complex<T>], n: [i32; 3], trig: Trig) -> T {
        match trig {
            Trig::Const => spec[0].re,
            Trig::Cos => spec[self.flat_index(n)].re,
            Trig::Sin => -spec[self.flat_index(n)].im,
        }
    }

    /// `Σ_g f_g trig'(n·x_g)` where `cos' = −sin`, `sin' = cos`.
    #[inline]
    pub fn dtrig_sum(&self, spec: &[Complex<T>], n: [i32; 3], trig: Trig) -> T {
        match trig {
            Trig::Const => T::zero(),
            Trig::Cos => spec[self.flat_index(n)].im,
            Trig::Sin => spec[self.flat_index(n)].re,
        }
    }

    /// Synthesis spectra (per component) of `Σ_j a_j ψ_j` over the first
    /// `coeffs.len()` vector modes.
    pub fn vector_spectrum(&self, coeffs: &[T]) -> [Vec<Complex<T>>; 3] {
        let mut spec = [self.zero_spectrum(), self.zero_spectrum(), self.zero_spectrum()];
        for (mode, &a) in self.vector_modes.iter().zip(coeffs) {
            for (c, s) in spec.iter_mut().enumerate() {
                let amp = a * mode.norm * mode.e[c];
                if amp != T::zero() {
                    self.add_to_spectrum(s, mode.n, mode.trig, amp);
                }
            }
        }
        spec
    }

    pub fn scalar_spectrum(&self, coeffs: &[T]) -> Vec<Complex<T>> {
        let mut spec = self.zero_spectrum();
        for (mode, &b) in self.scalar_modes.iter().zip(coeffs) {
            self.add_to_spectrum(&mut spec, mode.n, mode.trig, b * mode.norm);
        }
        spec
    }

    /// Grid values from a synthesis spectrum.
    pub fn synthesize(&self, spec: &[Complex<T>]) -> Vec<T> {
        self.fft.inverse_real(spec.to_vec())
    }

    /// Grid values of `∂_a f` (a = 0, 1, 2) from a synthesis spectrum.
    pub fn synthesize_gradient(&self, spec: &[Complex<T>]) -> [Vec<T>; 3] {
        [0, 1, 2].map(|a| {
            let d: Vec<_> = spec
                .iter()
                .enumerate()
                .map(|(idx, &x)| {
                    let k = self.symbol_vec(idx)[a];
                    Complex::new(-x.im * k, x.re * k)
                })
                .collect();
            self.fft.inverse_real(d)
        })
    }

    /// Forward (unnormalized) spectrum of grid values.
    pub fn analyze(&self, f: &[T]) -> Vec<Complex<T>> {
        self.fft.forward_real(f)
    }

    /// `(f, ω_j)` for the first `count` scalar modes.
    pub fn project_scalar(&self, spec: &[Complex<T>], count: usize) -> Vec<T> {
        let w = self.weight();
        self.scalar_modes[..count]
            .iter()
            .map(|m| w * m.norm * self.trig_sum(spec, m.n, m.trig))
            .collect()
    }

    /// `(V, ∇ω_j)` for the first `count` scalar modes.
    pub fn project_gradient(&self, spec: &[Vec<Complex<T>>; 3], count: usize) -> Vec<T> {
        let w = self.weight();
        self.scalar_modes[..count]
            .iter()
            .map(|m| {
                let s: T = (0..3)
                    .map(|a| m.k[a] * self.dtrig_sum(&spec[a], m.n, m.trig))
                    .sum();
                w * m.norm * s
            })
            .collect()
    }

    /// `(F, ψ_j)` for the first `count` vector modes.
    pub fn project_vector(&self, spec: &[Vec<Complex<T>>; 3], count: usize) -> Vec<T> {
        let w = self.weight();
        self.vector_modes[..count]
            .iter()
            .map(|m| {
                let s: T = (0..3)
                    .map(|c| m.e[c] * self.trig_sum(&spec[c], m.n, m.trig))
                    .sum();
                w * m.norm * s
            })
            .collect()
    }

    /// `(W, ∇×ψ_j)` for the first `count` vector modes.
    pub fn project_curl(&self, spec: &[Vec<Complex<T>>; 3], count: usize) -> Vec<T> {
        let w = self.weight();
        self.vector_modes[..count]
            .iter()
            .map(|m| {
                let ke = cross3(&m.k, &m.e);
                let s: T = (0..3)
                    .map(|c| ke[c] * self.dtrig_sum(&spec[c], m.n, m.trig))
                    .sum();
                w * m.norm * s
            })
            .collect()
    }

    /// `(S, D(ψ_j))` for a symmetric tensor field given as spectra of its
    /// six stored components `[xx, yy, zz, xy, xz, yz]`.
    pub fn project_strain(&self, spec: &[Vec<Complex<T>>; 6], count: usize) -> Vec<T> {
        const IDX: [[usize; 3]; 3] = [[0, 3, 4], [3, 1, 5], [4, 5, 2]];
        let w = self.weight();
        let two = T::lit(2.0);
        self.vector_modes[..count]
            .iter()
            .map(|m| {
                // (S, D(ψ)) = 2 Σ_ab S_ab k_a e_b trig'
                let mut s = T::zero();
                for a in 0..3 {
                    for b in 0..3 {
                        let coef = m.k[a] * m.e[b];
                        if coef != T::zero() {
                            s += coef * self.dtrig_sum(&spec[IDX[a][b]], m.n, m.trig);
                        }
                    }
                }
                two * w * m.norm * s
            })
            .collect()
    }

    fn trig_product_sum(
        &self,
        spec: &[Complex<T>],
        (ni, ti): ([i32; 3], Trig),
        (nj, tj): ([i32; 3], Trig),
    ) -> T {
        let h = T::lit(0.5);
        let plus = [ni[0] + nj[0], ni[1] + nj[1], ni[2] + nj[2]];
        let minus = [ni[0] - nj[0], ni[1] - nj[1], ni[2] - nj[2]];
        let c = |n| self.trig_sum(spec, n, Trig::Cos);
        let s = |n| self.trig_sum(spec, n, Trig::Sin);
        match (ti, tj) {
            (Trig::Const, Trig::Const) => spec[0].re,
            (Trig::Const, t) => self.trig_sum(spec, nj, t),
            (t, Trig::Const) => self.trig_sum(spec, ni, t),
            (Trig::Cos, Trig::Cos) => h * (c(minus) + c(plus)),
            (Trig::Sin, Trig::Sin) => h * (c(minus) - c(plus)),
            (Trig::Sin, Trig::Cos) => h * (s(plus) + s(minus)),
            (Trig::Cos, Trig::Sin) => h * (s(plus) - s(minus)),
        }
    }

    /// `G_ij = (f ψ_i, ψ_j)` over the first `count` vector modes, from the
    /// forward spectrum of the weight `f`.
    pub fn weighted_gram_vector(&self, weight_spec: &[Complex<T>], count: usize) -> DenseMatrix<T> {
        let w = self.weight();
        let modes = &self.vector_modes[..count];
        let mut g = DenseMatrix::zeros(count);
        for (i, mi) in modes.iter().enumerate() {
            for (j, mj) in modes.iter().enumerate().take(i + 1) {
                let ee = dot3(&mi.e, &mj.e);
                let v = if ee == T::zero() {
                    T::zero()
                } else {
                    w * mi.norm
                        * mj.norm
                        * ee
                        * self.trig_product_sum(weight_spec, (mi.n, mi.trig), (mj.n, mj.trig))
                };
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// `G_ij = (f ω_i, ω_j)` over the first `count` scalar modes.
    pub fn weighted_gram_scalar(&self, weight_spec: &[Complex<T>], count: usize) -> DenseMatrix<T> {
        let w = self.weight();
        let modes = &self.scalar_modes[..count];
        let mut g = DenseMatrix::zeros(count);
        for (i, mi) in modes.iter().enumerate() {
            for (j, mj) in modes.iter().enumerate().take(i + 1) {
                let v = w
                    * mi.norm
                    * mj.norm
                    * self.trig_product_sum(weight_spec, (mi.n, mi.trig), (mj.n, mj.trig));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }
}

/// Convenience constructor with a constant scalar mode.
pub fn build_basis<T: Real>(
    length: T,
    resolution: usize,
    vector_modes: usize,
    scalar_modes: usize,
) -> Result<SpectralBasis<T>> {
    SpectralBasis::new(length, resolution, vector_modes, scalar_modes, ScalarFamily::WithMean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_cutoff() {
        assert_eq!(band_limit(8), 2);
        assert_eq!(band_limit(16), 5);
        assert_eq!(band_limit(32), 10);
        assert_eq!(band_limit(12), 3);
        assert_eq!(quadrature_grid(8), 12);
        assert_eq!(quadrature_grid(16), 24);
        assert_eq!(quadrature_grid(6), 10);
    }

    #[test]
    fn first_modes_on_smallest_shell() {
        let basis = build_basis(1.0f64, 8, 2, 1).unwrap();
        let k0 = std::f64::consts::TAU;
        for m in basis.vector_modes() {
            assert!((m.wavenumber_sqr().sqrt() - k0).abs() < 1e-14);
        }
    }

    #[test]
    fn ordering_is_shell_then_lexicographic() {
        let basis = build_basis(1.0f64, 8, 4 * 9, 7).unwrap();
        let ns: Vec<_> = basis.vector_modes().iter().step_by(4).map(|m| m.n).collect();
        assert_eq!(&ns[..3], &[[0, 0, 1], [0, 1, 0], [1, 0, 0]]);
        let shell: Vec<_> = ns.iter().map(|n| n.iter().map(|c| c * c).sum::<i32>()).collect();
        assert!(shell.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(basis.scalar_modes()[0].trig, Trig::Const);
    }

    #[test]
    fn polarizations_orthonormal_to_k() {
        let basis = build_basis(2.0f64, 8, 248, 1).unwrap();
        for m in basis.vector_modes() {
            assert!(dot3(&m.e, &m.k).abs() < 1e-14);
            assert!((dot3(&m.e, &m.e) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn too_many_modes_rejected() {
        let err = build_basis(1.0f64, 4, 100, 1).unwrap_err();
        assert!(matches!(err, Error::InsufficientResolution { .. }));
        assert!(err.to_string().contains("insufficient resolution"));
    }

    #[test]
    fn odd_resolution_rejected() {
        assert!(matches!(build_basis(1.0f64, 7, 1, 1), Err(Error::InvalidGrid(_))));
    }
}
