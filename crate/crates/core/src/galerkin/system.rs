use std::array;

use num_complex::Complex;

use super::state::{SimState, Truncation};
use crate::constitutive::{
    cnu_of_theta, heat_flux, q_of_theta, stress_tensor, validate_params, ConstitutiveParams, SymTensor3,
};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;
use crate::spectral::{ScalarFamily, SpectralBasis};

type Grid3<T> = [Vec<T>; 3];

/// Grid realization of a state: every field and derivative the right-hand
/// sides need, computed once.
#[derive(Clone, Debug)]
pub struct Evaluation<T> {
    pub rho: Vec<T>,
    /// Synthesis spectrum of `ρ` (forward FFT / M³).
    pub rho_hat: Vec<Complex<T>>,
    pub grad_rho: Grid3<T>,
    pub lap_rho: Vec<T>,
    pub u: Grid3<T>,
    /// `grad_u[i][j] = ∂_i u_j`.
    pub grad_u: [Grid3<T>; 3],
    pub h: Grid3<T>,
    pub grad_h: [Grid3<T>; 3],
    /// `∇×H`.
    pub j: Grid3<T>,
    /// Reconstructed temperature before clamping.
    pub theta: Vec<T>,
    /// Temperature clamped to the floor `θ*`; used by every constitutive law.
    pub theta_c: Vec<T>,
    pub grad_theta: Grid3<T>,
    pub clamp_count: usize,
    /// Stress components `[xx, yy, zz, xy, xz, yz]`.
    pub stress: [Vec<T>; 6],
    /// Pointwise `S : D(u)`.
    pub dissipation: Vec<T>,
}

/// Individual contributions to the momentum forcing, each already tested
/// against the velocity modes.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumTerms<T> {
    /// `−(ρ (u·∇)u, ψ_j)`
    pub inertia: Vec<T>,
    /// `−(S, D(ψ_j))`
    pub stress: Vec<T>,
    /// `ε((∇ρ·∇)u, ψ_j)`
    pub correction: Vec<T>,
    /// `((∇×H)×H, ψ_j)`
    pub lorentz: Vec<T>,
}

/// Contributions to the thermal forcing tested against the scalar modes.
#[derive(Clone, Debug, PartialEq)]
pub struct ThermalTerms<T> {
    /// `(ρ Q(θ) u, ∇ω_j)`
    pub convection: Vec<T>,
    /// `(q, ∇ω_j)`
    pub flux: Vec<T>,
    /// `ν(|∇×H|², ω_j)`
    pub joule: Vec<T>,
    /// `(S : D(u), ω_j)`
    pub viscous: Vec<T>,
    /// `(ρ_t Q(θ), ω_j)`
    pub storage: Vec<T>,
}

impl<T: Real> ThermalTerms<T> {
    pub fn total(&self) -> Vec<T> {
        (0..self.convection.len())
            .map(|j| self.convection[j] - self.flux[j] + self.joule[j] + self.viscous[j] - self.storage[j])
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MassKind {
    Velocity,
    Thermal,
}

/// Mass and stiffness operators at one state.
#[derive(Clone, Debug)]
pub struct GalerkinOperators<T> {
    /// `(ρ ψ_i, ψ_j)`
    pub velocity_mass: DenseMatrix<T>,
    /// `(ρ c_ν(θ) ω_i, ω_j)`
    pub thermal_mass: DenseMatrix<T>,
    /// `ν(∇×ϖ_i, ∇×ϖ_j)`, diagonal for the trigonometric basis.
    pub magnetic_stiffness: DenseMatrix<T>,
}

/// Right-hand sides at one state. `momentum` and `thermal` still have to
/// be solved against their mass matrices.
#[derive(Clone, Debug)]
pub struct Tendencies<T> {
    pub rho: Vec<T>,
    pub momentum: Vec<T>,
    pub thermal: Vec<T>,
    pub induction: Vec<T>,
    pub clamp_count: usize,
}

/// The semi-discrete system: constitutive data, basis and truncation.
#[derive(Clone, Debug)]
pub struct GalerkinSystem<T: Real> {
    params: ConstitutiveParams<T>,
    basis: SpectralBasis<T>,
    trunc: Truncation<T>,
    lorentz_sign: T,
}

impl<T: Real> GalerkinSystem<T> {
    pub fn new(params: ConstitutiveParams<T>, length: T, resolution: usize, trunc: Truncation<T>) -> Result<Self> {
        let basis = SpectralBasis::new(
            length,
            resolution,
            trunc.k_u.max(trunc.k_h),
            trunc.k_theta,
            ScalarFamily::WithMean,
        )?;
        Self::from_basis(params, basis, trunc)
    }

    pub fn from_basis(params: ConstitutiveParams<T>, basis: SpectralBasis<T>, trunc: Truncation<T>) -> Result<Self> {
        validate_params(&params).into_result()?;
        if !(trunc.eps_density >= T::zero()) {
            return Err(Error::Precondition("eps_density must be non-negative".into()));
        }
        let nv = basis.vector_modes().len();
        let ns = basis.scalar_modes().len();
        if trunc.k_u.max(trunc.k_h) > nv || trunc.k_theta > ns {
            return Err(Error::Precondition("basis has fewer modes than the truncation".into()));
        }
        Ok(Self {
            params,
            basis,
            trunc,
            lorentz_sign: T::one(),
        })
    }

    /// Multiplies the Lorentz force by `sign`; `−1` is a deliberate fault
    /// used to confirm that the energy checks detect it.
    pub fn with_lorentz_sign(mut self, sign: T) -> Self {
        self.lorentz_sign = sign;
        self
    }

    pub fn lorentz_sign(&self) -> T {
        self.lorentz_sign
    }

    pub fn params(&self) -> &ConstitutiveParams<T> {
        &self.params
    }

    pub fn basis(&self) -> &SpectralBasis<T> {
        &self.basis
    }

    pub fn truncation(&self) -> &Truncation<T> {
        &self.trunc
    }

    pub fn eps_density(&self) -> T {
        self.trunc.eps_density
    }

    pub fn zero_state(&self, rho: T) -> SimState<T> {
        SimState::new(
            vec![rho; self.basis.points()],
            vec![T::zero(); self.trunc.k_u],
            vec![T::zero(); self.trunc.k_theta],
            vec![T::zero(); self.trunc.k_h],
        )
    }

    fn points_inv(&self) -> T {
        T::from_usize_lossy(self.basis.points()).recip()
    }

    /// Removes density content above the dealiasing band.
    pub fn filter_density(&self, rho: &mut [T]) {
        let mut s = self.basis.analyze(rho);
        let cut = self.basis.dealias_cutoff();
        for (i, z) in s.iter_mut().enumerate() {
            if !self.basis.within_band(i, cut) {
                *z = Complex::new(T::zero(), T::zero());
            }
        }
        let inv = self.points_inv();
        for (r, v) in rho.iter_mut().zip(self.basis.synthesize(&s)) {
            *r = v * inv;
        }
    }

    /// Quadrature `∫ f g dx`.
    pub fn grid_dot(&self, f: &[T], g: &[T]) -> T {
        self.basis.weight() * f.iter().zip(g).map(|(&a, &b)| a * b).sum::<T>()
    }

    pub fn grid_sum(&self, f: &[T]) -> T {
        self.basis.weight() * f.iter().copied().sum::<T>()
    }

    /// Grid values and gradient (`grad[i][j] = ∂_i v_j`) of `Σ c_j ψ_j`.
    pub fn vector_field(&self, coeffs: &[T]) -> (Grid3<T>, [Grid3<T>; 3]) {
        let spec = self.basis.vector_spectrum(coeffs);
        let vals = spec.each_ref().map(|s| self.basis.synthesize(s));
        let by_comp = spec.each_ref().map(|s| self.basis.synthesize_gradient(s));
        let grad = array::from_fn(|i| array::from_fn(|j| by_comp[j][i].clone()));
        (vals, grad)
    }

    pub fn scalar_field(&self, coeffs: &[T]) -> (Vec<T>, Grid3<T>) {
        let spec = self.basis.scalar_spectrum(coeffs);
        (self.basis.synthesize(&spec), self.basis.synthesize_gradient(&spec))
    }

    /// Grid points where the reconstructed temperature falls below `θ*`.
    pub fn clamp_count(&self, state: &SimState<T>) -> usize {
        if self.trunc.k_theta == 0 {
            return 0;
        }
        let spec = self.basis.scalar_spectrum(&state.b);
        let floor = self.params.theta_low;
        self.basis.synthesize(&spec).iter().filter(|&&t| t < floor).count()
    }

    pub fn evaluate(&self, state: &SimState<T>) -> Result<Evaluation<T>> {
        state.check_shape(&self.basis, &self.trunc)?;
        let b = &self.basis;
        let p = &self.params;
        let n = b.points();
        let inv = self.points_inv();

        let rho = state.rho.clone();
        let rho_hat: Vec<_> = b.analyze(&rho).into_iter().map(|z| z * inv).collect();
        let grad_rho = b.synthesize_gradient(&rho_hat);
        let lap_hat: Vec<_> = rho_hat
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                let k = b.symbol_vec(i);
                z * -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2])
            })
            .collect();
        let lap_rho = b.synthesize(&lap_hat);

        let (u, grad_u) = self.vector_field(&state.a);
        let (h, grad_h) = self.vector_field(&state.c);
        let j = [
            sub(&grad_h[1][2], &grad_h[2][1]),
            sub(&grad_h[2][0], &grad_h[0][2]),
            sub(&grad_h[0][1], &grad_h[1][0]),
        ];

        let (theta, grad_theta) = self.scalar_field(&state.b);
        let floor = p.theta_low;
        let mut clamp_count = 0;
        let theta_c: Vec<T> = theta
            .iter()
            .map(|&t| {
                if t < floor {
                    clamp_count += 1;
                    floor
                } else {
                    t
                }
            })
            .collect();
        if self.trunc.k_theta == 0 {
            clamp_count = 0;
        }

        let mut stress: [Vec<T>; 6] = array::from_fn(|_| vec![T::zero(); n]);
        let mut dissipation = vec![T::zero(); n];
        for g in 0..n {
            let grad = array::from_fn(|i| array::from_fn(|jj| grad_u[i][jj][g]));
            let d = SymTensor3::strain_from_gradient(&grad);
            let s = stress_tensor(p, rho[g], theta_c[g], &d)?;
            for (c, comp) in stress.iter_mut().enumerate() {
                comp[g] = s.0[c];
            }
            dissipation[g] = s.ddot(&d);
        }

        Ok(Evaluation {
            rho,
            rho_hat,
            grad_rho,
            lap_rho,
            u,
            grad_u,
            h,
            grad_h,
            j,
            theta,
            theta_c,
            grad_theta,
            clamp_count,
            stress,
            dissipation,
        })
    }

    fn analyze3(&self, v: &Grid3<T>) -> [Vec<Complex<T>>; 3] {
        v.each_ref().map(|c| self.basis.analyze(c))
    }

    /// `ρ_t = P(−div(ρu) + εΔρ)` on the grid, `P` the dealiasing filter.
    pub fn density_rhs(&self, ev: &Evaluation<T>) -> Vec<T> {
        let b = &self.basis;
        let eps = self.trunc.eps_density;
        let inv = self.points_inv();
        let cut = b.dealias_cutoff();
        let flux = self.analyze3(&array::from_fn(|c| mul(&ev.rho, &ev.u[c])));
        let spec: Vec<_> = (0..b.points())
            .map(|i| {
                if !b.within_band(i, cut) {
                    return Complex::new(T::zero(), T::zero());
                }
                let k = b.symbol_vec(i);
                let mut z = Complex::new(T::zero(), T::zero());
                for c in 0..3 {
                    // −i k_c F̂_c
                    z += Complex::new(flux[c][i].im * k[c], -flux[c][i].re * k[c]) * inv;
                }
                z - ev.rho_hat[i] * (eps * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]))
            })
            .collect();
        b.synthesize(&spec)
    }

    fn inertia_grid(&self, ev: &Evaluation<T>) -> Grid3<T> {
        array::from_fn(|c| {
            (0..ev.rho.len())
                .map(|g| -ev.rho[g] * (0..3).map(|i| ev.u[i][g] * ev.grad_u[i][c][g]).sum::<T>())
                .collect()
        })
    }

    fn correction_grid(&self, ev: &Evaluation<T>) -> Grid3<T> {
        let eps = self.trunc.eps_density;
        array::from_fn(|c| {
            (0..ev.rho.len())
                .map(|g| eps * (0..3).map(|i| ev.grad_rho[i][g] * ev.grad_u[i][c][g]).sum::<T>())
                .collect()
        })
    }

    fn lorentz_grid(&self, ev: &Evaluation<T>) -> Grid3<T> {
        let s = self.lorentz_sign;
        array::from_fn(|c| {
            let (a, b) = ((c + 1) % 3, (c + 2) % 3);
            (0..ev.rho.len())
                .map(|g| s * (ev.j[a][g] * ev.h[b][g] - ev.j[b][g] * ev.h[a][g]))
                .collect()
        })
    }

    fn stress_projection(&self, ev: &Evaluation<T>) -> Vec<T> {
        let spec = ev.stress.each_ref().map(|c| self.basis.analyze(c));
        self.basis.project_strain(&spec, self.trunc.k_u)
    }

    pub fn momentum_terms(&self, ev: &Evaluation<T>) -> MomentumTerms<T> {
        let k = self.trunc.k_u;
        let proj = |v: Grid3<T>| self.basis.project_vector(&self.analyze3(&v), k);
        MomentumTerms {
            inertia: proj(self.inertia_grid(ev)),
            stress: self.stress_projection(ev).into_iter().map(|x| -x).collect(),
            correction: proj(self.correction_grid(ev)),
            lorentz: proj(self.lorentz_grid(ev)),
        }
    }

    /// `−(ρ(u·∇)u, ψ_j) − (S, D(ψ_j)) + ε((∇ρ·∇)u, ψ_j) + ((∇×H)×H, ψ_j)`.
    pub fn momentum_rhs(&self, ev: &Evaluation<T>) -> Vec<T> {
        let inertia = self.inertia_grid(ev);
        let corr = self.correction_grid(ev);
        let lor = self.lorentz_grid(ev);
        let total: Grid3<T> = array::from_fn(|c| {
            (0..ev.rho.len())
                .map(|g| inertia[c][g] + corr[c][g] + lor[c][g])
                .collect()
        });
        let v = self.basis.project_vector(&self.analyze3(&total), self.trunc.k_u);
        let s = self.stress_projection(ev);
        v.into_iter().zip(s).map(|(x, y)| x - y).collect()
    }

    pub fn thermal_terms(&self, ev: &Evaluation<T>, rho_t: &[T]) -> Result<ThermalTerms<T>> {
        let b = &self.basis;
        let p = &self.params;
        let k = self.trunc.k_theta;
        let n = ev.rho.len();
        let q: Vec<T> = ev.theta_c.iter().map(|&t| q_of_theta(p, t)).collect();
        let conv: Grid3<T> = array::from_fn(|c| (0..n).map(|g| ev.rho[g] * q[g] * ev.u[c][g]).collect());
        let mut flux: Grid3<T> = array::from_fn(|_| vec![T::zero(); n]);
        for g in 0..n {
            let gt = [ev.grad_theta[0][g], ev.grad_theta[1][g], ev.grad_theta[2][g]];
            let f = heat_flux(p, ev.rho[g], ev.theta_c[g], &gt)?;
            for c in 0..3 {
                flux[c][g] = f[c];
            }
        }
        let joule: Vec<T> = (0..n)
            .map(|g| p.nu * (0..3).map(|c| ev.j[c][g] * ev.j[c][g]).sum::<T>())
            .collect();
        let storage = mul(rho_t, &q);
        Ok(ThermalTerms {
            convection: b.project_gradient(&self.analyze3(&conv), k),
            flux: b.project_gradient(&self.analyze3(&flux), k),
            joule: b.project_scalar(&b.analyze(&joule), k),
            viscous: b.project_scalar(&b.analyze(&ev.dissipation), k),
            storage: b.project_scalar(&b.analyze(&storage), k),
        })
    }

    /// Conservative weak thermal forcing, to be used with the thermal mass.
    pub fn thermal_rhs(&self, ev: &Evaluation<T>, rho_t: &[T]) -> Result<Vec<T>> {
        Ok(self.thermal_terms(ev, rho_t)?.total())
    }

    /// `ċ_j = −ν|k_j|² c_j + (u×H, ∇×ϖ_j)`.
    pub fn induction_rhs(&self, ev: &Evaluation<T>, c: &[T]) -> Vec<T> {
        let n = ev.rho.len();
        let uxh: Grid3<T> = array::from_fn(|i| {
            let (a, b) = ((i + 1) % 3, (i + 2) % 3);
            (0..n).map(|g| ev.u[a][g] * ev.h[b][g] - ev.u[b][g] * ev.h[a][g]).collect()
        });
        let proj = self.basis.project_curl(&self.analyze3(&uxh), self.trunc.k_h);
        let nu = self.params.nu;
        self.basis.vector_modes()[..self.trunc.k_h]
            .iter()
            .zip(proj)
            .zip(c)
            .map(|((m, pj), &cj)| pj - nu * m.wavenumber_sqr() * cj)
            .collect()
    }

    /// Diagonal of the magnetic stiffness, `ν|k_j|²`.
    pub fn magnetic_stiffness(&self) -> Vec<T> {
        self.basis.vector_modes()[..self.trunc.k_h]
            .iter()
            .map(|m| self.params.nu * m.wavenumber_sqr())
            .collect()
    }

    /// `A` with `ċ = −A c`:
    /// `A_ji = ν(∇ϖ_i, ∇ϖ_j) + ((u·∇)ϖ_i, ϖ_j) − ((ϖ_i·∇)u, ϖ_j) + ((div u)ϖ_i, ϖ_j)`.
    pub fn induction_matrix(&self, ev: &Evaluation<T>) -> DenseMatrix<T> {
        let k = self.trunc.k_h;
        let n = ev.rho.len();
        let div: Vec<T> = (0..n)
            .map(|g| ev.grad_u[0][0][g] + ev.grad_u[1][1][g] + ev.grad_u[2][2][g])
            .collect();
        let stiff = self.magnetic_stiffness();
        let mut a = DenseMatrix::zeros(k);
        for i in 0..k {
            let mut unit = vec![T::zero(); i + 1];
            unit[i] = T::one();
            let (w, gw) = self.vector_field(&unit);
            let v: Grid3<T> = array::from_fn(|c| {
                (0..n)
                    .map(|g| {
                        let mut s = div[g] * w[c][g];
                        for d in 0..3 {
                            s += ev.u[d][g] * gw[d][c][g] - w[d][g] * ev.grad_u[d][c][g];
                        }
                        s
                    })
                    .collect()
            });
            let col = self.basis.project_vector(&self.analyze3(&v), k);
            for (jj, x) in col.into_iter().enumerate() {
                a[(jj, i)] = x;
            }
            a[(i, i)] += stiff[i];
        }
        a
    }

    pub fn assemble_mass(&self, ev: &Evaluation<T>, which: MassKind) -> Result<DenseMatrix<T>> {
        let b = &self.basis;
        let m = match which {
            MassKind::Velocity => b.weighted_gram_vector(&b.analyze(&ev.rho), self.trunc.k_u),
            MassKind::Thermal => {
                let w: Vec<T> = ev
                    .rho
                    .iter()
                    .zip(&ev.theta_c)
                    .map(|(&r, &t)| r * cnu_of_theta(&self.params, t))
                    .collect();
                b.weighted_gram_scalar(&b.analyze(&w), self.trunc.k_theta)
            }
        };
        m.cholesky()?;
        Ok(m)
    }

    pub fn operators(&self, ev: &Evaluation<T>) -> Result<GalerkinOperators<T>> {
        let mut stiffness = DenseMatrix::zeros(self.trunc.k_h);
        stiffness.add_diagonal(&self.magnetic_stiffness());
        Ok(GalerkinOperators {
            velocity_mass: self.assemble_mass(ev, MassKind::Velocity)?,
            thermal_mass: self.assemble_mass(ev, MassKind::Thermal)?,
            magnetic_stiffness: stiffness,
        })
    }

    pub fn tendencies_of(&self, ev: &Evaluation<T>, state: &SimState<T>) -> Result<Tendencies<T>> {
        let rho = self.density_rhs(ev);
        let thermal = self.thermal_rhs(ev, &rho)?;
        Ok(Tendencies {
            momentum: self.momentum_rhs(ev),
            thermal,
            induction: self.induction_rhs(ev, &state.c),
            rho,
            clamp_count: ev.clamp_count,
        })
    }

    pub fn tendencies(&self, state: &SimState<T>) -> Result<Tendencies<T>> {
        let ev = self.evaluate(state)?;
        self.tendencies_of(&ev, state)
    }
}

fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

fn mul<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x * y).collect()
}
