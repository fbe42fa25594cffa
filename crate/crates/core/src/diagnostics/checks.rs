use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::record::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::scalar::{max_abs, Real};
use crate::spectral::{differentiate, inner_product, max_divergence, DiffOp, Field, Rank, ScalarFamily, SpectralBasis};

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport<T> {
    pub max_abs: T,
    pub final_value: T,
    pub samples: usize,
}

fn residual_report<T: Real>(
    records: &[DiagnosticsRecord<T>],
    pick: impl Fn(&DiagnosticsRecord<T>) -> T,
) -> Result<ResidualReport<T>> {
    if records.len() < 2 {
        return Err(Error::Precondition("need at least 2 diagnostics samples".into()));
    }
    let vals: Vec<T> = records.iter().map(pick).collect();
    Ok(ResidualReport {
        max_abs: max_abs(&vals),
        final_value: *vals.last().unwrap(),
        samples: vals.len(),
    })
}

/// Largest `|E(t) − E(0) + ∫(D_visc + D_mag)|` over a trajectory.
pub fn energy_balance<T: Real>(records: &[DiagnosticsRecord<T>]) -> Result<ResidualReport<T>> {
    residual_report(records, |r| r.energy_residual)
}

/// Largest residual of `∫(∂_t(ρu), u) − (ρu⊗u, ∇u) dt = K(t₁) − K(t₀)`.
pub fn kinetic_identity_check<T: Real>(records: &[DiagnosticsRecord<T>]) -> Result<ResidualReport<T>> {
    residual_report(records, |r| r.kinetic_residual)
}

/// Ratio `residual(dt) / residual(dt/2)`; about 4 for a second-order scheme.
pub fn refinement_ratio<T: Real>(coarse: T, fine: T) -> T {
    coarse / fine
}

pub fn observed_order<T: Real>(ratio: T) -> T {
    ratio.log2()
}

/// Running values of the quantities controlled by the a priori estimates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AprioriReport<T> {
    /// `sup_t (E_kin + E_mag)`
    pub sup_energy: T,
    /// Time at which the supremum is attained.
    pub sup_energy_time: T,
    /// `∫ ‖D(u)‖_r^r dt`
    pub strain_r_integral: T,
    /// `∫ ‖∇×H‖² dt`
    pub curl_h_integral: T,
    /// `sup_t ‖ρθ‖_{L¹}`
    pub sup_rho_theta: T,
    /// `sup_t ‖θ^(−λ)‖_∞`
    pub sup_theta_neg: T,
    /// `∫ ‖θ^p‖²_{W^{1,2}} dt`
    pub theta_p_integral: T,
}

impl<T: Real> AprioriReport<T> {
    pub fn values(&self) -> [(&'static str, T); 6] {
        [
            ("sup_energy", self.sup_energy),
            ("strain_r_integral", self.strain_r_integral),
            ("curl_h_integral", self.curl_h_integral),
            ("sup_rho_theta", self.sup_rho_theta),
            ("sup_theta_neg", self.sup_theta_neg),
            ("theta_p_integral", self.theta_p_integral),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|(_, v)| v.is_finite())
    }
}

fn trapezoid<T: Real>(records: &[DiagnosticsRecord<T>], f: impl Fn(&DiagnosticsRecord<T>) -> T) -> T {
    records
        .windows(2)
        .map(|w| T::lit(0.5) * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1])))
        .sum()
}

pub fn apriori_monitor<T: Real>(records: &[DiagnosticsRecord<T>]) -> AprioriReport<T> {
    let mut rep = AprioriReport::default();
    for (i, r) in records.iter().enumerate() {
        if i == 0 || r.energy() > rep.sup_energy {
            rep.sup_energy = r.energy();
            rep.sup_energy_time = r.t;
        }
        rep.sup_rho_theta = rep.sup_rho_theta.max(r.rho_theta_l1);
        rep.sup_theta_neg = rep.sup_theta_neg.max(r.theta_neg_power);
    }
    rep.strain_r_integral = trapezoid(records, |r| r.strain_r_norm);
    rep.curl_h_integral = trapezoid(records, |r| r.curl_h_sqr);
    rep.theta_p_integral = trapezoid(records, |r| r.theta_p_w12);
    rep
}

/// Relative growth between consecutive sweep levels beyond which a monitor
/// is flagged as not uniform in `k`.
pub const K_UNIFORMITY_GROWTH: f64 = 0.1;

/// Flags monitors that are non-finite or grow by more than the allowed
/// fraction from one truncation level to the next (`reports` sorted by k).
pub fn k_uniformity_flags<T: Real>(reports: &[(usize, AprioriReport<T>)]) -> Vec<String> {
    let mut flags = Vec::new();
    let tol = T::lit(K_UNIFORMITY_GROWTH);
    for (k, r) in reports {
        if !r.is_finite() {
            flags.push(format!("k = {k}: non-finite monitor"));
        }
    }
    for w in reports.windows(2) {
        let (k0, a) = &w[0];
        let (k1, b) = &w[1];
        for ((name, x), (_, y)) in a.values().iter().zip(b.values().iter()) {
            if *y > *x * (T::one() + tol) + T::lit(1e-12) {
                flags.push(format!("{name} grows from {x:e} at k = {k0} to {y:e} at k = {k1}"));
            }
        }
    }
    flags
}

type Grid3<T> = [Vec<T>; 3];

struct Oversampled<'a, T: Real> {
    b: &'a SpectralBasis<T>,
}

impl<T: Real> Oversampled<'_, T> {
    fn spectra(&self, v: &Grid3<T>) -> [Vec<Complex<T>>; 3] {
        let inv = T::from_usize_lossy(self.b.points()).recip();
        v.each_ref()
            .map(|c| self.b.analyze(c).into_iter().map(|z| z * inv).collect())
    }

    fn div(&self, v: &Grid3<T>) -> Vec<T> {
        let s = self.spectra(v);
        let spec: Vec<_> = (0..self.b.points())
            .map(|i| {
                let k = self.b.symbol_vec(i);
                (0..3).fold(Complex::new(T::zero(), T::zero()), |acc, c| {
                    acc + Complex::new(-s[c][i].im * k[c], s[c][i].re * k[c])
                })
            })
            .collect();
        self.b.synthesize(&spec)
    }

    fn curl(&self, v: &Grid3<T>) -> Grid3<T> {
        let s = self.spectra(v);
        let g = s.each_ref().map(|c| self.b.synthesize_gradient(c));
        // g[comp][axis] = ∂_axis v_comp
        [0, 1, 2].map(|c| {
            let (a, b) = ((c + 1) % 3, (c + 2) % 3);
            g[b][a].iter().zip(&g[a][b]).map(|(&x, &y)| x - y).collect()
        })
    }
}

fn cross<T: Real>(a: &Grid3<T>, b: &Grid3<T>) -> Grid3<T> {
    [0, 1, 2].map(|c| {
        let (i, j) = ((c + 1) % 3, (c + 2) % 3);
        (0..a[0].len()).map(|g| a[i][g] * b[j][g] - a[j][g] * b[i][g]).collect()
    })
}

fn dot<T: Real>(a: &Grid3<T>, b: &Grid3<T>) -> Vec<T> {
    (0..a[0].len())
        .map(|g| a[0][g] * b[0][g] + a[1][g] * b[1][g] + a[2][g] * b[2][g])
        .collect()
}

/// Pointwise defects of
/// `div(νH×(∇×H)) = ν|∇×H|² − ∇×(ν∇×H)·H` and
/// `div((u×H)×H) = ((∇×H)×H)·u + ∇×(u×H)·H`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityDefects<T> {
    pub magnetic_flux: T,
    pub transport: T,
}

impl<T: Real> IdentityDefects<T> {
    pub fn max(&self) -> T {
        self.magnetic_flux.max(self.transport)
    }
}

/// Evaluates both sides for `u = Σ a_j ψ_j`, `H = Σ c_j ψ_j` on a grid
/// twice as fine as the basis resolution, which resolves the cubic terms.
pub fn vector_identity_check<T: Real>(
    basis: &SpectralBasis<T>,
    a: &[T],
    c: &[T],
    nu: T,
) -> Result<IdentityDefects<T>> {
    let count = a.len().max(c.len());
    let fine = SpectralBasis::new(basis.length(), 2 * basis.resolution(), count, 0, ScalarFamily::WithMean)?;
    let ov = Oversampled { b: &fine };
    let synth = |x: &[T]| fine.vector_spectrum(x).map(|s| fine.synthesize(&s));
    let u = synth(a);
    let h = synth(c);
    let j = ov.curl(&h);

    let hxj: Grid3<T> = cross(&h, &j).map(|v| v.into_iter().map(|x| nu * x).collect());
    let lhs1 = ov.div(&hxj);
    let curl_j = ov.curl(&j);
    let j2 = dot(&j, &j);
    let cjh = dot(&curl_j, &h);
    let flux = (0..lhs1.len())
        .map(|g| (lhs1[g] - (nu * j2[g] - nu * cjh[g])).abs())
        .fold(T::zero(), |m, x| m.max(x));

    let uxh = cross(&u, &h);
    let lhs2 = ov.div(&cross(&uxh, &h));
    let lor = dot(&cross(&j, &h), &u);
    let stretch = dot(&ov.curl(&uxh), &h);
    let transport = (0..lhs2.len())
        .map(|g| (lhs2[g] - lor[g] - stretch[g]).abs())
        .fold(T::zero(), |m, x| m.max(x));
    Ok(IdentityDefects {
        magnetic_flux: flux,
        transport,
    })
}

fn gradient_norm_sqr<T: Real>(basis: &SpectralBasis<T>, v: &Field<T>) -> Result<(T, T)> {
    // returns (‖∇v‖², ‖D(v)‖²) with D = ∇v + ∇vᵀ
    let g = v.to_grid(basis)?;
    let grads: Vec<Field<T>> = (0..3)
        .map(|c| differentiate(basis, &Field::scalar(basis.grid(), g.values(c).unwrap().to_vec())?, DiffOp::Grad))
        .collect::<Result<_>>()?;
    // grads[c] holds ∂_i v_c as component i
    let n = basis.points();
    let mut full = T::zero();
    let mut sym = T::zero();
    for p in 0..n {
        for i in 0..3 {
            for j in 0..3 {
                let dij = grads[j].values(i).unwrap()[p];
                let dji = grads[i].values(j).unwrap()[p];
                full += dij * dij;
                sym += (dij + dji) * (dij + dji);
            }
        }
    }
    let w = basis.weight();
    Ok((full * w, sym * w))
}

fn require_solenoidal<T: Real>(basis: &SpectralBasis<T>, v: &Field<T>) -> Result<()> {
    if v.rank() != Rank::Vector {
        return Err(Error::RankMismatch("expected a vector field"));
    }
    let d = max_divergence(basis, v)?;
    let scale = inner_product(basis, v, v)?.sqrt().max(T::one()) * basis.lowest_wavenumber();
    if d > T::lit(1e-10) * scale {
        return Err(Error::NotSolenoidal(d.to_f64_lossy()));
    }
    Ok(())
}

/// `‖∇u‖ / ‖D(u)‖` for a solenoidal field.
pub fn korn_ratio<T: Real>(basis: &SpectralBasis<T>, u: &Field<T>) -> Result<T> {
    require_solenoidal(basis, u)?;
    let (full, sym) = gradient_norm_sqr(basis, u)?;
    Ok(if sym > T::zero() { (full / sym).sqrt() } else { T::zero() })
}

/// `‖H‖ / ‖∇H‖`.
pub fn poincare_ratio<T: Real>(basis: &SpectralBasis<T>, h: &Field<T>) -> Result<T> {
    if h.rank() != Rank::Vector {
        return Err(Error::RankMismatch("expected a vector field"));
    }
    let (full, _) = gradient_norm_sqr(basis, h)?;
    let l2 = inner_product(basis, h, h)?;
    Ok(if full > T::zero() { (l2 / full).sqrt() } else { T::zero() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalReport<T> {
    /// Worst `‖∇u‖/‖D(u)‖` observed (`1/√2` on the torus).
    pub korn_max: T,
    /// Worst relative defect of `‖D(u)‖² = 2‖∇u‖²`.
    pub korn_parseval_defect: T,
    /// Worst `‖H‖/‖∇H‖` observed.
    pub poincare_max: T,
    /// `‖H‖/‖∇H‖` on the lowest mode.
    pub poincare_lowest: T,
    /// `L/(2π)`
    pub poincare_constant: T,
    pub fields: usize,
}

/// Samples `fields` random solenoidal fields from the first `modes`
/// vector modes and records the worst Korn and Poincaré ratios.
pub fn functional_inequality_check<T: Real>(
    basis: &SpectralBasis<T>,
    modes: usize,
    fields: usize,
    seed: u64,
) -> Result<FunctionalReport<T>> {
    let modes = modes.min(basis.vector_modes().len());
    if modes == 0 {
        return Err(Error::Precondition("need at least one vector mode".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let to_field = |coef: &[T]| -> Result<Field<T>> {
        Field::vector(basis.grid(), basis.vector_spectrum(coef).map(|s| basis.synthesize(&s)))
    };
    let mut korn_max = T::zero();
    let mut defect = T::zero();
    let mut poincare_max = T::zero();
    for _ in 0..fields {
        let coef: Vec<T> = (0..modes).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
        let v = to_field(&coef)?;
        require_solenoidal(basis, &v)?;
        let (full, sym) = gradient_norm_sqr(basis, &v)?;
        korn_max = korn_max.max((full / sym).sqrt());
        defect = defect.max((sym - T::lit(2.0) * full).abs() / sym);
        poincare_max = poincare_max.max(poincare_ratio(basis, &v)?);
    }
    let mut lowest = vec![T::zero(); 1];
    lowest[0] = T::one();
    let poincare_lowest = poincare_ratio(basis, &to_field(&lowest)?)?;
    Ok(FunctionalReport {
        korn_max,
        korn_parseval_defect: defect,
        poincare_max,
        poincare_lowest,
        poincare_constant: basis.lowest_wavenumber().recip(),
        fields,
    })
}
