//! Constitutive relations: power-law viscous stress, temperature-dependent
//! heat flux, and the split internal energy `e(ρ, θ) = P_e(ρ) + Q(θ)`.
//!
//! Only bounds on `μ`, `κ` and `c_ν` enter the analysis, so each function is
//! chosen from a small closed-form family whose range is the configured
//! interval.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, Vec3};

/// Symmetric 3×3 tensor stored as `[xx, yy, zz, xy, xz, yz]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SymTensor3<T>(pub [T; 6]);

impl<T: Real> SymTensor3<T> {
    pub fn zero() -> Self {
        Self([T::zero(); 6])
    }

    pub fn diag(a: T, b: T, c: T) -> Self {
        Self([a, b, c, T::zero(), T::zero(), T::zero()])
    }

    /// `D = ∇u + ∇uᵀ` where `grad[i][j] = ∂u_j/∂x_i`.
    pub fn strain_from_gradient(grad: &[[T; 3]; 3]) -> Self {
        Self([
            grad[0][0] + grad[0][0],
            grad[1][1] + grad[1][1],
            grad[2][2] + grad[2][2],
            grad[0][1] + grad[1][0],
            grad[0][2] + grad[2][0],
            grad[1][2] + grad[2][1],
        ])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        const IDX: [[usize; 3]; 3] = [[0, 3, 4], [3, 1, 5], [4, 5, 2]];
        self.0[IDX[i][j]]
    }

    /// Full double contraction `A : B = Σ a_ij b_ij`.
    #[inline]
    pub fn ddot(&self, other: &Self) -> T {
        let a = &self.0;
        let b = &other.0;
        let two = T::one() + T::one();
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + two * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5])
    }

    #[inline]
    pub fn norm_sqr(&self) -> T {
        self.ddot(self)
    }

    pub fn trace(&self) -> T {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn scale(&self, s: T) -> Self {
        Self(self.0.map(|x| x * s))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.0;
        for (o, b) in out.iter_mut().zip(other.0) {
            *o -= b;
        }
        Self(out)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ViscosityForm {
    /// `μ = (μ_low + μ_high)/2`
    #[default]
    Constant,
    /// Linear in density across `[ρ_low, ρ_high]`.
    DensityLinear,
    /// `μ_low + (μ_high − μ_low) θ/(1 + θ)`
    ThermalSaturating,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ConductivityForm {
    /// `κ = (κ_low + κ_high)/2`
    #[default]
    Constant,
    /// Linear in density across `[ρ_low, ρ_high]`.
    DensityLinear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SpecificHeatForm {
    /// `c_ν = (c_low + c_high)/2`
    #[default]
    Constant,
    /// `c_low + (c_high − c_low) θ/(1 + θ)`
    Saturating,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ElasticPotential {
    #[default]
    Zero,
    /// `P_e(ρ) = ρ`
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstitutiveParams<T> {
    /// Power-law exponent.
    pub r: T,
    /// Conductivity exponent, `q = κ θ^α ∇θ`.
    pub alpha: T,
    /// Regularization in `(ε + |D|²)^((r−2)/2)`.
    pub eps_const: T,
    /// Magnetic diffusivity.
    pub nu: T,
    pub mu_low: T,
    pub mu_high: T,
    pub kappa_low: T,
    pub kappa_high: T,
    pub cnu_low: T,
    pub cnu_high: T,
    pub rho_low: T,
    pub rho_high: T,
    pub theta_low: T,
    pub mu_form: ViscosityForm,
    pub kappa_form: ConductivityForm,
    pub cnu_form: SpecificHeatForm,
    pub elastic_form: ElasticPotential,
}

impl<T: Real> Default for ConstitutiveParams<T> {
    fn default() -> Self {
        Self {
            r: T::lit(3.0),
            alpha: T::zero(),
            eps_const: T::lit(1e-8),
            nu: T::lit(0.5),
            mu_low: T::lit(0.5),
            mu_high: T::lit(0.5),
            kappa_low: T::lit(0.1),
            kappa_high: T::lit(0.1),
            cnu_low: T::one(),
            cnu_high: T::one(),
            rho_low: T::lit(0.5),
            rho_high: T::lit(2.0),
            theta_low: T::lit(0.1),
            mu_form: ViscosityForm::Constant,
            kappa_form: ConductivityForm::Constant,
            cnu_form: SpecificHeatForm::Constant,
            elastic_form: ElasticPotential::Zero,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// The inequality that failed, e.g. `r > 2`.
    pub condition: &'static str,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::InvalidParams(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "pass");
        }
        let msgs: Vec<_> = self.violations.iter().map(|v| v.message.as_str()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Checks every admissibility condition and reports all violations at once.
pub fn validate_params<T: Real>(p: &ConstitutiveParams<T>) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut need = |ok: bool, condition: &'static str, message: &str| {
        if !ok {
            report.violations.push(Violation {
                condition,
                message: format!("{message} ({condition})"),
            });
        }
    };
    let zero = T::zero();
    let fin = |x: T| x.is_finite();
    need(p.r > T::lit(2.0) && fin(p.r), "r > 2", "r must exceed 2");
    need(
        p.alpha > T::lit(-2.0 / 3.0) && fin(p.alpha),
        "alpha > -2/3",
        "alpha must exceed -2/3",
    );
    need(
        p.eps_const >= zero && p.eps_const <= T::one(),
        "0 <= eps_const <= 1",
        "eps_const must lie in [0, 1]",
    );
    need(p.nu > zero && fin(p.nu), "nu > 0", "magnetic diffusivity must be positive");
    need(p.mu_low > zero, "mu_low > 0", "viscosity lower bound must be positive");
    need(
        p.mu_low <= p.mu_high && fin(p.mu_high),
        "mu_low <= mu_high < inf",
        "viscosity bounds out of order",
    );
    need(p.kappa_low > zero, "kappa_low > 0", "conductivity lower bound must be positive");
    need(
        p.kappa_low <= p.kappa_high && fin(p.kappa_high),
        "kappa_low <= kappa_high < inf",
        "conductivity bounds out of order",
    );
    need(p.cnu_low > zero, "cnu_low > 0", "specific heat lower bound must be positive");
    need(
        p.cnu_low <= p.cnu_high && fin(p.cnu_high),
        "cnu_low <= cnu_high < inf",
        "specific heat bounds out of order",
    );
    need(p.rho_low > zero, "rho_low > 0", "density lower bound must be positive");
    need(
        p.rho_low <= p.rho_high && fin(p.rho_high),
        "rho_low <= rho_high < inf",
        "density bounds out of order",
    );
    need(
        p.theta_low > zero && fin(p.theta_low),
        "theta_low > 0",
        "temperature floor must be positive",
    );
    report
}

fn half<T: Real>() -> T {
    T::lit(0.5)
}

fn density_fraction<T: Real>(p: &ConstitutiveParams<T>, rho: T) -> T {
    let span = p.rho_high - p.rho_low;
    if span <= T::zero() {
        return half();
    }
    ((rho - p.rho_low) / span).max(T::zero()).min(T::one())
}

impl<T: Real> ConstitutiveParams<T> {
    /// `μ(ρ, θ)`; `theta` is expected to be truncated at zero already.
    pub fn viscosity(&self, rho: T, theta: T) -> T {
        let (lo, hi) = (self.mu_low, self.mu_high);
        match self.mu_form {
            ViscosityForm::Constant => half::<T>() * (lo + hi),
            ViscosityForm::DensityLinear => lo + (hi - lo) * density_fraction(self, rho),
            ViscosityForm::ThermalSaturating => {
                let th = theta.max(T::zero());
                lo + (hi - lo) * th / (T::one() + th)
            }
        }
    }

    pub fn conductivity(&self, rho: T) -> T {
        let (lo, hi) = (self.kappa_low, self.kappa_high);
        match self.kappa_form {
            ConductivityForm::Constant => half::<T>() * (lo + hi),
            ConductivityForm::DensityLinear => lo + (hi - lo) * density_fraction(self, rho),
        }
    }

    /// Scalar prefactor `μ(ρ, θ⁺)(ε + |D|²)^((r−2)/2)` of the stress.
    #[inline]
    pub fn stress_factor(&self, rho: T, theta: T, strain_sqr: T) -> T {
        let exponent = half::<T>() * (self.r - T::lit(2.0));
        self.viscosity(rho, theta.max(T::zero())) * (self.eps_const + strain_sqr).powf(exponent)
    }
}

/// `S = μ(ρ, θ⁺)(ε + |D|²)^((r−2)/2) D` with `θ⁺ = max{θ, 0}`.
pub fn stress_tensor<T: Real>(
    p: &ConstitutiveParams<T>,
    rho: T,
    theta: T,
    d: &SymTensor3<T>,
) -> Result<SymTensor3<T>> {
    if !d.is_finite() || !rho.is_finite() || !theta.is_finite() {
        return Err(Error::NonFiniteTensor);
    }
    let s = d.scale(p.stress_factor(rho, theta, d.norm_sqr()));
    if !s.is_finite() {
        return Err(Error::NonFiniteTensor);
    }
    Ok(s)
}

/// `q = κ(ρ) θ^α ∇θ`.
pub fn heat_flux<T: Real>(
    p: &ConstitutiveParams<T>,
    rho: T,
    theta: T,
    grad_theta: &Vec3<T>,
) -> Result<Vec3<T>> {
    if !theta.is_finite() || grad_theta.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("heat flux input"));
    }
    let theta = theta.max(T::zero());
    if theta == T::zero() && p.alpha < T::zero() {
        return Err(Error::SingularFlux);
    }
    let coef = p.conductivity(rho) * theta.powf(p.alpha);
    Ok(grad_theta.map(|g| coef * g))
}

/// Specific heat `c_ν(θ)`.
pub fn cnu_of_theta<T: Real>(p: &ConstitutiveParams<T>, theta: T) -> T {
    let (lo, hi) = (p.cnu_low, p.cnu_high);
    match p.cnu_form {
        SpecificHeatForm::Constant => half::<T>() * (lo + hi),
        SpecificHeatForm::Saturating => {
            let th = theta.max(T::zero());
            lo + (hi - lo) * th / (T::one() + th)
        }
    }
}

/// Thermal part of the internal energy, `Q(θ) = ∫₀^θ c_ν`.
pub fn q_of_theta<T: Real>(p: &ConstitutiveParams<T>, theta: T) -> T {
    let (lo, hi) = (p.cnu_low, p.cnu_high);
    match p.cnu_form {
        SpecificHeatForm::Constant => half::<T>() * (lo + hi) * theta,
        SpecificHeatForm::Saturating => {
            let th = theta.max(T::zero());
            lo * th + (hi - lo) * (th - th.ln_1p())
        }
    }
}

pub fn elastic_potential<T: Real>(p: &ConstitutiveParams<T>, rho: T) -> T {
    match p.elastic_form {
        ElasticPotential::Zero => T::zero(),
        ElasticPotential::Linear => rho,
    }
}

/// `e(ρ, θ) = P_e(ρ) + Q(θ)`.
pub fn internal_energy<T: Real>(p: &ConstitutiveParams<T>, rho: T, theta: T) -> T {
    elastic_potential(p, rho) + q_of_theta(p, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_mu() -> ConstitutiveParams<f64> {
        ConstitutiveParams {
            mu_low: 1.0,
            mu_high: 1.0,
            kappa_low: 1.0,
            kappa_high: 1.0,
            eps_const: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn default_params_are_admissible() {
        let p = ConstitutiveParams::<f64> {
            r: 2.5,
            alpha: 0.0,
            ..Default::default()
        };
        assert!(validate_params(&p).passed());
    }

    #[test]
    fn alpha_on_boundary_rejected() {
        let p = ConstitutiveParams::<f64> {
            alpha: -2.0 / 3.0,
            ..Default::default()
        };
        let report = validate_params(&p);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].message.contains("alpha must exceed -2/3"));
    }

    #[test]
    fn r_equal_two_rejected() {
        let p = ConstitutiveParams::<f64> {
            r: 2.0,
            ..Default::default()
        };
        let report = validate_params(&p);
        assert_eq!(report.violations[0].condition, "r > 2");
        assert!(report.to_string().contains("r must exceed 2"));
    }

    #[test]
    fn all_violations_listed() {
        let p = ConstitutiveParams::<f64> {
            r: 1.5,
            nu: 0.0,
            mu_low: 2.0,
            mu_high: 1.0,
            theta_low: 0.0,
            ..Default::default()
        };
        assert_eq!(validate_params(&p).violations.len(), 4);
    }

    #[test]
    fn zero_strain_gives_zero_stress() {
        let p = ConstitutiveParams::<f64>::default();
        let s = stress_tensor(&p, 1.0, 1.0, &SymTensor3::zero()).unwrap();
        assert_eq!(s, SymTensor3::zero());
    }

    #[test]
    fn cubic_law_hand_value() {
        let p = unit_mu();
        let d = SymTensor3::diag(1.0, -1.0, 0.0);
        let s = stress_tensor(&p, 1.0, 1.0, &d).unwrap();
        let r2 = 2f64.sqrt();
        assert!((s.0[0] - r2).abs() < 1e-15);
        assert!((s.0[1] + r2).abs() < 1e-15);
        assert_eq!(&s.0[2..], &[0.0; 4]);
    }

    #[test]
    fn newtonian_limit_is_linear() {
        // validation is bypassed on purpose: r = 2 is outside the admissible set
        let p = ConstitutiveParams::<f64> {
            r: 2.0,
            eps_const: 0.37,
            ..unit_mu()
        };
        let d = SymTensor3([0.3, -0.1, -0.2, 0.5, 0.7, -0.4]);
        let s = stress_tensor(&p, 1.0, 1.0, &d).unwrap();
        assert_eq!(s, d);
    }

    #[test]
    fn non_finite_strain_rejected() {
        let p = ConstitutiveParams::<f64>::default();
        let d = SymTensor3([f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(stress_tensor(&p, 1.0, 1.0, &d), Err(Error::NonFiniteTensor)));
    }

    #[test]
    fn negative_temperature_truncated_in_stress() {
        let p = ConstitutiveParams::<f64> {
            mu_low: 1.0,
            mu_high: 3.0,
            mu_form: ViscosityForm::ThermalSaturating,
            ..Default::default()
        };
        let d = SymTensor3::diag(0.2, -0.2, 0.0);
        let neg = stress_tensor(&p, 1.0, -5.0, &d).unwrap();
        let zero = stress_tensor(&p, 1.0, 0.0, &d).unwrap();
        assert_eq!(neg, zero);
    }

    #[test]
    fn flux_hand_values() {
        let mut p = unit_mu();
        assert_eq!(heat_flux(&p, 1.0, 3.0, &[0.0; 3]).unwrap(), [0.0; 3]);
        assert_eq!(heat_flux(&p, 1.0, 3.0, &[1.0, 2.0, 3.0]).unwrap(), [1.0, 2.0, 3.0]);
        p.alpha = 2.0;
        assert_eq!(heat_flux(&p, 1.0, 2.0, &[1.0, 0.0, 0.0]).unwrap(), [4.0, 0.0, 0.0]);
    }

    #[test]
    fn flux_singular_at_zero_temperature() {
        let p = ConstitutiveParams::<f64> {
            alpha: -0.5,
            ..Default::default()
        };
        assert!(matches!(
            heat_flux(&p, 1.0, 0.0, &[1.0, 0.0, 0.0]),
            Err(Error::SingularFlux)
        ));
    }

    #[test]
    fn constant_specific_heat_gives_identity_q() {
        let p = ConstitutiveParams::<f64>::default();
        assert_eq!(q_of_theta(&p, 2.75), 2.75);
        assert_eq!(cnu_of_theta(&p, 2.75), 1.0);
    }

    #[test]
    fn saturating_q_matches_closed_form_and_quadrature() {
        let p = ConstitutiveParams::<f64> {
            cnu_low: 1.0,
            cnu_high: 2.0,
            cnu_form: SpecificHeatForm::Saturating,
            ..Default::default()
        };
        let expected = 3.0 + 3.0 - 4f64.ln();
        assert!((q_of_theta(&p, 3.0) - expected).abs() < 1e-14);
        // composite Simpson on c_ν over [0, 3]
        let n = 2000;
        let h = 3.0 / n as f64;
        let mut s = cnu_of_theta(&p, 0.0) + cnu_of_theta(&p, 3.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * cnu_of_theta(&p, i as f64 * h);
        }
        assert!((s * h / 3.0 - expected).abs() < 1e-12);
    }

    #[test]
    fn internal_energy_sums_parts() {
        let mut p = ConstitutiveParams::<f64>::default();
        assert_eq!(internal_energy(&p, 1.3, 5.0), 5.0);
        p.elastic_form = ElasticPotential::Linear;
        assert_eq!(internal_energy(&p, 2.0, 1.0), 3.0);
    }

    fn sym() -> impl Strategy<Value = SymTensor3<f64>> {
        prop::array::uniform6(-3.0..3.0f64).prop_map(SymTensor3)
    }

    fn forms() -> impl Strategy<Value = ConstitutiveParams<f64>> {
        (2.05..5.0f64, 0.0..1.0f64, 0..3usize, -0.6..3.0f64).prop_map(|(r, eps, form, alpha)| {
            ConstitutiveParams {
                r,
                alpha,
                eps_const: eps,
                mu_low: 0.3,
                mu_high: 1.7,
                kappa_low: 0.2,
                kappa_high: 0.9,
                cnu_low: 1.0,
                cnu_high: 2.0,
                mu_form: [
                    ViscosityForm::Constant,
                    ViscosityForm::DensityLinear,
                    ViscosityForm::ThermalSaturating,
                ][form],
                kappa_form: if form == 1 {
                    ConductivityForm::DensityLinear
                } else {
                    ConductivityForm::Constant
                },
                cnu_form: SpecificHeatForm::Saturating,
                ..Default::default()
            }
        })
    }

    proptest! {
        #[test]
        fn stress_of_traceless_is_symmetric_traceless(p in forms(), mut d in sym(), rho in 0.5..2.0f64, th in 0.0..5.0f64) {
            let tr = d.trace() / 3.0;
            d.0[0] -= tr; d.0[1] -= tr; d.0[2] -= tr;
            let s = stress_tensor(&p, rho, th, &d).unwrap();
            prop_assert!(s.trace().abs() < 1e-11 * (1.0 + s.norm_sqr().sqrt()));
        }

        #[test]
        fn stress_bounds_hold(p in forms(), d in sym(), b in sym(), rho in 0.5..2.0f64, th in 0.0..5.0f64) {
            let s = stress_tensor(&p, rho, th, &d).unwrap();
            let n2 = d.norm_sqr();
            let pw = (p.eps_const + n2).powf(0.5 * (p.r - 2.0));
            prop_assert!(s.ddot(&d) >= p.mu_low * pw * n2 - 1e-12 * (1.0 + pw * n2));
            prop_assert!(s.norm_sqr().sqrt() <= p.mu_high * pw * n2.sqrt() + 1e-12 * (1.0 + pw * n2));
            let sb = stress_tensor(&p, rho, th, &b).unwrap();
            prop_assert!(s.sub(&sb).ddot(&d.sub(&b)) >= -1e-10);
        }

        #[test]
        fn energy_split_is_additive(p in forms(), rho in 0.5..2.0f64, th in 0.0..10.0f64, lin in any::<bool>()) {
            let mut p = p;
            p.elastic_form = if lin { ElasticPotential::Linear } else { ElasticPotential::Zero };
            let diff = internal_energy(&p, rho, th) - internal_energy(&p, rho, 0.0);
            prop_assert!((diff - q_of_theta(&p, th)).abs() < 1e-13 * (1.0 + th));
        }

        #[test]
        fn q_is_monotone(p in forms(), t1 in 0.0..10.0f64, dt in 1e-6..5.0f64) {
            prop_assert!(q_of_theta(&p, t1) < q_of_theta(&p, t1 + dt));
        }
    }
}
