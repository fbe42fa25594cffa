use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{Field, SpectralBasis};

/// Mode counts for each unknown and the artificial density diffusion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Truncation<T> {
    pub k_u: usize,
    pub k_theta: usize,
    pub k_h: usize,
    pub eps_density: T,
}

impl<T: Real> Default for Truncation<T> {
    fn default() -> Self {
        Self::uniform(16, T::zero())
    }
}

impl<T: Real> Truncation<T> {
    pub fn uniform(k: usize, eps_density: T) -> Self {
        Self {
            k_u: k,
            k_theta: k,
            k_h: k,
            eps_density,
        }
    }
}

/// Density on the quadrature grid plus velocity, temperature and magnetic
/// coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState<T> {
    pub t: T,
    pub rho: Vec<T>,
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub c: Vec<T>,
}

impl<T: Real> SimState<T> {
    pub fn new(rho: Vec<T>, a: Vec<T>, b: Vec<T>, c: Vec<T>) -> Self {
        Self {
            t: T::zero(),
            rho,
            a,
            b,
            c,
        }
    }

    pub fn rho_field(&self, grid: usize) -> Result<Field<T>> {
        Field::scalar(grid, self.rho.clone())
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && [&self.rho, &self.a, &self.b, &self.c]
                .iter()
                .all(|v| v.iter().all(|x| x.is_finite()))
    }

    /// Largest absolute entry over all unknowns.
    pub fn max_norm(&self) -> T {
        [&self.rho, &self.a, &self.b, &self.c]
            .iter()
            .map(|v| crate::scalar::max_abs(v))
            .fold(T::zero(), |m, x| if x.is_nan() { x } else { m.max(x) })
    }

    pub fn rho_bounds(&self) -> (T, T) {
        self.rho.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &r| {
            (lo.min(r), hi.max(r))
        })
    }

    pub fn check_shape(&self, basis: &SpectralBasis<T>, trunc: &Truncation<T>) -> Result<()> {
        if self.rho.len() != basis.points() {
            return Err(Error::ResolutionMismatch(self.rho.len(), basis.points()));
        }
        for (name, got, want) in [
            ("velocity coefficients", self.a.len(), trunc.k_u),
            ("temperature coefficients", self.b.len(), trunc.k_theta),
            ("magnetic coefficients", self.c.len(), trunc.k_h),
        ] {
            if got != want {
                return Err(Error::Precondition(format!("{name}: expected {want}, got {got}")));
            }
        }
        Ok(())
    }
}
