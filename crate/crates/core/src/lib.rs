//! Spectral Galerkin simulator for incompressible MHD with variable
//! density, heat conduction and power-law viscosity on the periodic box.
//!
//! Velocity and magnetic field are expanded in divergence-free Fourier
//! modes, the temperature in scalar Fourier modes, and the density lives on
//! the quadrature grid. The numerical core is generic over [`scalar::Real`];
//! the aliases below fix it to `f64`, which is what the [`harness`] uses.
//!
//! ```
//! use mhd_galerkin::{harness, System};
//!
//! let cfg = harness::shipped_config("single-mode-decay").unwrap();
//! let sys: System = harness::build_system(&cfg).unwrap();
//! assert_eq!(sys.truncation().k_h, 16);
//! ```

pub mod constitutive;
pub mod diagnostics;
pub mod error;
pub mod galerkin;
pub mod harness;
pub mod integrator;
pub mod linalg;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};

pub type Params = constitutive::ConstitutiveParams<f64>;
pub type Basis = spectral::SpectralBasis<f64>;
pub type System = galerkin::GalerkinSystem<f64>;
pub type State = galerkin::SimState<f64>;
pub type Truncation = galerkin::Truncation<f64>;
pub type StepConfig = integrator::StepConfig<f64>;
pub type Record = diagnostics::DiagnosticsRecord<f64>;
pub type Monitor = diagnostics::DiagnosticsMonitor<f64>;
