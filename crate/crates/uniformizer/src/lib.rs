//! Numerical tools for Fuchsian uniformizations of Riemann surfaces.
//!
//! Conventions: the Poincaré density is λ(z) = 1/(1 − |z|²), so hyperbolic
//! areas computed from λ² d²z carry curvature −4 and are a quarter of the
//! curvature −1 values 2π(2g − 2 + n). Geodesic lengths use curvature −1,
//! ℓ = 2 arccosh(|tr|/2).

pub mod analysis;
pub mod dimensions;
pub mod error;
pub mod factors;
pub mod families;
pub mod fuchsian;
pub mod moebius;
pub mod quadrature;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// A value with an absolute error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

impl<T> Estimate<T> {
    pub fn new(value: T, error: f64) -> Self {
        Estimate { value, error }
    }
}
