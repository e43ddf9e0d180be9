//! Exact laboratory for gauge (McShane), Pettis, empirical-mean and Bochner
//! integration of functions `[0,1] → X` with `X` a truncated sequence or
//! step-function space.
//!
//! The core is generic over [`scalar::Scalar`]; the aliases below fix the
//! exact rational and `f64` instantiations.

pub mod dyadic;
pub mod error;
pub mod gallery;
pub mod gauge;
pub mod integrand;
pub mod integrators;
pub mod partition;
pub mod region;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod stability;
pub mod values;

pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use gauge::Gauge;
pub use region::{Interval, Region};
pub use scalar::Scalar;

pub type Rational = num_rational::BigRational;

pub type ExactVector = values::VectorValue<Rational>;
pub type FloatVector = values::VectorValue<f64>;
pub type ExactIntegrand = integrand::IntegrandFn<Rational>;
pub type FloatIntegrand = integrand::IntegrandFn<f64>;
pub type ExactFunctional = values::DualFunctional<Rational>;
pub type FloatFunctional = values::DualFunctional<f64>;
pub type ExactEstimate = integrators::IntegralEstimate<Rational>;
pub type FloatEstimate = integrators::IntegralEstimate<f64>;
