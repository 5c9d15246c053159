pub mod btflat;
pub mod catalog;
pub mod classify;
pub mod curvature;
pub mod error;
pub mod exppoly;
pub mod geometry;
pub mod jet;
pub mod ode;
pub mod operators;
pub mod profiles;
pub mod quadrature;
pub mod roots;
pub mod scalar;

pub use error::{Error, ParseError, Result};
pub use exppoly::{ExpPoly, Exponent};
pub use jet::Jet4;
pub use profiles::{ConformalModel, Domain, MetricSpec, Profile, StructureTag};
pub use scalar::{Coef, Scalar};

/// Exponential polynomial with exact-or-float coefficients.
pub type Poly = ExpPoly<Coef>;
/// Exponential polynomial with exact rational coefficients.
pub type RationalPoly = ExpPoly<num_rational::BigRational>;
/// Exponential polynomial with double-precision coefficients.
pub type FloatPoly = ExpPoly<f64>;
