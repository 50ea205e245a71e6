pub mod coneengine;
pub mod fiberlab;
pub mod numkernel;
pub mod polyring;
pub mod qmodule;
pub mod scalar;
pub mod seqlab;

pub use num_rational::BigRational;
pub use scalar::Scalar;

/// Exact rational scalars.
pub type Rational = BigRational;
/// Polynomials with exact rational coefficients.
pub type QPolynomial = polyring::Polynomial<BigRational>;
/// Floating-point polynomials, for evaluation and sampling.
pub type FPolynomial = polyring::Polynomial<f64>;
pub type F32Polynomial = polyring::Polynomial<f32>;
pub type QCone = coneengine::TruncatedCone<BigRational>;
pub type FCone = coneengine::TruncatedCone<f64>;
pub type QPoint = seqlab::AppendixPoint<BigRational>;
pub type FPoint = seqlab::AppendixPoint<f64>;
