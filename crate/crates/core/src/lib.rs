//! Spherical derivatives of entire and meromorphic functions, exact Brody
//! verdicts for exponential families, canonical products over prescribed
//! zero sets, slow-growth divisors and Nevanlinna characteristics.
//!
//! Everything is generic over the real scalar (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`.
//!
//! ```
//! use brody_core::{classify, Expr};
//! use num_complex::Complex;
//!
//! let f: Expr = "exp(z)+exp(1i*z)".parse().unwrap();
//! let fsharp = brody_core::spherical::sph_deriv(&f, Complex::new(0.0, 1.0)).unwrap();
//! assert!(fsharp > 0.0);
//! let v = classify::classify_two_exponentials(Complex::new(0.0, 1.0));
//! assert_eq!(v.status, classify::BrodyStatus::NotBrody);
//! ```

pub mod algebra;
pub mod classify;
pub mod divisors;
pub mod expr;
pub mod nevanlinna;
pub mod products;
pub mod scalar;
pub mod spherical;

use thiserror::Error;

pub use algebra::{AlgebraError, ExtendedComplex};
pub use classify::{BrodyStatus, ClassifyError};
pub use divisors::DivisorError;
pub use expr::SyntaxError;
pub use nevanlinna::{NevanlinnaError, Normalization};
pub use products::{ProductError, ProductForm};
pub use scalar::Scalar;
pub use spherical::{Analytic, SphericalError};

pub type Complex64 = num_complex::Complex<f64>;
pub type Expr = expr::Expr<f64>;
pub type Polynomial = algebra::Polynomial<f64>;
pub type RationalFunction = algebra::RationalFunction<f64>;
pub type Divisor = divisors::Divisor<f64>;
pub type GrowthBound = divisors::GrowthBound<f64>;
pub type CanonicalProduct = products::CanonicalProduct<f64>;
pub type ExprFunction = spherical::ExprFunction<f64>;
pub type BrodyVerdict = classify::BrodyVerdict<f64>;
pub type SupReport = spherical::SupReport<f64>;
pub type NevanlinnaReport = nevanlinna::NevanlinnaReport<f64>;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Spherical(#[from] SphericalError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Divisor(#[from] DivisorError),
    #[error(transparent)]
    Nevanlinna(#[from] NevanlinnaError),
}

impl Error {
    /// Stable identifier of the error kind, e.g. `"LambdaOne"`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Syntax(_) => "SyntaxError",
            Error::Algebra(e) => e.name(),
            Error::Spherical(e) => e.name(),
            Error::Classify(e) => e.name(),
            Error::Product(e) => e.name(),
            Error::Divisor(e) => e.name(),
            Error::Nevanlinna(e) => e.name(),
        }
    }
}
