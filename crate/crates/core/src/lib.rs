//! Exact p-adic series kernels for differential and `(q,h)`-difference
//! equations on discs and annuli of the affine line, with applications to
//! Morita's p-adic Gamma function.
//!
//! The kernels are generic over [`Scalar`]; the aliases below fix the
//! coefficient type to [`PadicScalar`] for everyday use.

pub mod acceptance;
pub mod confluence;
pub mod error;
pub mod gamma;
pub mod matrix;
pub mod padic;
pub mod profiles;
pub mod qcalc;
pub mod radius;
pub mod scalar;
pub mod series;
pub mod strat;

pub use error::{Error, Result};
pub use padic::{norm_of, padic_from_rational, PadicScalar};
pub use radius::{LogRadius, Rat};
pub use scalar::{Dual, RationalScalar, Scalar};
pub use series::{DifferenceOperator, NewtonPolygon, RadiusBracket, Series};

/// Power series over `Q_p` with precision tracking.
pub type PSeries = Series<PadicScalar>;
/// Series with exact rational coefficients, used as an oracle.
pub type ExactSeries = Series<RationalScalar>;
/// `σ_{q,h}` over `Q_p`.
pub type Sigma = DifferenceOperator<PadicScalar>;
