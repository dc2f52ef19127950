//! Dynamics of weighted generalized backward shifts on Köthe coechelon spaces.
//!
//! Every question about `B_{w,ψ}` on `k_p(V)` is transported to the plain backward
//! shift on the conjugated weights `u^{(m)}_p = v^{(m)}_{χ(p)} / ∏_{l ≤ p} |w_{χ(l)}|`
//! and decided there from weight conditions, backed by structural hints.

// `!(a < b)` deliberately treats NaN as a failed comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod conjugacy;
pub mod dsl;
pub mod error;
pub mod exponent;
pub mod family;
pub mod gallery;
pub mod hints;
pub mod orbit;
pub mod scalar;
mod serde_log;
pub mod sets;
pub mod symbol;
pub mod vector;
pub mod verdict;
pub mod weight;

pub use conjugacy::{apply_generalized_shift, conjugate_family, transform, Direction, WeightSequence};
pub use error::{Error, Result};
pub use exponent::Exponent;
pub use family::{IndexKind, WeightFamily};
pub use hints::Hint;
pub use scalar::Scalar;
pub use symbol::Symbol;
pub use vector::TruncatedVector;
pub use verdict::{Certificate, Status, Verdict, Window};
pub use weight::LogWeight;

/// Exact rational scalars.
pub type Rational = num_rational::BigRational;
/// Coefficient vectors in exact rational mode.
pub type RatVector = TruncatedVector<Rational>;
/// Coefficient vectors in `f64` mode.
pub type FloatVector = TruncatedVector<f64>;
/// Coefficient vectors in `f32` mode.
pub type Float32Vector = TruncatedVector<f32>;
