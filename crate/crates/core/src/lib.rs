//! Schur–Weyl functors, Borel–Weil–Bott cohomology on flag varieties, and a
//! rule-based engine for geometric acyclicity and positivity.
//!
//! The linear algebra is generic over an exact [`scalar::Field`]; the aliases
//! below fix the types the rest of the crate and the CLI use.

pub mod bwb;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod partitions;
pub mod scalar;
pub mod schur;
pub mod symalg;

pub use error::{Error, Result};
pub use partitions::{Cell, Partition};

/// Arbitrary-precision rationals; the default scalar everywhere.
pub type Rational = num_rational::BigRational;
/// Machine-word rationals, adequate for small symmetrizers.
pub type SmallRational = num_rational::Rational64;

pub type RationalMatrix = linalg::Matrix<Rational>;
pub type GroupAlgebra = symalg::GroupAlgebraElement<Rational>;
pub type RationalSchurModule = schur::SchurModule<Rational>;
