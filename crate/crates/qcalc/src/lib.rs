//! Numerical q-calculus on geometric lattices, with verifiers for
//! Opial-type integral inequalities.
//!
//! The crate has three layers:
//!
//! - [`lattice`]: the q-geometric partition `b, bq, ..., bq^n`, functions
//!   tabulated on it, the q-derivative, and the Jackson and restricted
//!   q-integrals;
//! - [`inequalities`]: verifiers that evaluate both sides of each
//!   inequality on concrete lattice functions and report margins, ratios,
//!   and verdicts;
//! - [`explore`]: seeded random generation of hypothesis-satisfying
//!   functions, stochastic tightness search, and hypothesis-necessity
//!   probes.
//!
//! Everything is generic over [`scalar::Scalar`], with a double-precision
//! backend and an exact big-rational backend, so any float result can be
//! cross-checked against exact arithmetic.

pub mod explore;
pub mod inequalities;
pub mod lattice;
pub mod scalar;

pub use inequalities::{
    ExponentParams, InequalityId, RatioValue, VerificationReport, VerifyError, VerifyOptions,
};
pub use lattice::{
    JacksonOptions, LatticeDerivative, LatticeError, LatticeFunction, QLatticePartition,
};
pub use scalar::{BackendKind, Exponent, Scalar, ScalarError};
