//! Numerical tools for deciding whether the spectrum of an operator is
//! invariant under rotation by the d-th roots of unity, by two independent
//! routes: the eigenvalue multiplicities themselves, and the vanishing of
//! `Trace A^n` for every `n` not divisible by `d`.
//!
//! The crate also carries the machinery that connects the two routes:
//! Riesz projections and the polynomial functional calculus by contour
//! quadrature, orbit algebra for sums of powers, and finite sections of
//! nuclear operators on sequence spaces.

// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive
// values; index loops mirror the textbook form of the factorizations.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod campaign;
pub mod error;
pub mod generators;
pub mod matrix;
pub mod nuclear;
pub mod par;
pub mod poly;
pub mod riesz;
pub mod spectrum;
pub mod symmetry;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, SchattenNorms};
pub use par::Execution;
pub use poly::Polynomial;
pub use spectrum::DistinctSpectrum;
