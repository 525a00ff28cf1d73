//! Spectra of non-hermitean operators with an anti-unitary symmetry,
//! classified into Wigner's representation types.
//!
//! Start with [`classifier::classify`]: it takes a matrix (or tridiagonal
//! operator) `H`, an [`AntiUnitaryOp`] `A` commuting with it, and returns the
//! multiplicities `N*`, `N₋`, `N₊`, `n₊` together with the states of every
//! block.

// `!(x <= tol)` is used on purpose throughout: NaN must fail a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antiunitary;
pub mod classifier;
pub mod config;
pub mod error;
pub mod io;
pub mod linalg;
pub mod models;
pub mod sweep;

pub use antiunitary::AntiUnitaryOp;
pub use classifier::{classify, ClassificationReport, Multiplicities, RepBlock, RepKind};
pub use config::Tolerances;
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, SpectralOperator, Tridiagonal};
