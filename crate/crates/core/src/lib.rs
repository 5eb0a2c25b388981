//! Exact certification of upper bounds for non-commutative polynomial
//! optimization problems.
//!
//! The crate builds sum-of-Hermitian-squares relaxations over quotient
//! algebras, solves them with a dense interior-point method, and turns the
//! floating-point Gram matrices into exact rational certificates that the
//! [`verifier`] module re-checks without trusting the rest of the pipeline.
//!
//! Everything here is `no_std` + `alloc`. File formats, the command line and
//! timing live in the companion `certibound` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod certify;
pub mod error;
pub mod exact;
pub mod linalg;
pub mod matrix;
pub mod ncalgebra;
pub mod pipeline;
pub mod problems;
pub mod rationalize;
pub mod relaxation;
pub mod scalar;
pub mod sdpsolve;
pub mod verifier;

pub use error::Error;
pub use matrix::HermitianMatrix;
pub use ncalgebra::{
    Polynomial, QuotientBasis, RewriteSystem, RuleFamily, VarId, Variable, VariableSet, Word,
};
pub use scalar::{Rational, Scalar};
