use crate::certify::CertifyError;
use crate::ncalgebra::AlgebraError;
use crate::problems::ProblemError;
use crate::rationalize::RationalizeError;
use crate::relaxation::RelaxError;
use crate::sdpsolve::SolveError;
use crate::verifier::VerifyError;

/// Any failure along the relax / solve / rationalize / certify chain.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Rationalize(#[from] RationalizeError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}
