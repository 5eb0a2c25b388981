//! Dense and correlative-sparse SOHS relaxations: Gram structures over
//! quotient bases, chordal cliques, and standard-form SDP assembly.

mod chordal;
mod gram;
mod problem;
mod sdp;

pub use chordal::{
    chordal_extension, correlation_graph, is_chordal, maximal_cliques, ChordalStrategy, CliqueDecomposition, Graph,
};
pub use gram::{
    build_gram_structure, build_gram_structure_on, build_localizing_structure, build_moment_structure,
    build_polynomial_gram_structure, localizing_degree, BlockRole, GramStructure,
};
pub use problem::{min_relaxation_order, MomentInequality, NpoProblem, Sense};
pub use sdp::{assemble_sdp, AffineConstraint, SdpBlock, SdpData, SdpEntry};

use alloc::string::String;

use crate::ncalgebra::AlgebraError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RelaxError {
    #[error("relaxation order {order} is below the required {needed}")]
    OrderTooLow { order: usize, needed: usize },
    #[error("polynomial is not Hermitian modulo the ideal: {0}")]
    NotHermitian(String),
    #[error("no block can express the word {0}")]
    UncoveredMonomial(String),
    #[error("graph is not chordal")]
    NotChordal,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
