//! Non-commutative polynomials with involution and normal forms modulo
//! binomial ideals.

mod basis;
mod polynomial;
mod rewrite;
mod text;
mod variable;
mod word;

pub use basis::{dense_basis_size, quotient_basis, QuotientBasis};
pub use polynomial::Polynomial;
pub use rewrite::{Rule, RuleFamily, RewriteSystem, RewriteSystemBuilder, VariableFamily};
pub use text::{parse_polynomial, parse_word};
pub use variable::{VarId, Variable, VariableSet};
pub use word::Word;

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("duplicate variable label {0:?}")]
    DuplicateLabel(String),
    #[error("rule coefficient {0} does not have unit modulus")]
    NonUnitCoefficient(String),
    #[error("rule {lhs} -> {rhs} is not decreasing in the graded order")]
    NonDecreasingRule { lhs: String, rhs: String },
    #[error("conflicting rules for {0}")]
    ConflictingRules(String),
    #[error("rewrite system is not confluent at overlap {0}")]
    NotConfluent(String),
    #[error("rule family needs {0}")]
    InvalidFamily(String),
    #[error("parse error: {0}")]
    Parse(String),
}
