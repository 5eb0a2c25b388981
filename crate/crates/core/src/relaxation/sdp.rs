use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;

use super::{BlockRole, GramStructure, NpoProblem, RelaxError};
use crate::ncalgebra::Word;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdpBlock {
    pub label: String,
    pub dim: usize,
    pub complex: bool,
    pub role: BlockRole,
}

/// `coeff · G[block][row][col]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdpEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub coeff: Scalar,
}

/// `Σ entries = rhs (+ λ when lambda is set)`: the coefficient of `word` in
/// `λ - f` must equal its coefficient in the block sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineConstraint {
    pub word: Word,
    pub entries: Vec<SdpEntry>,
    pub rhs: Scalar,
    pub lambda: bool,
}

/// Standard-form data: minimize `λ` subject to the affine constraints and
/// every block being PSD. One constraint per word orbit `{t, 𝒩(t*)}`; the
/// partner constraint is its conjugate under Hermitian blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdpData {
    pub blocks: Vec<SdpBlock>,
    pub constraints: Vec<AffineConstraint>,
    pub order: usize,
    pub metadata: BTreeMap<String, String>,
}

impl SdpData {
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }
}

pub fn assemble_sdp(structures: &[GramStructure], p: &NpoProblem, d: usize) -> Result<SdpData, RelaxError> {
    let rs = &p.rewrite;
    let f = p.canonical_objective();
    let complex_data = !f.is_real()
        || p.inequalities.iter().any(|g| !g.is_real())
        || p.moment_inequalities.iter().any(|m| !m.poly.is_real());
    let mut by_word: BTreeMap<Word, Vec<SdpEntry>> = BTreeMap::new();
    let mut blocks = Vec::with_capacity(structures.len());
    for (k, s) in structures.iter().enumerate() {
        blocks.push(SdpBlock { label: s.label.clone(), dim: s.dim(), complex: complex_data || s.is_complex(), role: s.role });
        for r in 0..s.dim() {
            for c in 0..s.dim() {
                for (w, coeff) in s.entry(r, c).terms() {
                    by_word.entry(w.clone()).or_default().push(SdpEntry { block: k, row: r, col: c, coeff: coeff.clone() });
                }
            }
        }
    }
    for (w, _) in f.terms() {
        if !by_word.contains_key(w) {
            return Err(RelaxError::UncoveredMonomial(w.display(p.vars())));
        }
    }
    by_word.entry(Word::one()).or_default();
    let mut constraints = Vec::new();
    for (w, entries) in by_word {
        let partner = rs.reduce_word(&w.star()).1;
        if partner < w {
            continue;
        }
        let rhs = -f.coeff(&w);
        let lambda = w.is_one();
        if entries.is_empty() && rhs.is_zero() && !lambda {
            continue;
        }
        constraints.push(AffineConstraint { word: w, entries, rhs, lambda });
    }
    let mut metadata = BTreeMap::new();
    metadata.insert(String::from("lambda"), String::from("constant-word constraint"));
    Ok(SdpData { blocks, constraints, order: d, metadata })
}
