use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::One;

use super::{min_relaxation_order, NpoProblem, RelaxError};
use crate::ncalgebra::{quotient_basis, Polynomial, RewriteSystem, VarId, Word};
use crate::scalar::Scalar;

/// What a PSD block stands for in the certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BlockRole {
    /// An SOHS Gram block; blocks sharing a sector are lifted together.
    Gram { sector: usize },
    /// Multiplier block of operator inequality `g_i`.
    Localizer { inequality: usize },
    /// Scalar multiplier `κ_i` of a moment inequality.
    Moment { index: usize },
}

impl BlockRole {
    pub fn is_gram(&self) -> bool {
        matches!(self, BlockRole::Gram { .. })
    }
}

/// One PSD block: its basis and the reduced polynomial `𝒩(b_α* g b_β)`
/// contributed by entry `(α, β)` (with `g = 1` for Gram blocks).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramStructure {
    pub label: String,
    pub role: BlockRole,
    basis: Vec<Polynomial>,
    monomial: bool,
    entries: Vec<Polynomial>,
}

impl GramStructure {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Polynomial] {
        &self.basis
    }

    /// Basis words, when every basis element is a bare word.
    pub fn basis_words(&self) -> Option<Vec<Word>> {
        if !self.monomial {
            return None;
        }
        Some(self.basis.iter().map(|p| p.terms().next().map(|(w, _)| w.clone()).unwrap_or_default()).collect())
    }

    pub fn is_monomial(&self) -> bool {
        self.monomial
    }

    pub fn entry(&self, a: usize, b: usize) -> &Polynomial {
        &self.entries[a * self.dim() + b]
    }

    /// Whether any entry carries a non-real coefficient (complex Hermitian block).
    pub fn is_complex(&self) -> bool {
        self.entries.iter().any(|p| !p.is_real())
    }

    pub fn words(&self) -> BTreeSet<Word> {
        self.entries.iter().flat_map(|p| p.terms().map(|(w, _)| w.clone())).collect()
    }

    /// Position of the identity word in a monomial basis.
    pub fn constant_position(&self) -> Option<usize> {
        self.basis_words()?.iter().position(Word::is_one)
    }
}

fn monomial_structure(rs: &RewriteSystem, basis: Vec<Word>, g: Option<&Polynomial>, label: String, role: BlockRole) -> GramStructure {
    let n = basis.len();
    let mut entries = Vec::with_capacity(n * n);
    for a in &basis {
        for b in &basis {
            let e = match g {
                None => {
                    let (c, w) = rs.reduce_star_product(a, b);
                    Polynomial::monomial(w, c)
                }
                Some(g) => rs.reduce_sandwich(a, g, b),
            };
            entries.push(e);
        }
    }
    let basis = basis.into_iter().map(Polynomial::word).collect();
    GramStructure { label, role, basis, monomial: true, entries }
}

/// Dense SOHS Gram structure over all variables at order `d`.
pub fn build_gram_structure(p: &NpoProblem, d: usize) -> Result<GramStructure, RelaxError> {
    let needed = min_relaxation_order(p);
    if d < needed {
        return Err(RelaxError::OrderTooLow { order: d, needed });
    }
    let vars: Vec<VarId> = p.vars().ids().collect();
    Ok(build_gram_structure_on(p, &vars, d, String::from("gram"), 0))
}

/// SOHS Gram structure on a subset of variables (a clique).
pub fn build_gram_structure_on(p: &NpoProblem, vars: &[VarId], d: usize, label: String, sector: usize) -> GramStructure {
    let basis = quotient_basis(&p.rewrite, vars, d).into_words();
    monomial_structure(&p.rewrite, basis, None, label, BlockRole::Gram { sector })
}

/// Gram structure over an explicit polynomial basis (e.g. a symmetry-adapted one).
/// Entry `(i, j)` is `Σ conj(b_iα) b_jβ 𝒩(α* β)`.
pub fn build_polynomial_gram_structure(rs: &RewriteSystem, basis: Vec<Polynomial>, label: String, sector: usize) -> GramStructure {
    let n = basis.len();
    let mut entries = Vec::with_capacity(n * n);
    for pi in &basis {
        for pj in &basis {
            let mut e = Polynomial::zero();
            for (a, ca) in pi.terms() {
                for (b, cb) in pj.terms() {
                    let (c, w) = rs.reduce_star_product(a, b);
                    e.add_term(w, &(&ca.conj() * cb) * &c);
                }
            }
            entries.push(e);
        }
    }
    let monomial = basis.iter().all(|p| p.len() == 1 && p.terms().all(|(_, c)| c.is_one()));
    GramStructure { label, role: BlockRole::Gram { sector }, basis, monomial, entries }
}

/// `⌊(d - deg g)/2⌋`, or `None` when negative.
pub fn localizing_degree(d: usize, deg_g: usize) -> Option<usize> {
    d.checked_sub(deg_g).map(|x| x / 2)
}

/// Localizing structure for inequality `i` on the given variables.
pub fn build_localizing_structure(p: &NpoProblem, i: usize, d: usize, vars: Option<&[VarId]>) -> Result<GramStructure, RelaxError> {
    let g = p
        .inequalities
        .get(i)
        .ok_or_else(|| RelaxError::Invalid(format!("no inequality #{i}")))?;
    let di = localizing_degree(d, g.degree()).ok_or(RelaxError::OrderTooLow { order: d, needed: g.degree() })?;
    let all: Vec<VarId> = p.vars().ids().collect();
    let basis = quotient_basis(&p.rewrite, vars.unwrap_or(&all), di).into_words();
    Ok(monomial_structure(&p.rewrite, basis, Some(g), format!("localizer[{i}]"), BlockRole::Localizer { inequality: i }))
}

/// The 1×1 block of moment inequality `i`: entry `𝒩(m - lower)`.
pub fn build_moment_structure(p: &NpoProblem, i: usize) -> Result<GramStructure, RelaxError> {
    let m = p
        .moment_inequalities
        .get(i)
        .ok_or_else(|| RelaxError::Invalid(format!("no moment inequality #{i}")))?;
    let e = m.poly.sub(&Polynomial::constant(Scalar::real(m.lower.clone())));
    Ok(GramStructure {
        label: format!("moment[{i}]"),
        role: BlockRole::Moment { index: i },
        basis: alloc::vec![Polynomial::one()],
        monomial: true,
        entries: alloc::vec![p.rewrite.reduce(&e)],
    })
}
