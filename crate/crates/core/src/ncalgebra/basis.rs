use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{RewriteSystem, VarId, Word};

/// Irreducible words up to a degree, in graded-lex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientBasis {
    words: Vec<Word>,
    index: BTreeMap<Word, usize>,
    degree: usize,
}

impl QuotientBasis {
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn position(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn into_words(self) -> Vec<Word> {
        self.words
    }
}

/// Enumerates the reduced words of length `<= d` over `vars`.
///
/// Irreducible words are closed under prefixes, so extending the previous
/// layer letter by letter reaches all of them.
pub fn quotient_basis(rs: &RewriteSystem, vars: &[VarId], d: usize) -> QuotientBasis {
    let mut vs = vars.to_vec();
    vs.sort_unstable();
    vs.dedup();
    let mut words = alloc::vec![Word::one()];
    let mut layer = alloc::vec![Word::one()];
    for _ in 0..d {
        let mut next = Vec::new();
        for w in &layer {
            for &x in &vs {
                if rs.extends_irreducibly(w.letters(), x) {
                    let mut l = w.letters().to_vec();
                    l.push(x);
                    next.push(Word::from_letters(l));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        words.extend(next.iter().cloned());
        layer = next;
    }
    let index = words.iter().enumerate().map(|(k, w)| (w.clone(), k)).collect();
    QuotientBasis { words, index, degree: d }
}

/// `s_{n,d}`, the number of words of length `<= d` in `n` free letters.
pub fn dense_basis_size(n: u64, d: u32) -> u128 {
    if n == 1 {
        return d as u128 + 1;
    }
    let n = n as u128;
    (n.pow(d + 1) - 1) / (n - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncalgebra::VariableSet;

    #[test]
    fn sizes() {
        assert_eq!(dense_basis_size(2, 2), 7);
        assert_eq!(dense_basis_size(1, 4), 5);
        assert_eq!(dense_basis_size(4, 2), 21);
        let vars = VariableSet::from_labels([("x", None), ("y", None)]).unwrap();
        let rs = RewriteSystem::free(vars);
        assert_eq!(quotient_basis(&rs, &[0, 1], 2).len(), 7);
    }

    #[test]
    fn unipotent_collapse() {
        let vars = VariableSet::from_labels([("X", None)]).unwrap();
        let rs = RewriteSystem::builder(vars).unipotent(&[0]).build().unwrap();
        let b = quotient_basis(&rs, &[0], 3);
        assert_eq!(b.words(), &[Word::one(), Word::letter(0)]);
    }
}
