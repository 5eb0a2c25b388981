use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{VarId, VariableSet};

/// A monomial in the free *-monoid: a sequence of self-adjoint letters.
///
/// Ordered graded-lexicographically: shorter words first, then by letter ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<VarId>);

impl Word {
    pub fn one() -> Self {
        Word(Vec::new())
    }

    pub fn letter(x: VarId) -> Self {
        Word(alloc::vec![x])
    }

    pub fn from_letters(letters: Vec<VarId>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[VarId] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<VarId> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// The involution: letters are self-adjoint, so `w*` is `w` reversed.
    pub fn star(&self) -> Word {
        let mut v = self.0.clone();
        v.reverse();
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// `self* · other` as a letter vector, the shape of every Gram entry.
    pub fn star_concat(&self, other: &Word) -> Vec<VarId> {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend(self.0.iter().rev());
        v.extend_from_slice(&other.0);
        v
    }

    pub fn display(&self, vars: &VariableSet) -> String {
        if self.0.is_empty() {
            return String::from("1");
        }
        let mut s = String::new();
        for (k, &x) in self.0.iter().enumerate() {
            if k > 0 {
                s.push('*');
            }
            s.push_str(vars.label(x));
        }
        s
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<VarId>> for Word {
    fn from(v: Vec<VarId>) -> Self {
        Word(v)
    }
}
