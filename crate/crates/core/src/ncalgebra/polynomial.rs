use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use core::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{VarId, VariableSet, Word};
use crate::scalar::{Rational, Scalar};

/// A finite linear combination of words with Gaussian-rational coefficients.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Word, Scalar>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Polynomial::monomial(Word::one(), c)
    }

    pub fn monomial(w: Word, c: Scalar) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(w, c);
        p
    }

    pub fn var(x: VarId) -> Self {
        Polynomial::monomial(Word::letter(x), Scalar::one())
    }

    pub fn word(w: Word) -> Self {
        Polynomial::monomial(w, Scalar::one())
    }

    pub fn add_term(&mut self, w: Word, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_term_ref(&mut self, w: &Word, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        if let Some(v) = self.terms.get_mut(w) {
            *v += c;
            if v.is_zero() {
                self.terms.remove(w);
            }
        } else {
            self.terms.insert(w.clone(), c.clone());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Word, Scalar> {
        self.terms
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Word, Scalar)>) -> Self {
        let mut p = Polynomial::zero();
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    pub fn coeff(&self, w: &Word) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Length of the longest word; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&Word::one())
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(Scalar::is_real)
    }

    pub fn variables(&self) -> BTreeSet<VarId> {
        self.terms.keys().flat_map(|w| w.letters().iter().copied()).collect()
    }

    pub fn scale(&self, c: &Scalar) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial { terms: self.terms.iter().map(|(w, v)| (w.clone(), v * c)).collect() }
    }

    pub fn scale_rational(&self, r: &Rational) -> Polynomial {
        self.scale(&Scalar::real(r.clone()))
    }

    /// Conjugates coefficients and reverses words.
    pub fn involute(&self) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(w, c)| (w.star(), c.conj())))
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term_ref(w, c);
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term_ref(w, &-c);
        }
        out
    }

    /// Free-algebra product (no reduction).
    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.concat(b), ca * cb);
            }
        }
        out
    }

    pub fn display(&self, vars: &VariableSet) -> String {
        super::text::format_polynomial(self, vars)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, o: &Polynomial) -> Polynomial {
        Polynomial::add(self, o)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        Polynomial::sub(self, o)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        Polynomial::mul(self, o)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Scalar::one())
    }
}
