use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::One;

use super::{AlgebraError, Polynomial, VarId, VariableSet, Word};
use crate::scalar::Scalar;

const NONE: u32 = u32::MAX;

/// The rule families a problem can declare. Each expands to binomial word
/// rules `lhs -> coeff * rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleFamily {
    /// `x² -> 1`
    Unipotent(Vec<VarId>),
    /// `x² -> x`
    Projector(Vec<VarId>),
    /// Variables with distinct group tags commute; letters are sorted by (group, id).
    CommutingPartition,
    /// One spin-½ site: `σᵃσᵇ -> δ_ab + i ε_abc σᶜ`.
    PauliSite { x: VarId, y: VarId, z: VarId },
    /// A user rule; must be length-non-increasing and confluent with the rest.
    Binomial { lhs: Word, coeff: Scalar, rhs: Word },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Vec<VarId>,
    pub coeff: Scalar,
    pub rhs: Vec<VarId>,
    phase: Option<u8>,
    user: bool,
}

/// What `x²` reduces to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariableFamily {
    Unipotent,
    Projector,
    Free,
}

#[derive(Debug, Clone)]
pub struct RewriteSystemBuilder {
    vars: VariableSet,
    families: Vec<RuleFamily>,
}

impl RewriteSystemBuilder {
    pub fn family(mut self, f: RuleFamily) -> Self {
        self.families.push(f);
        self
    }

    pub fn unipotent(self, ids: &[VarId]) -> Self {
        self.family(RuleFamily::Unipotent(ids.to_vec()))
    }

    pub fn projector(self, ids: &[VarId]) -> Self {
        self.family(RuleFamily::Projector(ids.to_vec()))
    }

    pub fn commuting_partition(self) -> Self {
        self.family(RuleFamily::CommutingPartition)
    }

    pub fn pauli_site(self, x: VarId, y: VarId, z: VarId) -> Self {
        self.family(RuleFamily::PauliSite { x, y, z })
    }

    pub fn binomial(self, lhs: Word, coeff: Scalar, rhs: Word) -> Self {
        self.family(RuleFamily::Binomial { lhs, coeff, rhs })
    }

    pub fn build(self) -> Result<RewriteSystem, AlgebraError> {
        RewriteSystem::new(self.vars, self.families)
    }
}

/// Normal-form engine for a binomial ideal.
///
/// Words are reduced left to right against a stack; every rule strictly
/// decreases the graded order on letter keys `(group, id)`, so reduction
/// terminates, and confluence makes the result independent of the order in
/// which redexes are contracted.
#[derive(Debug, Clone)]
pub struct RewriteSystem {
    vars: VariableSet,
    families: Vec<RuleFamily>,
    rules: Vec<Rule>,
    n: usize,
    unary: Vec<u32>,
    pair: Vec<u32>,
    long: BTreeMap<Vec<VarId>, u32>,
    long_lens: Vec<usize>,
}

impl RewriteSystem {
    pub fn builder(vars: VariableSet) -> RewriteSystemBuilder {
        RewriteSystemBuilder { vars, families: Vec::new() }
    }

    /// The free algebra: no rules at all.
    pub fn free(vars: VariableSet) -> Self {
        RewriteSystem::new(vars, Vec::new()).expect("empty rule set is always valid")
    }

    pub fn new(vars: VariableSet, families: Vec<RuleFamily>) -> Result<Self, AlgebraError> {
        let n = vars.len();
        let mut rs = RewriteSystem {
            vars,
            families: Vec::new(),
            rules: Vec::new(),
            n,
            unary: vec![NONE; n],
            pair: vec![NONE; n * n],
            long: BTreeMap::new(),
            long_lens: Vec::new(),
        };
        let mut has_user = false;
        for fam in &families {
            for r in rs.expand(fam)? {
                has_user |= r.user;
                rs.insert(r)?;
            }
        }
        rs.families = families;
        rs.long_lens.sort_unstable();
        rs.long_lens.dedup();
        if has_user {
            rs.check_confluence()?;
        }
        Ok(rs)
    }

    fn check_var(&self, x: VarId) -> Result<(), AlgebraError> {
        if self.vars.contains(x) {
            Ok(())
        } else {
            Err(AlgebraError::UnknownVariable(format!("#{x}")))
        }
    }

    fn key(&self, x: VarId) -> (u32, VarId) {
        (self.vars.group(x).unwrap_or(u32::MAX), x)
    }

    fn decreasing(&self, lhs: &[VarId], rhs: &[VarId]) -> bool {
        if lhs.len() != rhs.len() {
            return lhs.len() > rhs.len();
        }
        for (a, b) in lhs.iter().zip(rhs) {
            let (ka, kb) = (self.key(*a), self.key(*b));
            if ka != kb {
                return ka > kb;
            }
        }
        false
    }

    fn expand(&self, fam: &RuleFamily) -> Result<Vec<Rule>, AlgebraError> {
        let mk = |lhs: Vec<VarId>, coeff: Scalar, rhs: Vec<VarId>| {
            let phase = coeff.as_i_power();
            Rule { lhs, coeff, rhs, phase, user: false }
        };
        let mut out = Vec::new();
        match fam {
            RuleFamily::Unipotent(ids) => {
                for &x in ids {
                    self.check_var(x)?;
                    out.push(mk(vec![x, x], Scalar::one(), vec![]));
                }
            }
            RuleFamily::Projector(ids) => {
                for &x in ids {
                    self.check_var(x)?;
                    out.push(mk(vec![x, x], Scalar::one(), vec![x]));
                }
            }
            RuleFamily::CommutingPartition => {
                for a in self.vars.iter() {
                    for b in self.vars.iter() {
                        if let (Some(ga), Some(gb)) = (a.group, b.group) {
                            if ga > gb {
                                out.push(mk(vec![a.id, b.id], Scalar::one(), vec![b.id, a.id]));
                            }
                        }
                    }
                }
            }
            RuleFamily::PauliSite { x, y, z } => {
                let (x, y, z) = (*x, *y, *z);
                for v in [x, y, z] {
                    self.check_var(v)?;
                }
                if x == y || y == z || x == z {
                    return Err(AlgebraError::InvalidFamily(String::from("three distinct Pauli variables")));
                }
                let i = Scalar::i();
                let mi = -Scalar::i();
                for v in [x, y, z] {
                    out.push(mk(vec![v, v], Scalar::one(), vec![]));
                }
                for (a, b, c) in [(x, y, z), (y, z, x), (z, x, y)] {
                    out.push(mk(vec![a, b], i.clone(), vec![c]));
                    out.push(mk(vec![b, a], mi.clone(), vec![c]));
                }
            }
            RuleFamily::Binomial { lhs, coeff, rhs } => {
                for &v in lhs.letters().iter().chain(rhs.letters()) {
                    self.check_var(v)?;
                }
                if lhs.is_empty() {
                    return Err(AlgebraError::InvalidFamily(String::from("a non-empty left-hand side")));
                }
                if !coeff.is_unit() {
                    return Err(AlgebraError::NonUnitCoefficient(format!("{coeff}")));
                }
                if !self.decreasing(lhs.letters(), rhs.letters()) {
                    return Err(AlgebraError::NonDecreasingRule {
                        lhs: lhs.display(&self.vars),
                        rhs: rhs.display(&self.vars),
                    });
                }
                let mut r = mk(lhs.letters().to_vec(), coeff.clone(), rhs.letters().to_vec());
                r.user = true;
                out.push(r);
            }
        }
        Ok(out)
    }

    fn lookup(&self, lhs: &[VarId]) -> Option<usize> {
        let r = match lhs.len() {
            1 => self.unary[lhs[0] as usize],
            2 => self.pair[lhs[0] as usize * self.n + lhs[1] as usize],
            _ => self.long.get(lhs).copied().unwrap_or(NONE),
        };
        (r != NONE).then_some(r as usize)
    }

    fn insert(&mut self, r: Rule) -> Result<(), AlgebraError> {
        if let Some(k) = self.lookup(&r.lhs) {
            let old = &self.rules[k];
            if old.coeff == r.coeff && old.rhs == r.rhs {
                if r.user {
                    self.rules[k].user = true;
                }
                return Ok(());
            }
            return Err(AlgebraError::ConflictingRules(Word::from_letters(r.lhs).display(&self.vars)));
        }
        let idx = self.rules.len() as u32;
        match r.lhs.len() {
            1 => self.unary[r.lhs[0] as usize] = idx,
            2 => self.pair[r.lhs[0] as usize * self.n + r.lhs[1] as usize] = idx,
            l => {
                self.long.insert(r.lhs.clone(), idx);
                self.long_lens.push(l);
            }
        }
        self.rules.push(r);
        Ok(())
    }

    /// A rule whose left-hand side is a suffix of `w`.
    fn suffix_rule(&self, w: &[VarId]) -> Option<usize> {
        let k = w.len();
        if k == 0 {
            return None;
        }
        let r = self.unary[w[k - 1] as usize];
        if r != NONE {
            return Some(r as usize);
        }
        if k >= 2 {
            let r = self.pair[w[k - 2] as usize * self.n + w[k - 1] as usize];
            if r != NONE {
                return Some(r as usize);
            }
        }
        for &l in &self.long_lens {
            if l > k {
                break;
            }
            if let Some(&r) = self.long.get(&w[k - l..]) {
                return Some(r as usize);
            }
        }
        None
    }

    fn check_confluence(&self) -> Result<(), AlgebraError> {
        for (i1, r1) in self.rules.iter().enumerate() {
            for (i2, r2) in self.rules.iter().enumerate() {
                if !(r1.user || r2.user) {
                    continue;
                }
                let (l1, l2) = (r1.lhs.len(), r2.lhs.len());
                // proper overlaps: suffix of r1 equals prefix of r2
                for k in 1..l1.min(l2) {
                    if r1.lhs[l1 - k..] != r2.lhs[..k] {
                        continue;
                    }
                    let mut a = r1.rhs.clone();
                    a.extend_from_slice(&r2.lhs[k..]);
                    let mut b = r1.lhs[..l1 - k].to_vec();
                    b.extend_from_slice(&r2.rhs);
                    let mut overlap = r1.lhs.clone();
                    overlap.extend_from_slice(&r2.lhs[k..]);
                    self.joinable(&r1.coeff, &a, &r2.coeff, &b, &overlap)?;
                }
                // inclusion of r2 inside r1
                if i1 != i2 && l2 <= l1 {
                    for p in 0..=(l1 - l2) {
                        if r1.lhs[p..p + l2] != r2.lhs[..] {
                            continue;
                        }
                        let mut b = r1.lhs[..p].to_vec();
                        b.extend_from_slice(&r2.rhs);
                        b.extend_from_slice(&r1.lhs[p + l2..]);
                        self.joinable(&r1.coeff, &r1.rhs, &r2.coeff, &b, &r1.lhs)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn joinable(&self, ca: &Scalar, a: &[VarId], cb: &Scalar, b: &[VarId], at: &[VarId]) -> Result<(), AlgebraError> {
        let (xa, wa) = self.reduce_letters(a);
        let (xb, wb) = self.reduce_letters(b);
        if wa == wb && &xa * ca == &xb * cb {
            Ok(())
        } else {
            Err(AlgebraError::NotConfluent(Word::from_letters(at.to_vec()).display(&self.vars)))
        }
    }

    pub fn vars(&self) -> &VariableSet {
        &self.vars
    }

    pub fn families(&self) -> &[RuleFamily] {
        &self.families
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Longest rule left-hand side, the "degree" of the equality constraints.
    pub fn max_rule_degree(&self) -> usize {
        self.rules.iter().map(|r| r.lhs.len()).max().unwrap_or(0)
    }

    /// Reduces a word to `coeff · w` with `w` irreducible.
    pub fn reduce_letters(&self, letters: &[VarId]) -> (Scalar, Word) {
        let mut phase: u8 = 0;
        let mut extra: Option<Scalar> = None;
        let mut out: Vec<VarId> = Vec::with_capacity(letters.len());
        let mut pending: Vec<VarId> = letters.iter().rev().copied().collect();
        while let Some(x) = pending.pop() {
            out.push(x);
            if let Some(r) = self.suffix_rule(&out) {
                let rule = &self.rules[r];
                out.truncate(out.len() - rule.lhs.len());
                pending.extend(rule.rhs.iter().rev());
                match rule.phase {
                    Some(k) => phase = (phase + k) % 4,
                    None => {
                        extra = Some(match extra {
                            Some(e) => &e * &rule.coeff,
                            None => rule.coeff.clone(),
                        })
                    }
                }
            }
        }
        let mut c = Scalar::i_pow(phase);
        if let Some(e) = extra {
            c = &c * &e;
        }
        (c, Word::from_letters(out))
    }

    pub fn reduce_word(&self, w: &Word) -> (Scalar, Word) {
        self.reduce_letters(w.letters())
    }

    /// `𝒩(a* b)` for two words.
    pub fn reduce_star_product(&self, a: &Word, b: &Word) -> (Scalar, Word) {
        self.reduce_letters(&a.star_concat(b))
    }

    pub fn is_irreducible(&self, letters: &[VarId]) -> bool {
        (1..=letters.len()).all(|k| self.suffix_rule(&letters[..k]).is_none())
    }

    /// Whether `w·x` is irreducible, given that `w` is.
    pub fn extends_irreducibly(&self, w: &[VarId], x: VarId) -> bool {
        let mut v = Vec::with_capacity(w.len() + 1);
        v.extend_from_slice(w);
        v.push(x);
        self.suffix_rule(&v).is_none()
    }

    /// All `(position, rule index)` pairs where a rule applies.
    pub fn redexes(&self, letters: &[VarId]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for p in 0..letters.len() {
            for l in 1..=letters.len() - p {
                if let Some(r) = self.lookup(&letters[p..p + l]) {
                    out.push((p, r));
                }
            }
        }
        out
    }

    /// Contracts one redex. `rule` must match at `pos`.
    pub fn rewrite_at(&self, letters: &[VarId], pos: usize, rule: usize) -> (Scalar, Vec<VarId>) {
        let r = &self.rules[rule];
        debug_assert_eq!(&letters[pos..pos + r.lhs.len()], &r.lhs[..]);
        let mut v = letters[..pos].to_vec();
        v.extend_from_slice(&r.rhs);
        v.extend_from_slice(&letters[pos + r.lhs.len()..]);
        (r.coeff.clone(), v)
    }

    /// The normal form `𝒩(p)`.
    pub fn normal_form(&self, p: &Polynomial) -> Result<Polynomial, AlgebraError> {
        for x in p.variables() {
            self.check_var(x)?;
        }
        Ok(self.reduce(p))
    }

    /// `𝒩(p)` without checking that variables are declared.
    pub fn reduce(&self, p: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (w, c) in p.terms() {
            let (k, r) = self.reduce_word(w);
            out.add_term(r, &k * c);
        }
        out
    }

    /// `𝒩(a* · p · b)`, the entry shape of localizing matrices.
    pub fn reduce_sandwich(&self, a: &Word, p: &Polynomial, b: &Word) -> Polynomial {
        let mut out = Polynomial::zero();
        for (w, c) in p.terms() {
            let mut v = Vec::with_capacity(a.len() + w.len() + b.len());
            v.extend(a.letters().iter().rev());
            v.extend_from_slice(w.letters());
            v.extend_from_slice(b.letters());
            let (k, r) = self.reduce_letters(&v);
            out.add_term(r, &k * c);
        }
        out
    }

    pub fn variable_family(&self, x: VarId) -> VariableFamily {
        let (c, w) = self.reduce_letters(&[x, x]);
        if !c.is_one() {
            return VariableFamily::Free;
        }
        if w.is_one() {
            VariableFamily::Unipotent
        } else if w.letters() == [x] {
            VariableFamily::Projector
        } else {
            VariableFamily::Free
        }
    }

    /// Whether `p` equals its own adjoint modulo the ideal.
    pub fn is_hermitian(&self, p: &Polynomial) -> bool {
        self.reduce(p) == self.reduce(&p.involute())
    }
}
