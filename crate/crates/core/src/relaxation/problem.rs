use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::RelaxError;
use crate::ncalgebra::{Polynomial, RewriteSystem, VariableSet};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// `⟨m⟩ >= lower` on the state; enters certificates as `κ·(m - lower)` with `κ >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentInequality {
    pub poly: Polynomial,
    pub lower: Rational,
}

/// An optimization problem over operator variables: extremize the spectrum
/// of `objective` subject to the rewrite rules (equalities), operator
/// inequalities `g ⪰ 0`, and moment inequalities.
///
/// Every polynomial is stored in normal form.
#[derive(Debug, Clone)]
pub struct NpoProblem {
    pub name: String,
    pub rewrite: RewriteSystem,
    pub objective: Polynomial,
    pub sense: Sense,
    pub inequalities: Vec<Polynomial>,
    pub moment_inequalities: Vec<MomentInequality>,
    pub metadata: BTreeMap<String, String>,
}

impl NpoProblem {
    pub fn new(name: &str, rewrite: RewriteSystem, objective: &Polynomial, sense: Sense) -> Result<Self, RelaxError> {
        let objective = rewrite.normal_form(objective)?;
        check_hermitian(&rewrite, &objective)?;
        Ok(NpoProblem {
            name: String::from(name),
            rewrite,
            objective,
            sense,
            inequalities: Vec::new(),
            moment_inequalities: Vec::new(),
            metadata: BTreeMap::new(),
        })
    }

    /// Adds an operator inequality `g ⪰ 0`.
    pub fn with_inequality(mut self, g: &Polynomial) -> Result<Self, RelaxError> {
        let g = self.rewrite.normal_form(g)?;
        check_hermitian(&self.rewrite, &g)?;
        self.inequalities.push(g);
        Ok(self)
    }

    /// Adds `⟨m⟩ >= lower`.
    pub fn with_moment_inequality(mut self, m: &Polynomial, lower: Rational) -> Result<Self, RelaxError> {
        let m = self.rewrite.normal_form(m)?;
        check_hermitian(&self.rewrite, &m)?;
        self.moment_inequalities.push(MomentInequality { poly: m, lower });
        Ok(self)
    }

    pub fn with_metadata(mut self, key: &str, value: &str) -> Self {
        self.metadata.insert(String::from(key), String::from(value));
        self
    }

    pub fn vars(&self) -> &VariableSet {
        self.rewrite.vars()
    }

    /// The objective in maximization form.
    pub fn canonical_objective(&self) -> Polynomial {
        match self.sense {
            Sense::Maximize => self.objective.clone(),
            Sense::Minimize => self.objective.scale(&-Scalar::from_int(1)),
        }
    }

    /// Maps a bound on the canonical (maximization) objective back to the user's sign.
    pub fn user_bound(&self, canonical: &Rational) -> Rational {
        match self.sense {
            Sense::Maximize => canonical.clone(),
            Sense::Minimize => -canonical.clone(),
        }
    }
}

fn check_hermitian(rs: &RewriteSystem, p: &Polynomial) -> Result<(), RelaxError> {
    if rs.is_hermitian(p) {
        Ok(())
    } else {
        Err(RelaxError::NotHermitian(p.display(rs.vars())))
    }
}

/// `⌈max(deg f, deg rules, deg g)/2⌉`.
pub fn min_relaxation_order(p: &NpoProblem) -> usize {
    let mut deg = p.objective.degree().max(p.rewrite.max_rule_degree());
    for g in &p.inequalities {
        deg = deg.max(g.degree());
    }
    for m in &p.moment_inequalities {
        deg = deg.max(m.poly.degree());
    }
    deg.div_ceil(2)
}
