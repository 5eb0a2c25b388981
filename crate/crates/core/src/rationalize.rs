//! From floating Gram data to an exact pre-certificate: rounding, localizer
//! splitting, the rational left-hand side, residuals and the
//! Frobenius-optimal correction onto the affine set of exact identities.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exact;
use crate::linalg::{embed_hermitian, sym_eigen};
use crate::matrix::HermitianMatrix;
use crate::ncalgebra::{Polynomial, Word};
use crate::relaxation::{BlockRole, GramStructure, NpoProblem};
use crate::scalar::{from_f64, rat, Rational, Scalar};
use crate::sdpsolve::NumericSolution;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RationalizeError {
    #[error("non-finite value {0}")]
    NonFinite(String),
    #[error("no rational within the precision bound for {0}")]
    Precision(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("word {0} of the left-hand side is not expressible by any Gram block")]
    UncoveredMonomial(String),
    #[error("projection system is singular on words {0:?}")]
    SingularXi(Vec<String>),
    #[error("basis change has non-rational coefficients: {0}")]
    IrrationalBasisChange(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundingConfig {
    /// Largest admissible `|x - round(x)|`.
    pub eta: Rational,
    pub max_denominator: BigInt,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        RoundingConfig { eta: rat(1, 1_000_000_000_000), max_denominator: BigInt::from(10_000_000_000_000_000i64) }
    }
}

/// Shortest continued-fraction convergent of `x` within `η`.
pub fn round_scalar(x: f64, cfg: &RoundingConfig) -> Result<Rational, RationalizeError> {
    let exact = from_f64(x).ok_or_else(|| RationalizeError::NonFinite(format!("{x}")))?;
    round_rational(&exact, cfg).ok_or_else(|| RationalizeError::Precision(format!("{x}")))
}

fn within(x: &Rational, h: &BigInt, k: &BigInt, eta: &Rational) -> bool {
    // |x - h/k| <= eta  <=>  |x.n*k - h*x.d| * eta.d <= eta.n * x.d * k
    let lhs = (x.numer() * k - h * x.denom()).abs() * eta.denom();
    lhs <= eta.numer() * x.denom() * k
}

fn round_rational(x: &Rational, cfg: &RoundingConfig) -> Option<Rational> {
    let (mut p, mut q) = (x.numer().clone(), x.denom().clone());
    let (mut h1, mut h2) = (BigInt::one(), BigInt::zero());
    let (mut k1, mut k2) = (BigInt::zero(), BigInt::one());
    loop {
        let (a, r) = p.div_mod_floor(&q);
        let h = &a * &h1 + &h2;
        let k = &a * &k1 + &k2;
        if k > cfg.max_denominator {
            return None;
        }
        if r.is_zero() || within(x, &h, &k, &cfg.eta) {
            return Some(Rational::new(h, k));
        }
        h2 = core::mem::replace(&mut h1, h);
        k2 = core::mem::replace(&mut k1, k);
        p = core::mem::replace(&mut q, r);
    }
}

/// Rounded solution: `λ̃` and one exact Hermitian matrix per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundedSolution {
    pub lambda: Rational,
    pub blocks: Vec<HermitianMatrix>,
}

/// Entry-wise rounding of the upper triangle, mirrored by conjugation so the
/// result is exactly Hermitian. Scalar moment multipliers are clamped at 0.
pub fn round_solution(
    sol: &NumericSolution,
    structures: &[GramStructure],
    cfg: &RoundingConfig,
) -> Result<RoundedSolution, RationalizeError> {
    if sol.blocks.len() != structures.len() {
        return Err(RationalizeError::DimensionMismatch(format!(
            "{} blocks for {} structures",
            sol.blocks.len(),
            structures.len()
        )));
    }
    let lambda = round_scalar(sol.bound, cfg)?;
    let mut blocks = Vec::with_capacity(structures.len());
    for (s, b) in structures.iter().zip(&sol.blocks) {
        if b.dim != s.dim() {
            return Err(RationalizeError::DimensionMismatch(s.label.clone()));
        }
        let n = b.dim;
        let mut m = HermitianMatrix::zeros(n);
        for r in 0..n {
            for c in r..n {
                let (re, im) = b.entry(r, c);
                let mut re = round_scalar(re, cfg)?;
                if matches!(s.role, BlockRole::Moment { .. }) && re.is_negative() {
                    re = Rational::zero();
                }
                let im = if r == c || !b.complex { Rational::zero() } else { round_scalar(im, cfg)? };
                m.set_hermitian(r, c, Scalar::new(re, im));
            }
        }
        blocks.push(m);
    }
    Ok(RoundedSolution { lambda, blocks })
}

/// Rational rank factorization `Σ_j c_j c_j*` approximating the PSD part of
/// `g`: every eigenpair with positive eigenvalue contributes
/// `c_j = round(√λ_j · conj(v_j))`. Returned vectors are the coefficient
/// rows `c_j` (multiplier `u_j = Σ_β c_jβ b_β`).
pub fn psd_split_localizers(g: &HermitianMatrix, cfg: &RoundingConfig) -> Result<Vec<Vec<Scalar>>, RationalizeError> {
    let n = g.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (re, im) = g.to_f64();
    let complex = !g.is_real();
    let (m, a) = if complex { (2 * n, embed_hermitian(&re, &im, n)) } else { (n, re) };
    let (ev, v) = sym_eigen(&a, m);
    let scale = ev.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
    let mut out = Vec::new();
    for j in 0..m {
        if ev[j] <= 1e-14 * scale {
            continue;
        }
        let w = if complex { ev[j] / 2.0 } else { ev[j] };
        let sq = libm::sqrt(w);
        let mut c = Vec::with_capacity(n);
        for b in 0..n {
            let (vr, vi) = if complex { (v[b * m + j], v[(n + b) * m + j]) } else { (v[b * m + j], 0.0) };
            // conj(v) scaled
            let re = round_scalar(sq * vr, cfg)?;
            let im = if complex { round_scalar(-sq * vi, cfg)? } else { Rational::zero() };
            c.push(Scalar::new(re, im));
        }
        if c.iter().any(|z| !z.is_zero()) {
            out.push(c);
        }
    }
    Ok(out)
}

/// `Σ_j conj(c_jα) c_jβ`, the exact Gram matrix of the split multipliers.
pub fn split_gram(coeffs: &[Vec<Scalar>], n: usize) -> HermitianMatrix {
    let mut m = HermitianMatrix::zeros(n);
    for c in coeffs {
        for a in 0..n {
            if c[a].is_zero() {
                continue;
            }
            let ca = c[a].conj();
            for b in 0..n {
                if !c[b].is_zero() {
                    *m.get_mut(a, b) += &ca * &c[b];
                }
            }
        }
    }
    m
}

/// `u_j = Σ_β c_jβ b_β` over the structure's basis.
pub fn multiplier_polynomials(coeffs: &[Vec<Scalar>], basis: &[Polynomial]) -> Vec<Polynomial> {
    coeffs
        .iter()
        .map(|c| {
            let mut u = Polynomial::zero();
            for (cb, b) in c.iter().zip(basis) {
                u = u.add(&b.scale(cb));
            }
            u
        })
        .collect()
}

/// `Σ_{αβ} M_αβ · entry(α, β)`, reduced.
pub fn contract(s: &GramStructure, m: &HermitianMatrix) -> Polynomial {
    let mut acc: BTreeMap<Word, Scalar> = BTreeMap::new();
    for a in 0..s.dim() {
        for b in 0..s.dim() {
            let g = m.get(a, b);
            if g.is_zero() {
                continue;
            }
            for (w, n) in s.entry(a, b).terms() {
                *acc.entry(w.clone()).or_insert_with(Scalar::zero) += n * g;
            }
        }
    }
    Polynomial::from_terms(acc)
}

/// `λ̃ - f - Σ (localizer contributions) - Σ κ_i (m_i - lower_i)`, with each
/// non-Gram block's exact contribution passed in `fixed` (structure index,
/// exact Gram of that block).
pub fn rational_lhs(p: &NpoProblem, lambda: &Rational, structures: &[GramStructure], fixed: &[(usize, HermitianMatrix)]) -> Polynomial {
    let mut lhs = Polynomial::constant(Scalar::real(lambda.clone())).sub(&p.canonical_objective());
    for (k, m) in fixed {
        lhs = lhs.sub(&contract(&structures[*k], m));
    }
    p.rewrite.reduce(&lhs)
}

/// Word-indexed linear system tying the Gram blocks to the left-hand side.
#[derive(Debug, Clone)]
pub struct ProjectionSystem {
    /// Structure index of each participating Gram block.
    pub blocks: Vec<usize>,
    pub dims: Vec<usize>,
    pub words: Vec<Word>,
    index: BTreeMap<Word, usize>,
    /// Per word: `(block position, row, col, n^t)`.
    entries: Vec<Vec<(usize, usize, usize, Scalar)>>,
    pub fast_path: bool,
    /// Diagonal of `Ξ` on the fast path (the counts `n_I`).
    counts: Vec<u64>,
    /// Dense `Ξ` on the general path.
    xi: Option<Vec<Scalar>>,
}

impl ProjectionSystem {
    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn entries_of(&self, t: &Word) -> &[(usize, usize, usize, Scalar)] {
        self.index.get(t).map(|&k| self.entries[k].as_slice()).unwrap_or(&[])
    }

    /// `Ξ_{t,s}`; diagonal counts on the fast path.
    pub fn xi_entry(&self, t: usize, s: usize) -> Scalar {
        match &self.xi {
            Some(x) => x[t * self.words.len() + s].clone(),
            None if t == s => Scalar::from_int(self.counts[t] as i64),
            None => Scalar::zero(),
        }
    }
}

/// Collects `n^t` for all Gram blocks in `gram` (structure indices).
pub fn build_projection_system(structures: &[GramStructure], gram: &[usize]) -> ProjectionSystem {
    let mut per_word: BTreeMap<Word, Vec<(usize, usize, usize, Scalar)>> = BTreeMap::new();
    let mut fast = true;
    for (pos, &k) in gram.iter().enumerate() {
        let s = &structures[k];
        for a in 0..s.dim() {
            for b in 0..s.dim() {
                let e = s.entry(a, b);
                if e.len() != 1 || !e.terms().all(|(_, c)| c.is_unit()) {
                    fast = false;
                }
                for (w, n) in e.terms() {
                    per_word.entry(w.clone()).or_default().push((pos, a, b, n.clone()));
                }
            }
        }
    }
    let words: Vec<Word> = per_word.keys().cloned().collect();
    let index = words.iter().enumerate().map(|(k, w)| (w.clone(), k)).collect();
    let entries: Vec<_> = per_word.into_values().collect();
    let counts = entries.iter().map(|e| e.len() as u64).collect();
    let xi = if fast {
        None
    } else {
        // Ξ_{t,s} = Σ_{(k,a,b)} n^t conj(n^s), via a per-entry inverted index
        let nw = words.len();
        let mut by_pos: BTreeMap<(usize, usize, usize), Vec<(usize, Scalar)>> = BTreeMap::new();
        for (t, list) in entries.iter().enumerate() {
            for (pos, a, b, n) in list {
                by_pos.entry((*pos, *a, *b)).or_default().push((t, n.clone()));
            }
        }
        let mut xi = vec![Scalar::zero(); nw * nw];
        for list in by_pos.values() {
            for (t, nt) in list {
                for (s, ns) in list {
                    xi[t * nw + s] += nt * &ns.conj();
                }
            }
        }
        Some(xi)
    };
    ProjectionSystem {
        blocks: gram.to_vec(),
        dims: gram.iter().map(|&k| structures[k].dim()).collect(),
        words,
        index,
        entries,
        fast_path: fast,
        counts,
        xi,
    }
}

/// `r_t = LHS_t - Σ n^t G̃` for every word of the system and of the LHS.
pub fn residuals(ps: &ProjectionSystem, grams: &[HermitianMatrix], lhs: &Polynomial) -> Result<BTreeMap<Word, Scalar>, RationalizeError> {
    if grams.len() != ps.blocks.len() || grams.iter().zip(&ps.dims).any(|(g, &d)| g.dim() != d) {
        return Err(RationalizeError::DimensionMismatch(String::from("Gram blocks vs projection system")));
    }
    let mut r: BTreeMap<Word, Scalar> = BTreeMap::new();
    for (t, list) in ps.words.iter().zip(&ps.entries) {
        let mut acc = lhs.coeff(t);
        for (pos, a, b, n) in list {
            let g = grams[*pos].get(*a, *b);
            if !g.is_zero() {
                acc -= n * g;
            }
        }
        r.insert(t.clone(), acc);
    }
    for (t, c) in lhs.terms() {
        if !ps.index.contains_key(t) {
            r.insert(t.clone(), c.clone());
        }
    }
    Ok(r)
}

/// Minimum-Frobenius-norm correction `Δ` restoring the exact identity.
/// Returns the corrected blocks `G̃ + Δ`.
pub fn frobenius_project(
    ps: &ProjectionSystem,
    grams: &[HermitianMatrix],
    lhs: &Polynomial,
    show: impl Fn(&Word) -> String,
) -> Result<Vec<HermitianMatrix>, RationalizeError> {
    let r = residuals(ps, grams, lhs)?;
    for (t, v) in &r {
        if !v.is_zero() && !ps.index.contains_key(t) {
            return Err(RationalizeError::UncoveredMonomial(show(t)));
        }
    }
    let mut out = grams.to_vec();
    let rv: Vec<Scalar> = ps.words.iter().map(|t| r[t].clone()).collect();
    let y: Vec<Scalar> = match &ps.xi {
        None => rv.iter().zip(&ps.counts).map(|(v, &c)| v.scale(&Rational::new(BigInt::one(), BigInt::from(c)))).collect(),
        Some(xi) => {
            if rv.iter().all(Zero::is_zero) {
                return Ok(out);
            }
            // orbit words of a symmetry-adapted basis give dependent but
            // consistent rows; any solution yields the same Δ
            match exact::solve(xi, ps.words.len(), &rv) {
                Ok(y) => y,
                Err(_) => exact::solve_consistent(xi, ps.words.len(), &rv)
                    .map_err(|rows| RationalizeError::SingularXi(rows.iter().map(|&t| show(&ps.words[t])).collect()))?,
            }
        }
    };
    // Δ_ab = Σ_t y_t conj(n^t_ab); only the upper triangle is accumulated.
    let mut delta: Vec<BTreeMap<(usize, usize), Scalar>> = vec![BTreeMap::new(); grams.len()];
    for (list, yt) in ps.entries.iter().zip(&y) {
        if yt.is_zero() {
            continue;
        }
        for (pos, a, b, n) in list {
            if a <= b {
                *delta[*pos].entry((*a, *b)).or_insert_with(Scalar::zero) += yt * &n.conj();
            }
        }
    }
    for (g, d) in out.iter_mut().zip(delta) {
        for ((a, b), v) in d {
            let mut nv = g.get(a, b) + &v;
            if a == b {
                nv.im = Rational::zero();
            }
            g.set_hermitian(a, b, nv);
        }
    }
    Ok(out)
}

/// Squared Frobenius distance between two lists of blocks.
pub fn correction_norm_sqr(a: &[HermitianMatrix], b: &[HermitianMatrix]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x.sub(y).frobenius_sqr())
}

/// Rounded data turned into an exact pre-certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreCertificate {
    pub lambda: Rational,
    /// `(structure index, projected Gram)` for every Gram block.
    pub grams: Vec<(usize, HermitianMatrix)>,
    /// `(structure index, coefficient rows c_j)` for every localizer block.
    pub localizers: Vec<(usize, Vec<Vec<Scalar>>)>,
    /// `(structure index, κ)` for every moment block.
    pub moments: Vec<(usize, Rational)>,
    pub lhs: Polynomial,
}

/// Rounding, localizer splitting, LHS assembly and projection in one go.
/// The projected identity is re-checked exactly before returning.
pub fn precertify(
    p: &NpoProblem,
    structures: &[GramStructure],
    sol: &NumericSolution,
    cfg: &RoundingConfig,
) -> Result<PreCertificate, RationalizeError> {
    let rounded = round_solution(sol, structures, cfg)?;
    let mut fixed = Vec::new();
    let mut localizers = Vec::new();
    let mut moments = Vec::new();
    let mut gram_idx = Vec::new();
    let mut gram_blocks = Vec::new();
    for (k, (s, m)) in structures.iter().zip(rounded.blocks).enumerate() {
        match s.role {
            BlockRole::Gram { .. } => {
                gram_idx.push(k);
                gram_blocks.push(m);
            }
            BlockRole::Localizer { .. } => {
                let c = psd_split_localizers(&m, cfg)?;
                fixed.push((k, split_gram(&c, s.dim())));
                localizers.push((k, c));
            }
            BlockRole::Moment { .. } => {
                let kappa = m.get(0, 0).re.clone();
                fixed.push((k, m));
                moments.push((k, kappa));
            }
        }
    }
    let lhs = rational_lhs(p, &rounded.lambda, structures, &fixed);
    let ps = build_projection_system(structures, &gram_idx);
    let show = |w: &Word| w.display(p.vars());
    let projected = frobenius_project(&ps, &gram_blocks, &lhs, show)?;
    let check = residuals(&ps, &projected, &lhs)?;
    if let Some((t, _)) = check.iter().find(|(_, v)| !v.is_zero()) {
        return Err(RationalizeError::UncoveredMonomial(show(t)));
    }
    Ok(PreCertificate {
        lambda: rounded.lambda,
        grams: gram_idx.into_iter().zip(projected).collect(),
        localizers,
        moments,
        lhs,
    })
}
