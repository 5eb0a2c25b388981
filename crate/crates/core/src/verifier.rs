//! Standalone exact checker for emitted certificates.
//!
//! Only the algebra layer (`ncalgebra`, `scalar`, `matrix`) is shared with
//! the pipeline. The PSD test has its own floating factorization, its own
//! exact remainder bound, and a fraction-free elimination run in reversed
//! index order.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::matrix::HermitianMatrix;
use crate::ncalgebra::{Polynomial, RewriteSystem, VarId, VariableFamily, Word};
use crate::relaxation::NpoProblem;
use crate::scalar::{ceil_scaled, floor_scaled, to_f64, Rational, Scalar};

/// How a variable satisfies the boundedness hypothesis needed for lifting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintFamily {
    Unipotent,
    Projector,
    /// `1 - x² ⪰ 0` is inequality number `inequality`.
    Box { inequality: usize },
    /// `1 - Σ_{y∈S} y² ⪰ 0` with `x ∈ S` is inequality number `inequality`.
    Ball { inequality: usize },
}

impl ConstraintFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ConstraintFamily::Unipotent => "unipotent",
            ConstraintFamily::Projector => "projector",
            ConstraintFamily::Box { .. } => "box",
            ConstraintFamily::Ball { .. } => "ball",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertPath {
    AlreadyPsd,
    Lifted,
    TightenedUnipotent,
    TightenedRank1,
}

impl CertPath {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertPath::AlreadyPsd => "already_psd",
            CertPath::Lifted => "lifted",
            CertPath::TightenedUnipotent => "tightened_unipotent",
            CertPath::TightenedRank1 => "tightened_rank1",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "already_psd" => Some(CertPath::AlreadyPsd),
            "lifted" => Some(CertPath::Lifted),
            "tightened_unipotent" => Some(CertPath::TightenedUnipotent),
            "tightened_rank1" => Some(CertPath::TightenedRank1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertBlock {
    pub label: String,
    pub sector: usize,
    pub basis: Vec<Polynomial>,
    pub gram: HermitianMatrix,
}

/// `Σ_j u_j* g_i u_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalizerCert {
    pub inequality: usize,
    pub multipliers: Vec<Polynomial>,
}

/// `κ (m_i - lower_i)`, `κ >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentCert {
    pub index: usize,
    pub kappa: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessFactor {
    /// `s* s`.
    Square,
    /// `s* g_i s` for problem inequality `i`.
    Inequality(usize),
    /// `s* q s` with `q` in the ideal (`𝒩(q) = 0`).
    Ideal(Polynomial),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessTerm {
    pub weight: Rational,
    pub poly: Polynomial,
    pub factor: WitnessFactor,
}

/// `ε (|W| - Σ_{w∈W} w*w) = Σ weight · s* c s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantWitness {
    pub epsilon: Rational,
    pub words: Vec<Word>,
    pub terms: Vec<WitnessTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralRecord {
    pub block: String,
    pub mu_low: Rational,
    pub gap: Rational,
    pub psd: bool,
}

/// An exact claim `λ - f ∈ 𝒦` with all the data needed to re-check it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub problem: String,
    pub order: usize,
    /// `λ_rat` for the maximization form.
    pub bound: Rational,
    pub lambda_tilde: Rational,
    pub path: CertPath,
    pub blocks: Vec<CertBlock>,
    pub localizers: Vec<LocalizerCert>,
    pub moments: Vec<MomentCert>,
    pub witnesses: Vec<ConstantWitness>,
    pub families: Vec<(VarId, ConstraintFamily)>,
    pub spectral: Vec<SpectralRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("block {0} is not Hermitian")]
    NotHermitian(String),
    #[error("basis of block {0} does not match its Gram dimension")]
    BasisMismatch(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub identity_ok: bool,
    pub psd_ok: Vec<bool>,
    pub constraint_family_ok: bool,
    pub failing_word: Option<String>,
    pub failing_block: Option<String>,
    pub message: Option<String>,
    /// Filled in by callers that can read a clock.
    pub elapsed_ms: Option<f64>,
}

impl VerificationReport {
    pub fn valid(&self) -> bool {
        self.identity_ok && self.constraint_family_ok && self.psd_ok.iter().all(|&b| b)
    }
}

fn accumulate(acc: &mut BTreeMap<Word, Scalar>, w: Word, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match acc.entry(w) {
        alloc::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        alloc::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += &c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// `Σ_{ab} G_ab 𝒩(b_a* b_b)` added into `acc`.
fn add_gram(rs: &RewriteSystem, acc: &mut BTreeMap<Word, Scalar>, basis: &[Polynomial], g: &HermitianMatrix, sign: &Scalar) {
    for (a, pa) in basis.iter().enumerate() {
        for (b, pb) in basis.iter().enumerate() {
            let gab = g.get(a, b);
            if gab.is_zero() {
                continue;
            }
            let s = sign * gab;
            for (wa, ca) in pa.terms() {
                for (wb, cb) in pb.terms() {
                    let (k, w) = rs.reduce_star_product(wa, wb);
                    let c = &(&(&ca.conj() * cb) * &k) * &s;
                    accumulate(acc, w, c);
                }
            }
        }
    }
}

/// `𝒩(u* g u)` added with `sign` into `acc`.
fn add_sandwich(rs: &RewriteSystem, acc: &mut BTreeMap<Word, Scalar>, u: &Polynomial, g: &Polynomial, sign: &Scalar) {
    for (wa, ca) in u.terms() {
        for (wg, cg) in g.terms() {
            for (wb, cb) in u.terms() {
                let mut letters: Vec<VarId> = wa.letters().iter().rev().copied().collect();
                letters.extend_from_slice(wg.letters());
                letters.extend_from_slice(wb.letters());
                let (k, w) = rs.reduce_letters(&letters);
                let c = &(&(&(&ca.conj() * cg) * cb) * &k) * sign;
                accumulate(acc, w, c);
            }
        }
    }
}

fn witness_factor(p: &NpoProblem, f: &WitnessFactor) -> Option<Polynomial> {
    match f {
        WitnessFactor::Square => Some(Polynomial::one()),
        WitnessFactor::Inequality(i) => p.inequalities.get(*i).cloned(),
        WitnessFactor::Ideal(q) => Some(q.clone()),
    }
}

fn add_witness(p: &NpoProblem, acc: &mut BTreeMap<Word, Scalar>, w: &ConstantWitness, sign: &Scalar) {
    for t in &w.terms {
        if let Some(c) = witness_factor(p, &t.factor) {
            add_sandwich(&p.rewrite, acc, &t.poly, &c, &sign.scale(&t.weight));
        }
    }
}

fn first_nonzero(p: &NpoProblem, acc: &BTreeMap<Word, Scalar>) -> Option<String> {
    acc.iter().find(|(_, c)| !c.is_zero()).map(|(w, _)| w.display(p.vars()))
}

/// Checks `𝒩(λ - f) = Σ blocks + Σ localizers + Σ κ (m - lower) + Σ witnesses`.
pub fn verify_identity(p: &NpoProblem, c: &Certificate) -> Result<(bool, Option<String>), VerifyError> {
    let rs = &p.rewrite;
    let minus = -Scalar::one();
    let mut acc: BTreeMap<Word, Scalar> = BTreeMap::new();
    accumulate(&mut acc, Word::one(), Scalar::real(c.bound.clone()));
    let f = match p.sense {
        crate::relaxation::Sense::Maximize => p.objective.clone(),
        crate::relaxation::Sense::Minimize => p.objective.scale(&minus),
    };
    for (w, k) in rs.reduce(&f).terms() {
        accumulate(&mut acc, w.clone(), -k.clone());
    }
    for b in &c.blocks {
        if b.basis.len() != b.gram.dim() {
            return Err(VerifyError::BasisMismatch(b.label.clone()));
        }
        add_gram(rs, &mut acc, &b.basis, &b.gram, &minus);
    }
    for l in &c.localizers {
        let Some(g) = p.inequalities.get(l.inequality) else {
            return Ok((false, Some(alloc::format!("inequality #{}", l.inequality))));
        };
        for u in &l.multipliers {
            add_sandwich(rs, &mut acc, u, g, &minus);
        }
    }
    for m in &c.moments {
        let Some(mi) = p.moment_inequalities.get(m.index) else {
            return Ok((false, Some(alloc::format!("moment inequality #{}", m.index))));
        };
        let term = mi.poly.sub(&Polynomial::constant(Scalar::real(mi.lower.clone())));
        for (w, k) in rs.reduce(&term).terms() {
            accumulate(&mut acc, w.clone(), -(k.scale(&m.kappa)));
        }
    }
    for w in &c.witnesses {
        add_witness(p, &mut acc, w, &minus);
    }
    let bad = first_nonzero(p, &acc);
    Ok((bad.is_none(), bad))
}

/// Checks the standalone constant-SOHS identity of one witness.
pub fn verify_constant_sohs(p: &NpoProblem, w: &ConstantWitness) -> bool {
    let rs = &p.rewrite;
    let mut acc: BTreeMap<Word, Scalar> = BTreeMap::new();
    let eps = Scalar::real(w.epsilon.clone());
    for word in &w.words {
        accumulate(&mut acc, Word::one(), eps.clone());
        let (k, r) = rs.reduce_star_product(word, word);
        accumulate(&mut acc, r, -(&k * &eps));
    }
    for t in &w.terms {
        if t.weight.is_negative() {
            return false;
        }
        match &t.factor {
            WitnessFactor::Inequality(i) if *i >= p.inequalities.len() => return false,
            WitnessFactor::Ideal(q) if !rs.reduce(q).is_zero() => return false,
            _ => {}
        }
    }
    add_witness(p, &mut acc, w, &-Scalar::one());
    acc.values().all(Zero::is_zero)
}

fn family_holds(p: &NpoProblem, x: VarId, f: &ConstraintFamily) -> bool {
    let rs = &p.rewrite;
    match f {
        ConstraintFamily::Unipotent => rs.variable_family(x) == VariableFamily::Unipotent,
        ConstraintFamily::Projector => rs.variable_family(x) == VariableFamily::Projector,
        ConstraintFamily::Box { inequality } => {
            let Some(g) = p.inequalities.get(*inequality) else { return false };
            let xx = Polynomial::var(x).mul(&Polynomial::var(x));
            rs.reduce(g) == rs.reduce(&Polynomial::one().sub(&xx))
        }
        ConstraintFamily::Ball { inequality } => {
            let Some(g) = p.inequalities.get(*inequality) else { return false };
            let g = rs.reduce(g);
            if g.constant_term() != Scalar::one() {
                return false;
            }
            let mut saw = false;
            for (w, c) in g.terms() {
                if w.is_one() {
                    continue;
                }
                let l = w.letters();
                if l.len() != 2 || l[0] != l[1] || *c != -Scalar::one() {
                    return false;
                }
                saw |= l[0] == x;
            }
            saw
        }
    }
}

// ---------- PSD ----------

fn float_cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = libm::sqrt(d);
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Some(l)
}

/// Real symmetric embedding `[[A, -B], [B, A]]` of a Hermitian matrix.
fn embedding(g: &HermitianMatrix) -> Vec<Scalar> {
    let n = g.dim();
    if g.is_real() {
        return g.data().to_vec();
    }
    let m = 2 * n;
    let mut out = vec![Scalar::zero(); m * m];
    for r in 0..n {
        for c in 0..n {
            let z = g.get(r, c);
            let a = Scalar::real(z.re.clone());
            let b = Scalar::real(z.im.clone());
            out[r * m + c] = a.clone();
            out[(n + r) * m + n + c] = a;
            out[r * m + n + c] = -b.clone();
            out[(n + r) * m + c] = b;
        }
    }
    out
}

/// Tries to write `A = R Rᵀ/4^k + E` with `E` diagonally dominant and a
/// non-negative diagonal, all checked exactly on a dyadic grid.
fn dominance_certificate(a: &[Scalar], m: usize) -> bool {
    let af: Vec<f64> = a.iter().map(|z| to_f64(&z.re)).collect();
    if af.iter().any(|x| !x.is_finite()) {
        return false;
    }
    let dmin = (0..m).map(|i| af[i * m + i]).fold(f64::INFINITY, f64::min);
    if !(dmin > 0.0) {
        return false;
    }
    // exact grid values of A, computed once
    let scale = (0..m).map(|i| af[i * m + i]).fold(0.0f64, f64::max);
    let mut shift = dmin / 2.0;
    for _ in 0..24 {
        let mut shifted = af.clone();
        for i in 0..m {
            shifted[i * m + i] -= shift;
        }
        if let Some(l) = float_cholesky(&shifted, m) {
            let lmax = l.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
            let k = (50 - (libm::ceil(libm::log2(lmax)) as i64)).clamp(0, 400) as u32;
            if check_split(a, m, &l, k) {
                return true;
            }
        }
        shift /= 4.0;
        if shift < scale * 1e-15 {
            break;
        }
    }
    false
}

fn check_split(a: &[Scalar], m: usize, l: &[f64], k: u32) -> bool {
    let two_k = libm::ldexp(1.0, k as i32);
    let r: Vec<i64> = l.iter().map(|x| libm::round(x * two_k) as i64).collect();
    let big_k = 2 * k + 8;
    let mut lo_diag = vec![BigInt::zero(); m];
    let mut rad = vec![BigInt::zero(); m];
    for i in 0..m {
        for j in 0..=i {
            let mut p: i128 = 0;
            for t in 0..=j {
                p += r[i * m + t] as i128 * r[j * m + t] as i128;
            }
            let pk = BigInt::from(p) << 8usize;
            let z = &a[i * m + j].re;
            let lo = floor_scaled(z, big_k) - &pk;
            let hi = ceil_scaled(z, big_k) - &pk;
            if i == j {
                lo_diag[i] = lo;
            } else {
                let mag = lo.abs().max(hi.abs());
                rad[i] += &mag;
                rad[j] += &mag;
            }
        }
    }
    (0..m).all(|i| lo_diag[i] >= rad[i])
}

/// Fraction-free symmetric elimination on the congruence-scaled integer
/// matrix, pivoting from the last index to the first.
fn bareiss_reversed(a: &[Scalar], m: usize) -> bool {
    let ord: Vec<usize> = (0..m).rev().collect();
    let mut d = vec![BigInt::one(); m];
    for (i, di) in d.iter_mut().enumerate() {
        for j in 0..m {
            *di = di.lcm(a[i * m + j].re.denom());
        }
    }
    let mut w: Vec<BigInt> = Vec::with_capacity(m * m);
    for &i in &ord {
        for &j in &ord {
            let z = &a[i * m + j].re;
            w.push(z.numer() * (&d[i] / z.denom()) * &d[j]);
        }
    }
    let mut prev = BigInt::one();
    for k in 0..m {
        let p = w[k * m + k].clone();
        if p.is_negative() {
            return false;
        }
        if p.is_zero() {
            if (k + 1..m).any(|j| !w[k * m + j].is_zero()) {
                return false;
            }
            continue;
        }
        for i in k + 1..m {
            let f = w[i * m + k].clone();
            for j in k + 1..m {
                let v = (&p * &w[i * m + j] - &f * &w[k * m + j]) / &prev;
                w[i * m + j] = v;
            }
        }
        prev = p;
    }
    true
}

/// Exact PSD decision for one block.
pub fn verify_psd(g: &HermitianMatrix) -> Result<bool, VerifyError> {
    if !g.is_hermitian() {
        return Err(VerifyError::NotHermitian(String::new()));
    }
    let a = embedding(g);
    let m = if g.is_real() { g.dim() } else { 2 * g.dim() };
    if m == 0 {
        return Ok(true);
    }
    if (0..m).any(|i| a[i * m + i].re.is_negative()) {
        return Ok(false);
    }
    if dominance_certificate(&a, m) {
        return Ok(true);
    }
    Ok(bareiss_reversed(&a, m))
}

/// Full check: identity, block PSD-ness, and every side condition.
pub fn verify(p: &NpoProblem, c: &Certificate) -> Result<VerificationReport, VerifyError> {
    let (identity_ok, failing_word) = verify_identity(p, c)?;
    let mut psd_ok = Vec::with_capacity(c.blocks.len());
    let mut failing_block = None;
    for b in &c.blocks {
        let ok = verify_psd(&b.gram).map_err(|_| VerifyError::NotHermitian(b.label.clone()))?;
        if !ok && failing_block.is_none() {
            failing_block = Some(b.label.clone());
        }
        psd_ok.push(ok);
    }
    let mut family_ok = true;
    let mut message = None;
    for m in &c.moments {
        if m.kappa.is_negative() {
            family_ok = false;
            message = Some(alloc::format!("negative multiplier on moment inequality #{}", m.index));
        }
    }
    for (x, f) in &c.families {
        if !p.vars().contains(*x) || !family_holds(p, *x, f) {
            family_ok = false;
            message = Some(alloc::format!("variable {} is not {}", x, f.name()));
        }
    }
    for w in &c.witnesses {
        if w.epsilon.is_negative() || !verify_constant_sohs(p, w) {
            family_ok = false;
            message = Some(String::from("constant SOHS witness does not verify"));
        }
    }
    Ok(VerificationReport {
        identity_ok,
        psd_ok,
        constraint_family_ok: family_ok,
        failing_word,
        failing_block,
        message,
        elapsed_ms: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncalgebra::VariableSet;
    use crate::relaxation::Sense;
    use crate::scalar::{int, rat};

    fn x_problem() -> NpoProblem {
        let vars = VariableSet::from_labels([("X", None)]).unwrap();
        let rs = RewriteSystem::builder(vars).unipotent(&[0]).build().unwrap();
        NpoProblem::new("x", rs, &Polynomial::var(0), Sense::Maximize).unwrap()
    }

    fn hand_certificate() -> Certificate {
        let h = |n, d| rat(n, d);
        let g = HermitianMatrix::from_real_rows(&[vec![h(1, 2), h(-1, 2)], vec![h(-1, 2), h(1, 2)]]).unwrap();
        Certificate {
            problem: String::from("x"),
            order: 1,
            bound: int(1),
            lambda_tilde: int(1),
            path: CertPath::AlreadyPsd,
            blocks: vec![CertBlock {
                label: String::from("gram"),
                sector: 0,
                basis: vec![Polynomial::one(), Polynomial::var(0)],
                gram: g,
            }],
            localizers: vec![],
            moments: vec![],
            witnesses: vec![],
            families: vec![(0, ConstraintFamily::Unipotent)],
            spectral: vec![],
        }
    }

    #[test]
    fn hand_identity_verifies() {
        let p = x_problem();
        let c = hand_certificate();
        let rep = verify(&p, &c).unwrap();
        assert!(rep.valid(), "{rep:?}");
        let mut bad = c.clone();
        *bad.blocks[0].gram.get_mut(0, 0) += Scalar::real(rat(1, 1_000_000_000_000_000_000));
        let rep = verify(&p, &bad).unwrap();
        assert!(!rep.identity_ok);
        assert_eq!(rep.failing_word.as_deref(), Some("1"));
    }

    #[test]
    fn psd_examples() {
        assert!(verify_psd(&HermitianMatrix::identity(4)).unwrap());
        let off = HermitianMatrix::from_real_rows(&[vec![int(0), int(1)], vec![int(1), int(0)]]).unwrap();
        assert!(!verify_psd(&off).unwrap());
        let rank1 = HermitianMatrix::from_real_rows(&[vec![int(1), int(1)], vec![int(1), int(1)]]).unwrap();
        assert!(verify_psd(&rank1).unwrap());
        let c = HermitianMatrix::from_row_major(2, vec![Scalar::from_int(1), Scalar::i(), -Scalar::i(), Scalar::from_int(1)]).unwrap();
        assert!(verify_psd(&c).unwrap());
        let c2 = HermitianMatrix::from_row_major(2, vec![Scalar::from_int(1), Scalar::i(), -Scalar::i(), Scalar::real(rat(99, 100))]).unwrap();
        assert!(!verify_psd(&c2).unwrap());
    }
}
