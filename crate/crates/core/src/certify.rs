//! Exact eigenvalue bounds, lifting, tightening and constant-SOHS witnesses:
//! everything between a pre-certificate and a verifiable [`Certificate`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exact;
use crate::linalg::{cholesky, cholesky_hermitian, hermitian_min_eig, sym_eigen};
use crate::matrix::HermitianMatrix;
use crate::ncalgebra::{Polynomial, VarId, VariableFamily, Word};
use crate::rationalize::{multiplier_polynomials, PreCertificate};
use crate::relaxation::{BlockRole, GramStructure, NpoProblem};
use crate::scalar::{ceil_scaled, floor_scaled, from_f64, int, rat, to_f64, Rational, Scalar};
use crate::verifier::{
    CertBlock, CertPath, Certificate, ConstantWitness, ConstraintFamily, LocalizerCert, MomentCert, SpectralRecord,
    WitnessFactor, WitnessTerm,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertifyError {
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("variable {0} is not unipotent, projector, box- or ball-constrained")]
    UnsupportedConstraintFamily(String),
    #[error("not every variable is unipotent")]
    NotUnipotent,
    #[error("pre-certificate is not strictly positive definite")]
    NotInterior,
    #[error("exact solve failed")]
    SingularSolve,
    #[error("sector {0}: basis change is not an orthogonal square transform")]
    InvalidSector(usize),
    #[error("{0}")]
    Invalid(String),
}

/// Certified enclosure of the smallest eigenvalue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralBound {
    /// `μ_low <= λ_min`.
    pub mu_low: Rational,
    /// `λ_min - μ_low <= gap`.
    pub gap: Rational,
    /// Exact `λ_min >= 0`; may be conservatively false for large blocks
    /// whose enclosure straddles zero.
    pub psd: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedBound {
    pub lambda_rat: Rational,
    pub lambda_tilde: Rational,
    /// `λ_rat - λ̃`.
    pub delta: Rational,
    pub path: CertPath,
    pub spectral: Vec<SpectralBound>,
    /// Ambient sizes `s` entering the formula, one per sector.
    pub sizes: Vec<usize>,
}

impl CertifiedBound {
    fn from_delta(lambda: &Rational, delta: Rational, path: CertPath, sizes: Vec<usize>) -> Self {
        CertifiedBound { lambda_rat: lambda + &delta, lambda_tilde: lambda.clone(), delta, path, spectral: Vec::new(), sizes }
    }
}

/// Largest block handled by exact elimination inside the spectral bound.
const EXACT_MAX_DIM: usize = 24;

/// Exact `M ⪰ 0` by symmetric elimination with the zero-pivot rule.
pub fn exact_psd_check(m: &HermitianMatrix) -> Result<bool, CertifyError> {
    if !m.is_hermitian() {
        return Err(CertifyError::NotHermitian);
    }
    Ok(exact::is_psd(m.data(), m.dim()))
}

fn grid(m: &HermitianMatrix, k: u32) -> [Vec<BigInt>; 4] {
    let d = m.data();
    [
        d.iter().map(|z| floor_scaled(&z.re, k)).collect(),
        d.iter().map(|z| ceil_scaled(&z.re, k)).collect(),
        d.iter().map(|z| floor_scaled(&z.im, k)).collect(),
        d.iter().map(|z| ceil_scaled(&z.im, k)).collect(),
    ]
}

fn mag(lo: &BigInt, hi: &BigInt) -> BigInt {
    lo.abs().max(hi.abs())
}

fn min_diagonal(m: &HermitianMatrix) -> Rational {
    (0..m.dim()).map(|i| m.get(i, i).re.clone()).min().unwrap_or_else(Rational::zero)
}

/// Plain Gershgorin enclosure, used when no float factorization succeeds.
fn gershgorin(m: &HermitianMatrix) -> (Rational, Rational) {
    let n = m.dim();
    let k = 64;
    let [rl, rh, il, ih] = grid(m, k);
    let mut low: Option<BigInt> = None;
    for i in 0..n {
        let mut r = rl[i * n + i].clone();
        for j in (0..n).filter(|&j| j != i) {
            r -= mag(&rl[i * n + j], &rh[i * n + j]) + mag(&il[i * n + j], &ih[i * n + j]);
        }
        if low.as_ref().is_none_or(|l| r < *l) {
            low = Some(r);
        }
    }
    (crate::scalar::dyadic(low.unwrap_or_default(), k), min_diagonal(m))
}

/// One attempt at `M - σI = R R*/4^k + E` with `E` bounded exactly; returns
/// `(μ_low, μ_up)`.
fn dyadic_attempt(m: &HermitianMatrix, re: &[f64], im: &[f64], complex: bool, sigma: f64, xr: &[f64], xi: &[f64]) -> Option<(Rational, Rational)> {
    let n = m.dim();
    let mut ar = re.to_vec();
    for i in 0..n {
        ar[i * n + i] -= sigma;
    }
    let (lr, li) = if complex { cholesky_hermitian(&ar, im, n)? } else { (cholesky(&ar, n)?, vec![0.0; n * n]) };
    let lmax = lr.iter().chain(&li).fold(0.0f64, |s, x| s.max(x.abs()));
    if !(lmax.is_finite() && lmax > 0.0) {
        return None;
    }
    let k = (52 - libm::ceil(libm::log2(lmax)) as i64).clamp(0, 300) as u32;
    let big_k = 2 * k + 8;
    let two_k = libm::ldexp(1.0, k as i32);
    let rr: Vec<i64> = lr.iter().map(|x| libm::round(x * two_k) as i64).collect();
    let ri: Vec<i64> = li.iter().map(|x| libm::round(x * two_k) as i64).collect();
    let sigma_q = from_f64(sigma)?;
    let sk = floor_scaled(&sigma_q, big_k);
    let sigma_grid = crate::scalar::dyadic(sk.clone(), big_k);
    let [rl, rh, il, ih] = grid(m, big_k);
    let mut lo_diag = vec![BigInt::zero(); n];
    let mut rad = vec![BigInt::zero(); n];
    for i in 0..n {
        for j in 0..=i {
            let (mut pr, mut pi) = (0i128, 0i128);
            for t in 0..=j {
                let (a, b) = (rr[i * n + t] as i128, ri[i * n + t] as i128);
                let (c, d) = (rr[j * n + t] as i128, ri[j * n + t] as i128);
                // (a + ib)(c - id)
                pr = pr.checked_add(a * c + b * d)?;
                pi = pi.checked_add(b * c - a * d)?;
            }
            let pr = BigInt::from(pr) << 8usize;
            let pi = BigInt::from(pi) << 8usize;
            let idx = i * n + j;
            if i == j {
                lo_diag[i] = &rl[idx] - &sk - &pr;
            } else {
                let e = mag(&(&rl[idx] - &pr), &(&rh[idx] - &pr)) + mag(&(&il[idx] - &pi), &(&ih[idx] - &pi));
                rad[i] += &e;
                rad[j] += &e;
            }
        }
    }
    let rho = (0..n).map(|i| &lo_diag[i] - &rad[i]).min()?;
    let mu_low = &sigma_grid + crate::scalar::dyadic(rho, big_k);

    // Rayleigh quotient of the rounded float eigenvector, bounded above exactly.
    let xs = libm::ldexp(1.0, 30);
    let xr: Vec<i64> = xr.iter().map(|v| libm::round(v * xs) as i64).collect();
    let xi: Vec<i64> = xi.iter().map(|v| libm::round(v * xs) as i64).collect();
    let xx: i128 = xr.iter().chain(&xi).map(|&v| v as i128 * v as i128).sum();
    let mut mu_up = min_diagonal(m);
    if xx > 0 {
        let mut ub = BigInt::zero();
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (xr[i] as i128, xi[i] as i128);
                let (c, d) = (xr[j] as i128, xi[j] as i128);
                let p = BigInt::from(a * c + b * d);
                let q = BigInt::from(a * d - b * c);
                let idx = i * n + j;
                let are = if p.is_negative() { &rl[idx] } else { &rh[idx] };
                let aim = if q.is_negative() { &ih[idx] } else { &il[idx] };
                ub += &p * are - &q * aim;
            }
        }
        let rq = Rational::new(ub, BigInt::from(xx) << big_k as usize);
        if rq < mu_up {
            mu_up = rq;
        }
    }
    Some((mu_low, mu_up))
}

/// Certified `μ_low <= λ_min(M) <= μ_low + gap` where reachable. A float
/// Cholesky factor of `M - σI` is rounded to a dyadic `R`; Gershgorin on the
/// exact remainder gives the lower end and a rounded eigenvector gives the
/// upper end. Small matrices are refined by exact bisection.
pub fn min_eig_lower_bound(m: &HermitianMatrix, gap: &Rational) -> Result<SpectralBound, CertifyError> {
    if !m.is_hermitian() {
        return Err(CertifyError::NotHermitian);
    }
    let n = m.dim();
    if n == 0 {
        return Ok(SpectralBound { mu_low: Rational::zero(), gap: Rational::zero(), psd: true });
    }
    let complex = !m.is_real();
    let (re, im) = m.to_f64();
    let (lam, xr, xi) = if complex {
        hermitian_min_eig(&re, &im, n)
    } else {
        let (ev, v) = sym_eigen(&re, n);
        (ev[0], (0..n).map(|i| v[i * n]).collect(), vec![0.0; n])
    };
    let scale = re.iter().chain(&im).fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
    let mut found = None;
    if lam.is_finite() {
        let mut margin = (to_f64(gap) / 4.0).max(n as f64 * 4e-16 * scale);
        for _ in 0..12 {
            if let Some(b) = dyadic_attempt(m, &re, &im, complex, lam - margin, &xr, &xi) {
                found = Some(b);
                break;
            }
            margin *= 4.0;
        }
    }
    let (mut low, mut up) = found.unwrap_or_else(|| gershgorin(m));
    if up < low {
        up = low.clone();
    }
    if &up - &low > *gap && n <= EXACT_MAX_DIM {
        let two = int(2);
        while &up - &low > *gap {
            let mid = (&low + &up) / &two;
            if exact::is_psd(m.shift_diagonal(&-mid.clone()).data(), n) {
                low = mid;
            } else {
                up = mid;
            }
        }
    }
    let psd = if !low.is_negative() {
        true
    } else if up.is_negative() {
        false
    } else if n <= EXACT_MAX_DIM {
        exact::is_psd(m.data(), n)
    } else {
        false
    };
    if psd && low.is_negative() {
        low = Rational::zero();
    }
    let g = &up - &low;
    Ok(SpectralBound { mu_low: low, gap: g, psd })
}

fn neg_part(mu: &Rational) -> Rational {
    if mu.is_negative() {
        -mu.clone()
    } else {
        Rational::zero()
    }
}

fn path_for(delta: &Rational) -> CertPath {
    if delta.is_zero() {
        CertPath::AlreadyPsd
    } else {
        CertPath::Lifted
    }
}

/// `λ̃ - min{μ, 0}·s`.
pub fn lift_dense(lambda: &Rational, mu: &Rational, s: usize) -> CertifiedBound {
    lift_sparse(lambda, core::slice::from_ref(mu), &[s])
}

/// `λ̃ - Σ_k min{μ_k, 0}·s_k`, one term per clique.
pub fn lift_sparse(lambda: &Rational, mus: &[Rational], sizes: &[usize]) -> CertifiedBound {
    let delta = mus.iter().zip(sizes).fold(Rational::zero(), |acc, (m, &s)| acc + neg_part(m) * int(s as i64));
    CertifiedBound::from_delta(lambda, delta.clone(), path_for(&delta), sizes.to_vec())
}

/// `λ̃ - min{min_k μ_k, 0}·s_full` for blocks of one block-diagonalized matrix.
pub fn lift_symmetric(lambda: &Rational, mus: &[Rational], s_full: usize) -> CertifiedBound {
    lift_grouped(lambda, &[(mus.to_vec(), s_full)])
}

/// `λ̃ - Σ_g min{min_i μ_ig, 0}·S_g` over independent sectors.
pub fn lift_grouped(lambda: &Rational, groups: &[(Vec<Rational>, usize)]) -> CertifiedBound {
    let mut delta = Rational::zero();
    for (mus, s) in groups {
        if let Some(m) = mus.iter().min() {
            delta += neg_part(m) * int(*s as i64);
        }
    }
    let sizes = groups.iter().map(|(_, s)| *s).collect();
    CertifiedBound::from_delta(lambda, delta.clone(), path_for(&delta), sizes)
}

fn all_unipotent(p: &NpoProblem) -> bool {
    p.vars().ids().all(|x| p.rewrite.variable_family(x) == VariableFamily::Unipotent)
}

/// `λ̃ - μ·s` for a strictly positive certified `μ` and unipotent variables.
pub fn tighten_unipotent(p: &NpoProblem, lambda: &Rational, mu: &Rational, s: usize) -> Result<CertifiedBound, CertifyError> {
    if !all_unipotent(p) {
        return Err(CertifyError::NotUnipotent);
    }
    if !mu.is_positive() {
        return Err(CertifyError::NotInterior);
    }
    let delta = -(mu * int(s as i64));
    Ok(CertifiedBound::from_delta(lambda, delta, CertPath::TightenedUnipotent, vec![s]))
}

/// `τ = 1/(e₀* P⁻¹ e₀)` by an exact solve, and the boundary matrix
/// `P - τ e₀e₀*`, checked PSD exactly.
pub fn tighten_rank1(lambda: &Rational, m: &HermitianMatrix, e0: usize) -> Result<(CertifiedBound, Rational, HermitianMatrix), CertifyError> {
    if !m.is_hermitian() {
        return Err(CertifyError::NotHermitian);
    }
    let n = m.dim();
    if e0 >= n {
        return Err(CertifyError::Invalid(String::from("no constant word in basis")));
    }
    if !exact::is_psd(m.data(), n) {
        return Err(CertifyError::NotInterior);
    }
    let mut rhs = vec![Scalar::zero(); n];
    rhs[e0] = Scalar::one();
    let x = exact::solve(m.data(), n, &rhs).map_err(|_| CertifyError::NotInterior)?;
    let x0 = x[e0].re.clone();
    if !x0.is_positive() {
        return Err(CertifyError::SingularSolve);
    }
    let tau = x0.recip();
    if tau > m.get(e0, e0).re {
        return Err(CertifyError::SingularSolve);
    }
    let mut down = m.clone();
    down.get_mut(e0, e0).re -= &tau;
    if !exact::is_psd(down.data(), n) {
        return Err(CertifyError::SingularSolve);
    }
    let b = CertifiedBound::from_delta(lambda, -tau.clone(), CertPath::TightenedRank1, vec![n]);
    Ok((b, tau, down))
}

/// Finds, for every variable, a family that bounds it.
pub fn constraint_families(p: &NpoProblem) -> Result<Vec<(VarId, ConstraintFamily)>, CertifyError> {
    let rs = &p.rewrite;
    let mut out = Vec::new();
    for x in p.vars().ids() {
        let fam = match rs.variable_family(x) {
            VariableFamily::Unipotent => Some(ConstraintFamily::Unipotent),
            VariableFamily::Projector => Some(ConstraintFamily::Projector),
            VariableFamily::Free => {
                let xx = rs.reduce(&Polynomial::var(x).mul(&Polynomial::var(x)));
                let box_poly = Polynomial::one().sub(&xx);
                let boxed = p.inequalities.iter().position(|g| *g == box_poly);
                match boxed {
                    Some(i) => Some(ConstraintFamily::Box { inequality: i }),
                    None => p.inequalities.iter().position(|g| ball_members(g).is_some_and(|s| s.contains(&x))).map(|i| ConstraintFamily::Ball { inequality: i }),
                }
            }
        };
        match fam {
            Some(f) => out.push((x, f)),
            None => return Err(CertifyError::UnsupportedConstraintFamily(String::from(p.vars().label(x)))),
        }
    }
    Ok(out)
}

/// Variables of `g = 1 - Σ y²`, if `g` has that shape.
fn ball_members(g: &Polynomial) -> Option<BTreeSet<VarId>> {
    if g.constant_term() != Scalar::one() {
        return None;
    }
    let mut s = BTreeSet::new();
    for (w, c) in g.terms() {
        if w.is_one() {
            continue;
        }
        let l = w.letters();
        if l.len() != 2 || l[0] != l[1] || *c != -Scalar::one() {
            return None;
        }
        s.insert(l[0]);
    }
    Some(s)
}

/// Explicit terms with `ε Σ_{w∈W} (1 - w*w) = Σ weight · s* c s`, built word
/// by word from `1 - w*w = Σ_m s_m* (1 - x_m²) s_m` (`s_m` the suffix after
/// position `m`) and the per-family identity for `1 - x²`.
pub fn constant_sohs_witness(
    p: &NpoProblem,
    families: &[(VarId, ConstraintFamily)],
    words: &[Word],
    eps: &Rational,
) -> Result<ConstantWitness, CertifyError> {
    let fam: BTreeMap<VarId, &ConstraintFamily> = families.iter().map(|(x, f)| (*x, f)).collect();
    let mut terms = Vec::new();
    let two = int(2);
    for w in words {
        let l = w.letters();
        for (m, &x) in l.iter().enumerate() {
            let s = Polynomial::word(Word::from_letters(l[m + 1..].to_vec()));
            let f = fam.get(&x).ok_or_else(|| CertifyError::UnsupportedConstraintFamily(String::from(p.vars().label(x))))?;
            match f {
                ConstraintFamily::Unipotent => {}
                ConstraintFamily::Projector => {
                    let xm1 = Polynomial::var(x).sub(&Polynomial::one());
                    terms.push(WitnessTerm { weight: eps.clone(), poly: xm1.mul(&s), factor: WitnessFactor::Square });
                    let ideal = Polynomial::var(x).sub(&Polynomial::var(x).mul(&Polynomial::var(x)));
                    terms.push(WitnessTerm { weight: eps * &two, poly: s.clone(), factor: WitnessFactor::Ideal(ideal) });
                }
                ConstraintFamily::Box { inequality } => {
                    terms.push(WitnessTerm { weight: eps.clone(), poly: s, factor: WitnessFactor::Inequality(*inequality) });
                }
                ConstraintFamily::Ball { inequality } => {
                    let members = p.inequalities.get(*inequality).and_then(ball_members).ok_or_else(|| {
                        CertifyError::Invalid(format!("inequality #{inequality} is not a ball constraint"))
                    })?;
                    for y in members.into_iter().filter(|&y| y != x) {
                        terms.push(WitnessTerm { weight: eps.clone(), poly: Polynomial::var(y).mul(&s), factor: WitnessFactor::Square });
                    }
                    terms.push(WitnessTerm { weight: eps.clone(), poly: s, factor: WitnessFactor::Inequality(*inequality) });
                }
            }
        }
    }
    Ok(ConstantWitness { epsilon: eps.clone(), words: words.to_vec(), terms })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifyConfig {
    /// Target width of the eigenvalue enclosures.
    pub gap: Rational,
    pub tighten: bool,
    /// Every final Gram block keeps `λ_min >= margin·max(1, max diag)`, so
    /// that the verifier's floating factorization has room to succeed.
    pub margin: Rational,
    pub rank1_max_dim: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            gap: rat(1, 1_000_000_000_000),
            tighten: false,
            margin: Rational::new(BigInt::one(), BigInt::one() << 32usize),
            rank1_max_dim: 32,
        }
    }
}

/// Gram blocks sharing a lifting sector, with the basis-change diagonal `D`
/// (`B B* = D`, `B` square over the sector's words).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sector {
    pub id: usize,
    /// Positions in `PreCertificate::grams`.
    pub blocks: Vec<usize>,
    pub words: Vec<Word>,
    pub d: Vec<Vec<Rational>>,
    pub c_max: Rational,
    pub c_min: Rational,
}

pub fn analyze_sectors(structures: &[GramStructure], pre: &PreCertificate) -> Result<Vec<Sector>, CertifyError> {
    let mut by_id: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (pos, (k, _)) in pre.grams.iter().enumerate() {
        if let BlockRole::Gram { sector } = structures[*k].role {
            by_id.entry(sector).or_default().push(pos);
        }
    }
    let mut out = Vec::new();
    for (id, blocks) in by_id {
        let mut words = BTreeSet::new();
        let mut polys: Vec<&Polynomial> = Vec::new();
        let mut d = Vec::new();
        for &pos in &blocks {
            let s = &structures[pre.grams[pos].0];
            let mut dd = Vec::new();
            for b in s.basis() {
                words.extend(b.terms().map(|(w, _)| w.clone()));
                dd.push(b.terms().fold(Rational::zero(), |acc, (_, c)| acc + c.norm_sqr()));
                polys.push(b);
            }
            d.push(dd);
        }
        if polys.len() != words.len() {
            return Err(CertifyError::InvalidSector(id));
        }
        let monomial = blocks.iter().all(|&pos| structures[pre.grams[pos].0].is_monomial());
        if !monomial {
            for (i, a) in polys.iter().enumerate() {
                for b in &polys[i + 1..] {
                    let mut ip = Scalar::zero();
                    for (w, ca) in a.terms() {
                        ip += &ca.conj() * &b.coeff(w);
                    }
                    if !ip.is_zero() {
                        return Err(CertifyError::InvalidSector(id));
                    }
                }
            }
        }
        let all: Vec<&Rational> = d.iter().flatten().collect();
        let c_max = all.iter().copied().max().cloned().unwrap_or_else(Rational::one);
        let c_min = all.iter().copied().min().cloned().unwrap_or_else(Rational::one);
        if c_min.is_zero() {
            return Err(CertifyError::InvalidSector(id));
        }
        out.push(Sector { id, blocks, words: words.into_iter().collect(), d, c_max, c_min });
    }
    Ok(out)
}

/// `G + ε D⁻¹` (negative `ε` subtracts).
fn shift_by(g: &HermitianMatrix, eps: &Rational, d: &[Rational]) -> HermitianMatrix {
    let inv: Vec<Rational> = d.iter().map(|x| x.recip()).collect();
    g.add_diagonal(eps, &inv)
}

fn max_diag_scale(g: &HermitianMatrix) -> Rational {
    let mut s = Rational::one();
    for i in 0..g.dim() {
        let v = g.get(i, i).re.abs();
        if v > s {
            s = v;
        }
    }
    s
}

/// Chooses already-PSD / lifting / tightening from certified block bounds
/// (`bounds[i]` belongs to `pre.grams[i]`) and assembles the certificate.
pub fn certify(
    p: &NpoProblem,
    structures: &[GramStructure],
    pre: &PreCertificate,
    bounds: &[SpectralBound],
    order: usize,
    cfg: &CertifyConfig,
) -> Result<(CertifiedBound, Certificate), CertifyError> {
    if bounds.len() != pre.grams.len() {
        return Err(CertifyError::Invalid(String::from("one spectral bound per Gram block expected")));
    }
    let families = constraint_families(p)?;
    let sectors = analyze_sectors(structures, pre)?;
    // effective bounds keep the verification margin in reserve
    let mu_eff: Vec<Rational> = pre
        .grams
        .iter()
        .zip(bounds)
        .map(|((_, g), b)| &b.mu_low - &cfg.margin * max_diag_scale(g))
        .collect();
    let lambda = &pre.lambda;
    let mut grams: Vec<HermitianMatrix> = pre.grams.iter().map(|(_, g)| g.clone()).collect();
    let mut witnesses = Vec::new();
    let sector_min: Vec<Rational> = sectors
        .iter()
        .map(|s| s.blocks.iter().map(|&b| mu_eff[b].clone()).min().unwrap_or_else(Rational::zero))
        .collect();
    let sizes: Vec<usize> = sectors.iter().map(|s| s.words.len()).collect();

    let mut result;
    if sector_min.iter().all(|m| !m.is_negative()) {
        result = CertifiedBound::from_delta(lambda, Rational::zero(), CertPath::AlreadyPsd, sizes.clone());
        if cfg.tighten && sector_min.iter().all(|m| m.is_positive()) {
            let mut best: Option<(CertifiedBound, Vec<HermitianMatrix>)> = None;
            if all_unipotent(p) {
                let mut delta = Rational::zero();
                let mut tg = grams.clone();
                for (s, m) in sectors.iter().zip(&sector_min) {
                    let eps = m * &s.c_min;
                    delta -= &eps * int(s.words.len() as i64);
                    for (bi, &b) in s.blocks.iter().enumerate() {
                        tg[b] = shift_by(&grams[b], &-eps.clone(), &s.d[bi]);
                    }
                }
                let ok = tg.iter().all(|g| min_eig_lower_bound(g, &cfg.gap).map(|b| b.psd).unwrap_or(false));
                if ok && delta.is_negative() {
                    best = Some((CertifiedBound::from_delta(lambda, delta, CertPath::TightenedUnipotent, sizes.clone()), tg));
                }
            }
            let rank1_ok = pre.grams.iter().all(|(k, g)| structures[*k].constant_position().is_some() && g.dim() <= cfg.rank1_max_dim);
            if rank1_ok {
                let mut delta = Rational::zero();
                let mut tg = grams.clone();
                let mut ok = true;
                for (i, (k, g)) in pre.grams.iter().enumerate() {
                    let e0 = structures[*k].constant_position().unwrap_or(0);
                    match tighten_rank1(lambda, g, e0) {
                        Ok((_, tau, down)) => {
                            delta -= tau;
                            tg[i] = down;
                        }
                        Err(_) => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok && delta.is_negative() && best.as_ref().is_none_or(|(b, _)| lambda + &delta < b.lambda_rat) {
                    best = Some((CertifiedBound::from_delta(lambda, delta, CertPath::TightenedRank1, sizes.clone()), tg));
                }
            }
            if let Some((b, tg)) = best {
                result = b;
                grams = tg;
            }
        }
    } else {
        let mut delta = Rational::zero();
        for (s, m) in sectors.iter().zip(&sector_min) {
            let eps = neg_part(m) * &s.c_max;
            if eps.is_zero() {
                continue;
            }
            delta += &eps * int(s.words.len() as i64);
            for (bi, &b) in s.blocks.iter().enumerate() {
                grams[b] = shift_by(&grams[b], &eps, &s.d[bi]);
            }
            witnesses.push(constant_sohs_witness(p, &families, &s.words, &eps)?);
        }
        result = CertifiedBound::from_delta(lambda, delta, CertPath::Lifted, sizes.clone());
    }
    result.spectral = bounds.to_vec();

    let sector_of: BTreeMap<usize, usize> = sectors.iter().flat_map(|s| s.blocks.iter().map(move |&b| (b, s.id))).collect();
    let blocks = pre
        .grams
        .iter()
        .zip(grams)
        .enumerate()
        .map(|(pos, ((k, _), g))| CertBlock {
            label: structures[*k].label.clone(),
            sector: sector_of.get(&pos).copied().unwrap_or(0),
            basis: structures[*k].basis().to_vec(),
            gram: g,
        })
        .collect();
    let localizers = pre
        .localizers
        .iter()
        .map(|(k, c)| {
            let inequality = match structures[*k].role {
                BlockRole::Localizer { inequality } => inequality,
                _ => usize::MAX,
            };
            LocalizerCert { inequality, multipliers: multiplier_polynomials(c, structures[*k].basis()) }
        })
        .collect();
    let moments = pre
        .moments
        .iter()
        .map(|(k, kappa)| {
            let index = match structures[*k].role {
                BlockRole::Moment { index } => index,
                _ => usize::MAX,
            };
            MomentCert { index, kappa: kappa.clone() }
        })
        .collect();
    let spectral = pre
        .grams
        .iter()
        .zip(bounds)
        .map(|((k, _), b)| SpectralRecord { block: structures[*k].label.clone(), mu_low: b.mu_low.clone(), gap: b.gap.clone(), psd: b.psd })
        .collect();
    let cert = Certificate {
        problem: p.name.clone(),
        order,
        bound: result.lambda_rat.clone(),
        lambda_tilde: lambda.clone(),
        path: result.path,
        blocks,
        localizers,
        moments,
        witnesses,
        families,
        spectral,
    };
    Ok((result, cert))
}
