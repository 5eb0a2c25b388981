//! Problem generators and the small exact oracles used to check them:
//! two-party Bell expressions, tilted CHSH, a plain-text catalog format,
//! Heisenberg chains, and exact diagonalization of Pauli polynomials.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::certify::min_eig_lower_bound;
use crate::linalg::hermitian_eigenvalues;
use crate::matrix::HermitianMatrix;
use crate::ncalgebra::{AlgebraError, Polynomial, RewriteSystem, VarId, VariableSet, Word};
use crate::relaxation::{NpoProblem, RelaxError, Sense};
use crate::scalar::{int, parse_rational, rat, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProblemError {
    #[error("table dimensions do not match the measurement counts")]
    DimensionMismatch,
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("size {sites} exceeds the enumeration cap of {max}")]
    TooLarge { sites: usize, max: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Largest party enumerated by [`BellSpec::classical_value`].
pub const CLASSICAL_MAX: usize = 16;

/// `Σ c_ij ⟨A_i B_j⟩ + Σ a_i ⟨A_i⟩ + Σ b_j ⟨B_j⟩` with dichotomic observables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellSpec {
    pub m_a: usize,
    pub m_b: usize,
    /// Row-major `m_a × m_b`.
    pub c: Vec<Vec<Rational>>,
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
}

impl BellSpec {
    pub fn zero(m_a: usize, m_b: usize) -> Self {
        BellSpec { m_a, m_b, c: vec![vec![Rational::zero(); m_b]; m_a], a: vec![Rational::zero(); m_a], b: vec![Rational::zero(); m_b] }
    }

    pub fn chsh() -> Self {
        let mut s = BellSpec::zero(2, 2);
        s.c = vec![vec![int(1), int(1)], vec![int(1), int(-1)]];
        s
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.c.len() != self.m_a || self.c.iter().any(|r| r.len() != self.m_b) || self.a.len() != self.m_a || self.b.len() != self.m_b {
            return Err(ProblemError::DimensionMismatch);
        }
        Ok(())
    }

    /// Largest value over deterministic ±1 assignments. Only the party with
    /// fewer observables is enumerated: for fixed signs on that side the
    /// other side contributes `Σ_j |Σ_i c_ij a_i + b_j|`.
    pub fn classical_value(&self) -> Result<Rational, ProblemError> {
        self.validate()?;
        let transposed;
        let s = if self.m_b < self.m_a {
            transposed = self.transpose();
            &transposed
        } else {
            self
        };
        if s.m_a > CLASSICAL_MAX {
            return Err(ProblemError::TooLarge { sites: s.m_a, max: CLASSICAL_MAX });
        }
        let mut best: Option<Rational> = None;
        for bits in 0u32..(1 << s.m_a) {
            let sign = |k: usize| if bits >> k & 1 == 1 { -1i64 } else { 1 };
            let mut v = Rational::zero();
            for i in 0..s.m_a {
                v += &s.a[i] * int(sign(i));
            }
            for j in 0..s.m_b {
                let mut field = s.b[j].clone();
                for i in 0..s.m_a {
                    field += &s.c[i][j] * int(sign(i));
                }
                v += field.abs();
            }
            if best.as_ref().is_none_or(|b| v > *b) {
                best = Some(v);
            }
        }
        Ok(best.unwrap_or_else(Rational::zero))
    }

    /// Bob's table as Alice's.
    pub fn transpose(&self) -> Self {
        BellSpec {
            m_a: self.m_b,
            m_b: self.m_a,
            c: (0..self.m_b).map(|j| (0..self.m_a).map(|i| self.c[i][j].clone()).collect()).collect(),
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }
}

/// Alice's observables are `A0..`, Bob's `B0..`; all unipotent, and the two
/// parties commute.
pub fn bell_two_party(name: &str, spec: &BellSpec) -> Result<NpoProblem, ProblemError> {
    spec.validate()?;
    let mut vars = VariableSet::new();
    for i in 0..spec.m_a {
        vars.push(&format!("A{i}"), Some(0))?;
    }
    for j in 0..spec.m_b {
        vars.push(&format!("B{j}"), Some(1))?;
    }
    let ids: Vec<VarId> = vars.ids().collect();
    let rs = RewriteSystem::builder(vars).unipotent(&ids).commuting_partition().build()?;
    let a = |i: usize| i as VarId;
    let b = |j: usize| (spec.m_a + j) as VarId;
    let mut f = Polynomial::zero();
    for i in 0..spec.m_a {
        for j in 0..spec.m_b {
            f.add_term(Word::from_letters(vec![a(i), b(j)]), Scalar::real(spec.c[i][j].clone()));
        }
        f.add_term(Word::letter(a(i)), Scalar::real(spec.a[i].clone()));
    }
    for j in 0..spec.m_b {
        f.add_term(Word::letter(b(j)), Scalar::real(spec.b[j].clone()));
    }
    let mut p = NpoProblem::new(name, rs, &f, Sense::Maximize)?.with_metadata("model", "bell");
    // omitted when enumeration is out of reach
    if let Ok(v) = spec.classical_value() {
        p = p.with_metadata("classical", &v.to_string());
    }
    Ok(p)
}

/// `Σ (-1)^{xy} ⟨A_x B_y⟩ + θ_A ⟨A_0⟩ + θ_B ⟨B_0⟩`.
pub fn tilted_chsh(theta_a: &Rational, theta_b: &Rational) -> Result<NpoProblem, ProblemError> {
    let mut s = BellSpec::chsh();
    s.a[0] = theta_a.clone();
    s.b[0] = theta_b.clone();
    let name = if theta_a.is_zero() && theta_b.is_zero() { String::from("chsh") } else { format!("tilted-chsh({theta_a},{theta_b})") };
    bell_two_party(&name, &s)
}

pub fn chsh() -> NpoProblem {
    bell_two_party("chsh", &BellSpec::chsh()).expect("CHSH spec is well formed")
}

fn row(s: &str, line: usize) -> Result<Vec<Rational>, ProblemError> {
    s.split_whitespace()
        .map(|t| parse_rational(t).map_err(|e| ProblemError::Parse { line, message: format!("{t:?}: {e}") }))
        .collect()
}

/// Reads catalog text: one entry per line, `name: m_A m_B ; c (row-major) ; a ; b`.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_catalog(text: &str) -> Result<Vec<(String, BellSpec)>, ProblemError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let err = |m: &str| ProblemError::Parse { line, message: String::from(m) };
        let (name, body) = l.split_once(':').ok_or_else(|| err("missing `name:` prefix"))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(err("empty name"));
        }
        let parts: Vec<&str> = body.split(';').collect();
        if parts.len() != 4 {
            return Err(err("expected four `;`-separated fields"));
        }
        let dims: Vec<usize> = parts[0]
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| err("measurement counts must be integers")))
            .collect::<Result<_, _>>()?;
        let [m_a, m_b] = dims[..] else {
            return Err(err("expected `m_A m_B`"));
        };
        let c = row(parts[1], line)?;
        if c.len() != m_a * m_b {
            return Err(err("c has the wrong number of entries"));
        }
        let spec = BellSpec {
            m_a,
            m_b,
            c: if m_b == 0 { vec![Vec::new(); m_a] } else { c.chunks(m_b).map(|r| r.to_vec()).collect() },
            a: row(parts[2], line)?,
            b: row(parts[3], line)?,
        };
        spec.validate().map_err(|_| err("a or b has the wrong length"))?;
        out.push((String::from(name), spec));
    }
    Ok(out)
}

pub fn format_catalog(entries: &[(String, BellSpec)]) -> String {
    let join = |v: &[Rational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut s = String::new();
    for (name, spec) in entries {
        let c: Vec<Rational> = spec.c.iter().flatten().cloned().collect();
        s += &format!("{name}: {} {} ; {} ; {} ; {}\n", spec.m_a, spec.m_b, join(&c), join(&spec.a), join(&spec.b));
    }
    s
}

/// `H = ¼ Σ_i Σ_a (σᵢᵃσᵢ₊₁ᵃ + J₂ σᵢᵃσᵢ₊₂ᵃ)` on `n` spin-½ sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSpec {
    pub n: usize,
    pub j2: Rational,
    pub periodic: bool,
}

/// Site cap for exact diagonalization (`2^8 = 256`).
pub const ED_MAX_SITES: usize = 8;

impl ChainSpec {
    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.n < 2 {
            return Err(ProblemError::InvalidSpec(String::from("at least two sites")));
        }
        if self.periodic && self.n < 3 {
            return Err(ProblemError::InvalidSpec(String::from("periodic chains need three sites; use an open pair")));
        }
        if !self.j2.is_zero() && self.n < 3 {
            return Err(ProblemError::InvalidSpec(String::from("second-neighbor coupling needs three sites")));
        }
        Ok(())
    }

    pub fn is_majumdar_ghosh(&self) -> bool {
        self.j2 == rat(1, 2)
    }

    /// Bonds `(i, j, J)` with `i < j` as sites.
    pub fn bonds(&self) -> Vec<(usize, usize, Rational)> {
        let mut out = Vec::new();
        for (shift, j) in [(1usize, Rational::one()), (2, self.j2.clone())] {
            if j.is_zero() {
                continue;
            }
            for i in 0..self.n {
                let k = i + shift;
                if k < self.n {
                    out.push((i, k, j.clone()));
                } else if self.periodic {
                    let k = k % self.n;
                    out.push((i.min(k), i.max(k), j.clone()));
                }
            }
        }
        out
    }
}

/// Pauli variable `σᵃ` on `site` (`a` = 0, 1, 2 for x, y, z).
pub fn pauli_var(site: usize, a: usize) -> VarId {
    (3 * site + a) as VarId
}

/// `X_i, Y_i, Z_i` per site with the Pauli relations; distinct sites commute.
pub fn pauli_system(n: usize) -> Result<RewriteSystem, ProblemError> {
    let mut vars = VariableSet::new();
    for i in 0..n {
        for a in ["X", "Y", "Z"] {
            vars.push(&format!("{a}{i}"), Some(i as u32))?;
        }
    }
    let mut b = RewriteSystem::builder(vars);
    for i in 0..n {
        b = b.pauli_site(pauli_var(i, 0), pauli_var(i, 1), pauli_var(i, 2));
    }
    Ok(b.commuting_partition().build()?)
}

/// The Hamiltonian in normal form over [`pauli_system`].
pub fn hamiltonian(spec: &ChainSpec, rs: &RewriteSystem) -> Result<Polynomial, ProblemError> {
    spec.validate()?;
    let q = rat(1, 4);
    let mut h = Polynomial::zero();
    for (i, j, c) in spec.bonds() {
        for a in 0..3 {
            let w = Word::from_letters(vec![pauli_var(i, a), pauli_var(j, a)]);
            h.add_term(w, Scalar::real(&q * &c));
        }
    }
    Ok(rs.normal_form(&h)?)
}

/// Maximize `-H/N`: certified upper bounds on it are lower bounds on the
/// ground energy per site.
pub fn heisenberg_chain(spec: &ChainSpec) -> Result<NpoProblem, ProblemError> {
    let rs = pauli_system(spec.n)?;
    let h = hamiltonian(spec, &rs)?;
    let f = h.scale_rational(&-Rational::new(1.into(), spec.n.into()));
    let name = format!("heisenberg-n{}-j2={}{}", spec.n, spec.j2, if spec.periodic { "" } else { "-open" });
    let mut p = NpoProblem::new(&name, rs, &f, Sense::Maximize)?
        .with_metadata("model", "heisenberg")
        .with_metadata("sites", &spec.n.to_string())
        .with_metadata("j2", &spec.j2.to_string())
        .with_metadata("periodic", if spec.periodic { "true" } else { "false" });
    if spec.is_majumdar_ghosh() {
        p = p.with_metadata("majumdar_ghosh", "true");
    }
    Ok(p)
}

/// Observable mode: maximize `sign·O/N` over states whose energy lies in
/// `[e_low, e_up]`, enforced through the moment inequalities
/// `⟨H⟩ >= e_low` and `⟨-H⟩ >= -e_up`.
pub fn heisenberg_observable(
    spec: &ChainSpec,
    observable: &Polynomial,
    sign: i64,
    e_low: &Rational,
    e_up: &Rational,
) -> Result<NpoProblem, ProblemError> {
    if e_low > e_up {
        return Err(ProblemError::InvalidSpec(String::from("empty energy window")));
    }
    let rs = pauli_system(spec.n)?;
    let h = hamiltonian(spec, &rs)?;
    let f = observable.scale_rational(&Rational::new(sign.into(), spec.n.into()));
    let name = format!("heisenberg-n{}-observable", spec.n);
    let p = NpoProblem::new(&name, rs, &f, Sense::Maximize)?
        .with_moment_inequality(&h, e_low.clone())?
        .with_moment_inequality(&h.scale_rational(&int(-1)), -e_up.clone())?
        .with_metadata("model", "heisenberg-observable")
        .with_metadata("sites", &spec.n.to_string());
    Ok(p)
}

/// The `2^n × 2^n` matrix of a polynomial over [`pauli_system`]`(n)`;
/// site `i` is bit `i` of the basis index.
pub fn pauli_matrix(p: &Polynomial, n: usize) -> Result<HermitianMatrix, ProblemError> {
    if n > ED_MAX_SITES {
        return Err(ProblemError::TooLarge { sites: n, max: ED_MAX_SITES });
    }
    let dim = 1usize << n;
    let mut data = vec![Scalar::zero(); dim * dim];
    for (w, c) in p.terms() {
        for s in 0..dim {
            let mut state = s;
            let mut phase = Scalar::one();
            for &v in w.letters().iter().rev() {
                let (site, a) = (v as usize / 3, v as usize % 3);
                if site >= n {
                    return Err(ProblemError::InvalidSpec(format!("variable {v} outside {n} sites")));
                }
                let up = state >> site & 1 == 0;
                match a {
                    0 => state ^= 1 << site,
                    1 => {
                        phase = &phase * &if up { Scalar::i() } else { -Scalar::i() };
                        state ^= 1 << site;
                    }
                    _ => {
                        if !up {
                            phase = -phase;
                        }
                    }
                }
            }
            data[state * dim + s] += &phase * c;
        }
    }
    HermitianMatrix::from_row_major(dim, data).ok_or_else(|| ProblemError::InvalidSpec(String::from("bad dimension")))
}

/// Ground energy of `H`, certified to a rational interval.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundEnergy {
    pub low: Rational,
    pub high: Rational,
    pub estimate: f64,
    /// Lowest two float eigenvalues agree to `1e-8`.
    pub degenerate: bool,
}

/// Exact diagonalization for `n <= 8`: a float eigensolve, then a certified
/// enclosure of the exact rational Hamiltonian's smallest eigenvalue.
pub fn exact_diagonalization(spec: &ChainSpec, gap: &Rational) -> Result<GroundEnergy, ProblemError> {
    if spec.n > ED_MAX_SITES {
        return Err(ProblemError::TooLarge { sites: spec.n, max: ED_MAX_SITES });
    }
    let rs = pauli_system(spec.n)?;
    let h = pauli_matrix(&hamiltonian(spec, &rs)?, spec.n)?;
    let (re, im) = h.to_f64();
    let ev = hermitian_eigenvalues(&re, &im, h.dim());
    let b = min_eig_lower_bound(&h, gap).map_err(|e| ProblemError::InvalidSpec(e.to_string()))?;
    let high = &b.mu_low + &b.gap;
    debug_assert!(!b.gap.is_negative());
    Ok(GroundEnergy { low: b.mu_low, high, estimate: ev[0], degenerate: ev.len() > 1 && (ev[1] - ev[0]).abs() < 1e-8 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_examples() {
        let p = chsh();
        assert_eq!(p.objective.len(), 4);
        assert_eq!(BellSpec::chsh().classical_value().unwrap(), int(2));
        assert_eq!(BellSpec::zero(2, 2).classical_value().unwrap(), int(0));
        let mut bad = BellSpec::chsh();
        bad.a.pop();
        assert_eq!(bell_two_party("x", &bad).unwrap_err(), ProblemError::DimensionMismatch);
        let t = tilted_chsh(&int(0), &int(0)).unwrap();
        assert_eq!(t.objective, p.objective);
        let mut s = BellSpec::chsh();
        s.a[0] = rat(999, 1000);
        s.b[0] = rat(999, 1000);
        assert_eq!(s.classical_value().unwrap(), int(2) + rat(1998, 1000));
    }

    #[test]
    fn catalog_roundtrip() {
        let text = "# sample\nCHSH: 2 2 ; 1 1 1 -1 ; 0 0 ; 0 0\nI3322: 3 3 ; 1 1 1 1 1 -1 1 -1 0 ; 1 0 0 ; 0 0 0\n";
        let cat = parse_catalog(text).unwrap();
        assert_eq!(cat.len(), 2);
        assert_eq!(cat[0].1, BellSpec::chsh());
        assert_eq!(parse_catalog(&format_catalog(&cat)).unwrap(), cat);
        match parse_catalog("ok: 1 1 ; 1 ; 0 ; 0\n\nbad: 2 2 ; 1 1 ; 0 0 ; 0 0") {
            Err(ProblemError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn chain_construction() {
        let p = heisenberg_chain(&ChainSpec { n: 4, j2: int(0), periodic: true }).unwrap();
        assert_eq!(p.vars().len(), 12);
        assert_eq!(p.objective.len(), 12);
        let open = heisenberg_chain(&ChainSpec { n: 3, j2: int(0), periodic: false }).unwrap();
        assert_eq!(open.objective.len(), 6);
        let mg = heisenberg_chain(&ChainSpec { n: 6, j2: rat(1, 2), periodic: true }).unwrap();
        assert_eq!(mg.metadata.get("majumdar_ghosh").map(String::as_str), Some("true"));
        assert!(heisenberg_chain(&ChainSpec { n: 2, j2: int(0), periodic: true }).is_err());
    }

    #[test]
    fn pauli_matrices() {
        let rs = pauli_system(1).unwrap();
        let xy = rs.reduce(&Polynomial::var(0).mul(&Polynomial::var(1)));
        let m_xy = pauli_matrix(&xy, 1);
        // XY = iZ is not Hermitian, so the matrix constructor rejects it
        assert!(m_xy.is_err() || !m_xy.unwrap().is_hermitian());
        let z = pauli_matrix(&Polynomial::var(2), 1).unwrap();
        assert_eq!(z.get(1, 1), &Scalar::from_int(-1));
        let y = pauli_matrix(&Polynomial::var(1), 1).unwrap();
        assert_eq!(y.get(1, 0), &Scalar::i());
    }

    #[test]
    fn small_ground_states() {
        let ed = exact_diagonalization(&ChainSpec { n: 4, j2: int(0), periodic: true }, &rat(1, 1_000_000)).unwrap();
        assert!(ed.low <= int(-2) && int(-2) <= ed.high && &ed.high - &ed.low <= rat(1, 1_000_000));
        let pair = exact_diagonalization(&ChainSpec { n: 2, j2: int(0), periodic: false }, &rat(1, 1_000_000)).unwrap();
        assert!(pair.low <= rat(-3, 4) && rat(-3, 4) <= pair.high);
        let mg = exact_diagonalization(&ChainSpec { n: 6, j2: rat(1, 2), periodic: true }, &rat(1, 1_000_000)).unwrap();
        assert!(mg.degenerate);
        assert!(mg.low <= rat(-9, 4) && rat(-9, 4) <= mg.high, "{} {}", mg.low, mg.high);
    }
}
