//! Instances and checks shared by the integration tests and the acceptance
//! run. Oracles live in `common`; this module drives the library.
#![allow(dead_code)]

use certibound_core::certify::{CertifyConfig, SpectralBound};
use certibound_core::ncalgebra::parse_polynomial;
use certibound_core::pipeline::{involution_blocks, relax, relax_with_bases, RelaxOptions, Relaxation};
use certibound_core::problems::{chsh, pauli_system};
use certibound_core::rationalize::{
    build_projection_system, frobenius_project, multiplier_polynomials, rational_lhs, round_solution, PreCertificate,
    RoundingConfig,
};
use certibound_core::relaxation::{BlockRole, GramStructure, NpoProblem, Sense};
use certibound_core::scalar::int;
use certibound_core::sdpsolve::{FloatBlock, NumericSolution};
use certibound_core::verifier::{verify, Certificate, WitnessFactor};
use certibound_core::{HermitianMatrix, Polynomial, Rational, RewriteSystem, RuleFamily, Scalar, VariableSet};
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::common::*;

pub fn seed() -> u64 {
    std::env::var("CERTIBOUND_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(20240917)
}

pub fn problem(labels: &[(&str, Option<u32>)], fams: Vec<RuleFamily>, f: &str, ineqs: &[&str]) -> NpoProblem {
    let vars = VariableSet::from_labels(labels.iter().copied()).unwrap();
    let obj = parse_polynomial(f, &vars).unwrap();
    let gs: Vec<Polynomial> = ineqs.iter().map(|g| parse_polynomial(g, &vars).unwrap()).collect();
    let rs = RewriteSystem::new(vars, fams).unwrap();
    let mut p = NpoProblem::new("t", rs, &obj, Sense::Maximize).unwrap();
    for g in &gs {
        p = p.with_inequality(g).unwrap();
    }
    p
}

/// Small relaxations (total Gram dimension at most 12), covering both
/// projection paths and complex data.
pub fn small_instances() -> Vec<(&'static str, NpoProblem, Relaxation)> {
    let mut out = Vec::new();
    let x = problem(&[("X", None)], vec![RuleFamily::Unipotent(vec![0])], "X", &[]);
    out.push(("x", x.clone(), relax(&x, &RelaxOptions::dense(1)).unwrap()));
    out.push(("x-d2", x.clone(), relax(&x, &RelaxOptions::dense(2)).unwrap()));
    let c = chsh();
    out.push(("chsh", c.clone(), relax(&c, &RelaxOptions::dense(1)).unwrap()));
    out.push(("chsh-sparse", c.clone(), relax(&c, &RelaxOptions::sparse(1)).unwrap()));
    let [plus, minus] = involution_blocks(&c, 1, &[2, 3, 0, 1]).unwrap();
    out.push(("chsh-swap", c.clone(), relax_with_bases(&c, 1, &[vec![plus, minus]]).unwrap()));
    let rs = pauli_system(1).unwrap();
    let f = parse_polynomial("X0 + Z0", rs.vars()).unwrap();
    let pauli = NpoProblem::new("pauli", rs, &f, Sense::Maximize).unwrap();
    out.push(("pauli", pauli.clone(), relax(&pauli, &RelaxOptions::dense(1)).unwrap()));
    let pq = problem(&[("P", Some(0)), ("Q", Some(0))], vec![RuleFamily::Projector(vec![0, 1])], "P + Q - P*Q - Q*P", &[]);
    out.push(("projectors", pq.clone(), relax(&pq, &RelaxOptions::dense(1)).unwrap()));
    let free = problem(&[("X", None)], vec![], "X - X^2", &[]);
    out.push(("free", free.clone(), relax(&free, &RelaxOptions::dense(1)).unwrap()));
    let uv = problem(
        &[("U", Some(0)), ("V", Some(1))],
        vec![RuleFamily::Unipotent(vec![0, 1]), RuleFamily::CommutingPartition],
        "U*V + U",
        &[],
    );
    out.push(("commuting", uv.clone(), relax(&uv, &RelaxOptions::dense(2)).unwrap()));
    for (_, _, r) in &out {
        assert!(r.sdp.total_dim() <= 12);
    }
    out
}

pub fn random_blocks(r: &Relaxation, rng: &mut ChaCha8Rng, scale: f64) -> Vec<FloatBlock> {
    r.sdp
        .blocks
        .iter()
        .map(|b| {
            let n = b.dim;
            let mut re = vec![0.0; n * n];
            let mut im = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let v = rng.gen_range(-scale..scale);
                    re[i * n + j] = v;
                    re[j * n + i] = v;
                    if b.complex && i < j {
                        let w = rng.gen_range(-scale..scale);
                        im[i * n + j] = w;
                        im[j * n + i] = -w;
                    }
                }
            }
            FloatBlock::from_hermitian(&re, b.complex.then_some(&im[..]), n)
        })
        .collect()
}

/// Adds uniform noise in `(-mag, mag)` to every stored entry.
pub fn perturb(sol: &NumericSolution, sdp_complex: &[bool], rng: &mut ChaCha8Rng, mag: f64) -> NumericSolution {
    let mut out = sol.clone();
    for (b, &cx) in out.blocks.iter_mut().zip(sdp_complex) {
        let n = b.dim;
        let (mut re, mut im) = b.hermitian_parts();
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-mag..mag);
                re[i * n + j] += v;
                re[j * n + i] = re[i * n + j];
                if cx && i < j {
                    let w = rng.gen_range(-mag..mag);
                    im[i * n + j] += w;
                    im[j * n + i] = -im[i * n + j];
                }
            }
        }
        *b = FloatBlock::from_hermitian(&re, cx.then_some(&im[..]), n);
    }
    out
}

pub struct Projected {
    pub ps: Vec<Param>,
    pub rounded: Vec<HermitianMatrix>,
    pub projected: Vec<HermitianMatrix>,
    pub a: Vec<Vec<Rational>>,
    pub b: Vec<Rational>,
    pub fast_path: bool,
}

/// Rounds and projects, and sets up the oracle's linear system `A Δ = b`.
pub fn project_instance(p: &NpoProblem, r: &Relaxation, sol: &NumericSolution) -> Projected {
    let cfg = RoundingConfig::default();
    let rounded = round_solution(sol, &r.structures, &cfg).unwrap();
    let gram: Vec<usize> = (0..r.structures.len()).filter(|&k| r.structures[k].role.is_gram()).collect();
    assert_eq!(gram.len(), r.structures.len(), "no localizers in these instances");
    let lhs = rational_lhs(p, &rounded.lambda, &r.structures, &[]);
    let sys = build_projection_system(&r.structures, &gram);
    let projected = frobenius_project(&sys, &rounded.blocks, &lhs, |w| format!("{w:?}")).unwrap();

    let bases: Vec<&[Polynomial]> = r.structures.iter().map(|s| s.basis()).collect();
    let dims: Vec<usize> = r.structures.iter().map(|s| s.dim()).collect();
    let complex: Vec<bool> = r.sdp.blocks.iter().map(|b| b.complex).collect();
    let ps = params(&dims, &complex);
    let (a, words) = constraint_matrix(&p.rewrite, &bases, &ps);
    let resid = lhs.sub(&gram_polynomial(&p.rewrite, &bases, &rounded.blocks));
    for (w, _) in resid.terms() {
        assert!(words.binary_search(w).is_ok(), "uncovered residual word");
    }
    let b: Vec<Rational> = words
        .iter()
        .flat_map(|w| {
            let c = resid.coeff(w);
            [c.re, c.im]
        })
        .collect();
    Projected { ps, rounded: rounded.blocks, projected, a, b, fast_path: sys.fast_path }
}

/// The correction equals the weighted least-squares solution exactly,
/// satisfies the constraints, and is strictly shorter than `corrections`
/// random feasible alternatives.
pub fn check_projection(name: &str, pr: &Projected, rng: &mut ChaCha8Rng, corrections: usize) -> Result<(), String> {
    let delta: Vec<Rational> =
        flatten(&pr.projected, &pr.ps).iter().zip(flatten(&pr.rounded, &pr.ps)).map(|(x, y)| x - y).collect();
    let w: Vec<Rational> = pr.ps.iter().map(|q| q.weight()).collect();
    let oracle = min_weighted_norm(&pr.a, &pr.b, &w).ok_or_else(|| format!("{name}: inconsistent system"))?;
    if delta != oracle {
        return Err(format!("{name}: correction differs from the least-squares oracle"));
    }
    for (row, bi) in pr.a.iter().zip(&pr.b) {
        let lhs = row.iter().zip(&delta).fold(Rational::zero(), |acc, (x, y)| acc + x * y);
        if &lhs != bi {
            return Err(format!("{name}: corrected blocks violate the constraints"));
        }
    }
    let best = weighted_norm_sqr(&delta, &pr.ps);
    let null = null_space(&pr.a, pr.ps.len());
    if null.is_empty() {
        return Ok(());
    }
    let mut tried = 0;
    while tried < corrections {
        let mut k = vec![Rational::zero(); pr.ps.len()];
        for v in &null {
            let c = r(rng.gen_range(-3..=3), rng.gen_range(1..=64));
            for (kj, vj) in k.iter_mut().zip(v) {
                *kj += &c * vj;
            }
        }
        if k.iter().all(Zero::is_zero) {
            continue;
        }
        let other: Vec<Rational> = delta.iter().zip(&k).map(|(a, b)| a + b).collect();
        if weighted_norm_sqr(&other, &pr.ps) <= best {
            return Err(format!("{name}: a random feasible correction is no longer"));
        }
        tried += 1;
    }
    Ok(())
}

/// `λ̃ - f - Σ u* g u - Σ κ (m - l) - Σ ⟨G⟩`, reduced; zero for a valid
/// pre-certificate.
pub fn pre_residual(p: &NpoProblem, structures: &[GramStructure], pre: &PreCertificate) -> Polynomial {
    let mut rhs = Polynomial::constant(Scalar::real(pre.lambda.clone())).sub(&p.canonical_objective());
    for (k, c) in &pre.localizers {
        let BlockRole::Localizer { inequality } = structures[*k].role else { panic!("block {k} is not a localizer") };
        for u in multiplier_polynomials(c, structures[*k].basis()) {
            rhs = rhs.sub(&u.involute().mul(&p.inequalities[inequality]).mul(&u));
        }
    }
    for (k, kappa) in &pre.moments {
        let BlockRole::Moment { index } = structures[*k].role else { panic!("block {k} is not a moment block") };
        let m = &p.moment_inequalities[index];
        let e = m.poly.sub(&Polynomial::constant(Scalar::real(m.lower.clone())));
        rhs = rhs.sub(&e.scale_rational(kappa));
    }
    let bases: Vec<&[Polynomial]> = pre.grams.iter().map(|(k, _)| structures[*k].basis()).collect();
    let grams: Vec<HermitianMatrix> = pre.grams.iter().map(|(_, g)| g.clone()).collect();
    p.rewrite.reduce(&rhs.sub(&gram_polynomial(&p.rewrite, &bases, &grams)))
}

pub fn exact_cfg() -> CertifyConfig {
    CertifyConfig { margin: Rational::zero(), ..CertifyConfig::default() }
}

pub fn four_unipotents(f: &str) -> NpoProblem {
    let vars = VariableSet::from_labels([("X0", Some(0)), ("X1", Some(0)), ("Y0", Some(1)), ("Y1", Some(1))]).unwrap();
    let obj = parse_polynomial(f, &vars).unwrap();
    let rs = RewriteSystem::new(vars, vec![RuleFamily::Unipotent(vec![0, 1, 2, 3]), RuleFamily::CommutingPartition]).unwrap();
    NpoProblem::new("toy", rs, &obj, Sense::Maximize).unwrap()
}

/// Two commuting pairs of unipotents with disjoint supports, relaxed at
/// order 2 densely (one 13-dim block) and sparsely (two 5-dim blocks).
pub fn dense_and_sparse() -> (NpoProblem, Relaxation, Relaxation) {
    let t = four_unipotents("X0*X1 + X1*X0 + X0 + Y0*Y1 + Y1*Y0 - Y1");
    let dense = relax(&t, &RelaxOptions::dense(2)).unwrap();
    let sparse = relax(&t, &RelaxOptions::sparse(2)).unwrap();
    (t, dense, sparse)
}

/// A pre-certificate with known block minima: `G_k = G0_k + μ_k I` with
/// `G0_k` singular PSD, `λ̃ = Σ μ_k s_k`, and the objective chosen so that
/// `λ̃ - f = Σ_k ⟨G_k⟩` holds exactly.
pub struct Constructed {
    pub p: NpoProblem,
    pub pre: PreCertificate,
    pub bounds: Vec<SpectralBound>,
}

pub fn construct(template: &NpoProblem, structures: &[GramStructure], g0: &[HermitianMatrix], mu: &[Rational]) -> Constructed {
    let bases: Vec<&[Polynomial]> = structures.iter().map(|s| s.basis()).collect();
    let lambda = structures.iter().zip(mu).fold(Rational::zero(), |acc, (s, m)| acc + m * int(s.dim() as i64));
    let grams: Vec<HermitianMatrix> = g0.iter().zip(mu).map(|(g, m)| g.shift_diagonal(m)).collect();
    let lhs = gram_polynomial(&template.rewrite, &bases, &grams);
    let f = template.rewrite.reduce(&Polynomial::constant(Scalar::real(lambda.clone())).sub(&lhs));
    let p = NpoProblem::new("constructed", template.rewrite.clone(), &f, Sense::Maximize).unwrap();
    let bounds = mu.iter().map(|m| SpectralBound { mu_low: m.clone(), gap: Rational::zero(), psd: !m.is_negative() }).collect();
    let grams = grams.into_iter().enumerate().collect();
    Constructed { p, pre: PreCertificate { lambda, grams, localizers: vec![], moments: vec![], lhs }, bounds }
}

pub fn singular_psd(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    let rank = rng.gen_range(1..n);
    let vs: Vec<Vec<i64>> = (0..rank).map(|_| (0..n).map(|_| rng.gen_range(-3..=3)).collect()).collect();
    outer_sum(&vs, n)
}

pub fn random_mu(rng: &mut ChaCha8Rng, allow_positive: bool) -> Rational {
    let num = if allow_positive { rng.gen_range(-50..=50) } else { rng.gen_range(-50..=-1) };
    r(num, rng.gen_range(1..=1000))
}

pub fn rejected(p: &NpoProblem, c: &Certificate) -> bool {
    verify(p, c).map(|r| !r.valid()).unwrap_or(true)
}

/// One random single-entry change: a Gram diagonal or off-diagonal entry,
/// the bound, a basis scale, or a witness weight. `None` when the drawn
/// kind does not apply to this certificate.
pub fn mutate(c: &Certificate, rng: &mut ChaCha8Rng) -> Option<Certificate> {
    let mut c = c.clone();
    let tiny = r(if rng.gen() { 1 } else { -1 }, 1 << rng.gen_range(1..60));
    match rng.gen_range(0..5) {
        0 => {
            let b = rng.gen_range(0..c.blocks.len());
            let i = rng.gen_range(0..c.blocks[b].gram.dim());
            c.blocks[b].gram.get_mut(i, i).re += &tiny;
        }
        1 => {
            let b = rng.gen_range(0..c.blocks.len());
            let dim = c.blocks[b].gram.dim();
            let (i, j) = (rng.gen_range(0..dim), rng.gen_range(0..dim));
            if i == j {
                return None;
            }
            let v = c.blocks[b].gram.get(i, j) + &Scalar::real(tiny);
            c.blocks[b].gram.set_hermitian(i, j, v);
        }
        2 => c.bound -= &tiny,
        3 => {
            let b = rng.gen_range(0..c.blocks.len());
            let i = rng.gen_range(0..c.blocks[b].basis.len());
            c.blocks[b].basis[i] = c.blocks[b].basis[i].scale_rational(&(int(1) + &tiny));
        }
        _ => {
            let w = c.witnesses.first_mut()?;
            let t = w.terms.iter_mut().find(|t| !matches!(t.factor, WitnessFactor::Ideal(_)))?;
            t.weight += &tiny;
        }
    }
    Some(c)
}
