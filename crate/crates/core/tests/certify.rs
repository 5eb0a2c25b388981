mod common;
mod fixtures;

use certibound_core::certify::{certify, min_eig_lower_bound, tighten_rank1, CertifyConfig};
use certibound_core::ncalgebra::parse_polynomial;
use certibound_core::pipeline::{certify_solution, relax, RelaxOptions};
use certibound_core::problems::chsh;
use certibound_core::rationalize::RoundingConfig;
use certibound_core::relaxation::{NpoProblem, Sense};
use certibound_core::scalar::{int, to_f64};
use certibound_core::sdpsolve::{solve, SolverConfig};
use certibound_core::verifier::{verify, CertPath, Certificate};
use certibound_core::{HermitianMatrix, Polynomial, Rational, RewriteSystem, RuleFamily, Scalar, VariableSet, Word};
use common::*;
use fixtures::*;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lifting_reproduces_the_closed_form(seed in any::<u64>(), sparse in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, dense, sp) = dense_and_sparse();
        let rel = if sparse { sp } else { dense };
        let g0: Vec<HermitianMatrix> = rel.structures.iter().map(|s| singular_psd(&mut rng, s.dim())).collect();
        let mu: Vec<Rational> = g0.iter().map(|_| random_mu(&mut rng, true)).collect();
        let c = construct(&t, &rel.structures, &g0, &mu);
        let (b, cert) = certify(&c.p, &rel.structures, &c.pre, &c.bounds, 2, &exact_cfg()).unwrap();
        let expect = rel.structures.iter().zip(&mu).fold(Rational::zero(), |acc, (s, m)| {
            acc + if m.is_negative() { -m * int(s.dim() as i64) } else { Rational::zero() }
        });
        prop_assert_eq!(&b.delta, &expect);
        prop_assert_eq!(&b.lambda_rat, &(&c.pre.lambda + &expect));
        prop_assert_eq!(b.path, if expect.is_zero() { CertPath::AlreadyPsd } else { CertPath::Lifted });
        prop_assert!(verify(&c.p, &cert).unwrap().valid());
    }
}

#[test]
fn sparse_loss_is_no_larger_than_dense_on_disjoint_cliques() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (t, dense, sparse) = dense_and_sparse();
    let s_sparse: usize = sparse.structures.iter().map(|s| s.dim()).sum();
    let s_dense = dense.structures[0].dim();
    assert!(s_sparse < s_dense);
    for _ in 0..10 {
        let g0: Vec<HermitianMatrix> = sparse.structures.iter().map(|s| singular_psd(&mut rng, s.dim())).collect();
        let mu = random_mu(&mut rng, false);
        let cs = construct(&t, &sparse.structures, &g0, &[mu.clone(), mu.clone()]);
        // the same quadratic form embedded in the dense basis
        let words = dense.structures[0].basis_words().unwrap();
        let mut embedded = HermitianMatrix::zeros(words.len());
        for (s, g) in sparse.structures.iter().zip(&g0) {
            let sw = s.basis_words().unwrap();
            for (a, wa) in sw.iter().enumerate() {
                for (b, wb) in sw.iter().enumerate() {
                    let (i, j) = (words.iter().position(|w| w == wa).unwrap(), words.iter().position(|w| w == wb).unwrap());
                    *embedded.get_mut(i, j) += g.get(a, b).clone();
                }
            }
        }
        let cd = construct(&t, &dense.structures, &[embedded], std::slice::from_ref(&mu));
        assert_eq!(cs.p.objective, cd.p.objective);
        let (bs, certs) = certify(&cs.p, &sparse.structures, &cs.pre, &cs.bounds, 2, &exact_cfg()).unwrap();
        let (bd, certd) = certify(&cd.p, &dense.structures, &cd.pre, &cd.bounds, 2, &exact_cfg()).unwrap();
        assert!(verify(&cs.p, &certs).unwrap().valid());
        assert!(verify(&cd.p, &certd).unwrap().valid());
        assert_eq!(bs.delta, -&mu * int(s_sparse as i64));
        assert_eq!(bd.delta, -&mu * int(s_dense as i64));
        assert!(bs.delta <= bd.delta);
    }
}

#[test]
fn both_tightening_strategies_lower_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // unipotent shift alone (rank-1 disabled)
    let (t, dense, _) = dense_and_sparse();
    let g0 = vec![singular_psd(&mut rng, dense.structures[0].dim())];
    let c = construct(&t, &dense.structures, &g0, &[r(1, 8)]);
    let cfg = CertifyConfig { tighten: true, rank1_max_dim: 0, ..exact_cfg() };
    let (b, cert) = certify(&c.p, &dense.structures, &c.pre, &c.bounds, 2, &cfg).unwrap();
    assert_eq!(b.path, CertPath::TightenedUnipotent);
    assert!(b.lambda_rat < b.lambda_tilde);
    assert_eq!(b.lambda_rat, Rational::zero());
    assert!(verify(&c.p, &cert).unwrap().valid());

    // rank-1 alone: projector variables rule out the unipotent shift
    let vars = VariableSet::from_labels([("P", None), ("Q", None)]).unwrap();
    let rs = RewriteSystem::new(vars, vec![RuleFamily::Projector(vec![0, 1])]).unwrap();
    let tp = NpoProblem::new("proj", rs, &Polynomial::zero(), Sense::Maximize).unwrap();
    let rel = relax(&tp, &RelaxOptions::dense(1)).unwrap();
    let g0 = vec![singular_psd(&mut rng, rel.structures[0].dim())];
    let c = construct(&tp, &rel.structures, &g0, &[r(1, 4)]);
    let cfg = CertifyConfig { tighten: true, ..exact_cfg() };
    let (b, cert) = certify(&c.p, &rel.structures, &c.pre, &c.bounds, 1, &cfg).unwrap();
    assert_eq!(b.path, CertPath::TightenedRank1);
    assert!(b.lambda_rat < b.lambda_tilde);
    assert!(verify(&c.p, &cert).unwrap().valid());
}

#[test]
fn rank1_tau_on_the_two_by_two_example() {
    let m = HermitianMatrix::from_real_rows(&[vec![int(2), int(1)], vec![int(1), int(2)]]).unwrap();
    let (b, tau, down) = tighten_rank1(&int(5), &m, 0).unwrap();
    assert_eq!(tau, r(3, 2));
    assert_eq!(b.lambda_rat, r(7, 2));
    assert_eq!(down.get(0, 0).re, r(1, 2));
}

#[test]
fn spectral_bound_brackets_diagonal_minima() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [1, 3, 8, 30] {
        let d: Vec<Rational> = (0..n).map(|_| r(rng.gen_range(-100..100), rng.gen_range(1..50))).collect();
        let m = HermitianMatrix::diagonal(&d);
        let min = d.iter().min().unwrap().clone();
        let gap = r(1, 1_000_000);
        let b = min_eig_lower_bound(&m, &gap).unwrap();
        assert!(b.mu_low <= min);
        assert!(&min - &b.mu_low <= gap, "n={n}");
        if n <= 24 {
            assert_eq!(b.psd, !min.is_negative());
        } else if min.is_negative() {
            assert!(!b.psd);
        }
    }
}

#[test]
fn commuting_sign_problems_are_certified_soundly() {
    // f = Σ c_i X_i with commuting unipotents: the maximum is Σ |c_i|
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..12 {
        let n = 1 + trial % 4;
        let labels: Vec<(String, Option<u32>)> = (0..n).map(|i| (format!("X{i}"), Some(i as u32))).collect();
        let vars = VariableSet::from_labels(labels.iter().map(|(l, g)| (l.as_str(), *g))).unwrap();
        let cs: Vec<Rational> = (0..n).map(|_| r(rng.gen_range(-20..=20), rng.gen_range(1..=7))).collect();
        let f = Polynomial::from_terms(cs.iter().enumerate().map(|(i, c)| (Word::letter(i as u32), Scalar::real(c.clone()))));
        let rs = RewriteSystem::new(vars, vec![RuleFamily::Unipotent((0..n as u32).collect()), RuleFamily::CommutingPartition]).unwrap();
        let p = NpoProblem::new("signs", rs, &f, Sense::Maximize).unwrap();
        let rel = relax(&p, &RelaxOptions::dense(1)).unwrap();
        let sol = solve(&rel.sdp, &SolverConfig::default()).unwrap();
        let c = certify_solution(&p, &rel.structures, &sol, 1, &RoundingConfig::default(), &CertifyConfig::default()).unwrap();
        let exact: Rational = cs.iter().map(|c| c.abs()).sum();
        assert!(c.bound.lambda_rat >= exact, "trial {trial}");
        assert!(to_f64(&(&c.bound.lambda_rat - &exact)) < 1e-6);
        assert!(verify(&p, &c.certificate).unwrap().valid());
    }
}

#[test]
fn chsh_bounds_are_monotone_in_the_order() {
    let p = chsh();
    let mut prev: Option<f64> = None;
    for d in 1..=2 {
        let rel = relax(&p, &RelaxOptions::dense(d)).unwrap();
        let sol = solve(&rel.sdp, &SolverConfig::default()).unwrap();
        let c = certify_solution(&p, &rel.structures, &sol, d, &RoundingConfig::default(), &CertifyConfig::default()).unwrap();
        let l = &c.bound.lambda_rat;
        assert!(l * l >= int(8));
        if let Some(prev) = prev {
            assert!(sol.bound <= prev + 1e-8);
        }
        prev = Some(sol.bound);
    }
}

fn certified(p: &NpoProblem, opts: RelaxOptions) -> Certificate {
    let rel = relax(p, &opts).unwrap();
    let sol = solve(&rel.sdp, &SolverConfig::default()).unwrap();
    certify_solution(p, &rel.structures, &sol, opts.order, &RoundingConfig::default(), &CertifyConfig::default())
        .unwrap()
        .certificate
}

#[test]
fn single_entry_mutations_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    let vars = VariableSet::from_labels([("P", None), ("Z", None)]).unwrap();
    let f = parse_polynomial("P + Z + P*Z + Z*P", &vars).unwrap();
    let g = parse_polynomial("1 - Z^2", &vars).unwrap();
    let rs = RewriteSystem::new(vars, vec![RuleFamily::Projector(vec![0])]).unwrap();
    let pb = NpoProblem::new("pb", rs, &f, Sense::Maximize).unwrap().with_inequality(&g).unwrap();
    let cases = [(chsh(), RelaxOptions::dense(1)), (chsh(), RelaxOptions::sparse(1)), (pb, RelaxOptions::dense(2))];
    let certs: Vec<Certificate> = cases.iter().map(|(p, o)| certified(p, *o)).collect();
    for ((p, _), c) in cases.iter().zip(&certs) {
        assert!(verify(p, c).unwrap().valid());
    }
    let mut n = 0;
    while n < 50 {
        let k = rng.gen_range(0..cases.len());
        let Some(c) = mutate(&certs[k], &mut rng) else { continue };
        assert!(rejected(&cases[k].0, &c), "mutation {n} on case {k} accepted");
        n += 1;
    }
}
