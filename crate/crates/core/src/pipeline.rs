//! Glue between the stages: relaxation assembly (dense, clique-sparse or in
//! symmetry-adapted bases) and the rationalize → certify chain.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::Zero;

use crate::certify::{certify, min_eig_lower_bound, CertifiedBound, CertifyConfig, SpectralBound};
use crate::matrix::HermitianMatrix;
use crate::ncalgebra::{quotient_basis, Polynomial, VarId, Word};
use crate::rationalize::{precertify, PreCertificate, RoundingConfig};
use crate::relaxation::{
    assemble_sdp, build_gram_structure, build_gram_structure_on, build_localizing_structure, build_moment_structure,
    build_polynomial_gram_structure, min_relaxation_order, ChordalStrategy, CliqueDecomposition, GramStructure,
    NpoProblem, RelaxError, SdpData,
};
use crate::scalar::Scalar;
use crate::sdpsolve::NumericSolution;
use crate::verifier::Certificate;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelaxOptions {
    pub order: usize,
    pub sparse: bool,
    pub chordal: ChordalStrategy,
}

impl RelaxOptions {
    pub fn dense(order: usize) -> Self {
        RelaxOptions { order, sparse: false, chordal: ChordalStrategy::MinFill }
    }

    pub fn sparse(order: usize) -> Self {
        RelaxOptions { order, sparse: true, chordal: ChordalStrategy::MinFill }
    }
}

#[derive(Debug, Clone)]
pub struct Relaxation {
    pub structures: Vec<GramStructure>,
    pub sdp: SdpData,
    pub cliques: Option<CliqueDecomposition>,
}

pub fn strategy_name(s: ChordalStrategy) -> &'static str {
    match s {
        ChordalStrategy::MinFill => "minfill",
        ChordalStrategy::Dense => "dense",
    }
}

fn check_order(p: &NpoProblem, d: usize) -> Result<(), RelaxError> {
    let needed = min_relaxation_order(p).max(1);
    if d < needed {
        return Err(RelaxError::OrderTooLow { order: d, needed });
    }
    Ok(())
}

/// Localizer and moment blocks; `vars_of(i)` restricts localizer `i`.
fn constraint_structures(
    p: &NpoProblem,
    d: usize,
    ineq_vars: impl Fn(usize) -> Option<Vec<VarId>>,
) -> Result<Vec<GramStructure>, RelaxError> {
    let mut out = Vec::new();
    for i in 0..p.inequalities.len() {
        let vs = ineq_vars(i);
        out.push(build_localizing_structure(p, i, d, vs.as_deref())?);
    }
    for i in 0..p.moment_inequalities.len() {
        out.push(build_moment_structure(p, i)?);
    }
    Ok(out)
}

/// Builds the order-`d` relaxation; sparse mode uses one Gram block per
/// maximal clique of the chordal extension of the correlation graph.
pub fn relax(p: &NpoProblem, opts: &RelaxOptions) -> Result<Relaxation, RelaxError> {
    let d = opts.order;
    check_order(p, d)?;
    let mut structures;
    let mut cliques = None;
    if opts.sparse {
        let cd = CliqueDecomposition::new(p, opts.chordal)?;
        structures = cd
            .cliques
            .iter()
            .enumerate()
            .map(|(k, c)| build_gram_structure_on(p, c, d, format!("clique[{k}]"), k))
            .collect::<Vec<_>>();
        structures.extend(constraint_structures(p, d, |i| Some(cd.cliques[cd.inequality_clique[i]].clone()))?);
        cliques = Some(cd);
    } else {
        structures = Vec::from([build_gram_structure(p, d)?]);
        structures.extend(constraint_structures(p, d, |_| None)?);
    }
    let mut sdp = assemble_sdp(&structures, p, d)?;
    sdp.metadata.insert(String::from("mode"), String::from(if opts.sparse { "sparse" } else { "dense" }));
    if let Some(cd) = &cliques {
        sdp.metadata.insert(String::from("chordal"), String::from(strategy_name(cd.strategy)));
        let list: Vec<String> = cd
            .cliques
            .iter()
            .map(|c| c.iter().map(|&v| p.vars().label(v)).collect::<Vec<_>>().join(" "))
            .collect();
        sdp.metadata.insert(String::from("cliques"), list.join(" | "));
    }
    Ok(Relaxation { structures, sdp, cliques })
}

/// Relaxation over explicit polynomial bases: `sectors[g]` lists the blocks
/// of sector `g`, which together must span that sector's words.
pub fn relax_with_bases(p: &NpoProblem, order: usize, sectors: &[Vec<Vec<Polynomial>>]) -> Result<Relaxation, RelaxError> {
    check_order(p, order)?;
    let mut structures = Vec::new();
    for (g, blocks) in sectors.iter().enumerate() {
        for (k, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                continue;
            }
            structures.push(build_polynomial_gram_structure(&p.rewrite, b.clone(), format!("sector[{g}].block[{k}]"), g));
        }
    }
    structures.extend(constraint_structures(p, order, |_| None)?);
    let mut sdp = assemble_sdp(&structures, p, order)?;
    sdp.metadata.insert(String::from("mode"), String::from("symmetry-adapted"));
    sdp.metadata.insert(String::from("sectors"), sectors.len().to_string());
    Ok(Relaxation { structures, sdp, cliques: None })
}

/// Splits the order-`d` basis into the `+1` and `-1` eigenspaces of the
/// involutive variable map `sigma` (`sigma[x]` is the image of `x`): orbits
/// `{w, σ(w)}` give `w + σ(w)` and `w - σ(w)`, fixed words stay in the `+1`
/// block.
pub fn involution_blocks(p: &NpoProblem, d: usize, sigma: &[VarId]) -> Result<[Vec<Polynomial>; 2], RelaxError> {
    let n = p.vars().len();
    if sigma.len() != n || (0..n).any(|x| sigma.get(sigma[x] as usize) != Some(&(x as VarId))) {
        return Err(RelaxError::Invalid(String::from("variable map is not an involution")));
    }
    let all: Vec<VarId> = p.vars().ids().collect();
    let words = quotient_basis(&p.rewrite, &all, d).into_words();
    let set: BTreeSet<&Word> = words.iter().collect();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for w in &words {
        let mapped: Vec<VarId> = w.letters().iter().map(|&x| sigma[x as usize]).collect();
        let (c, image) = p.rewrite.reduce_letters(&mapped);
        if c != Scalar::from_int(1) || !set.contains(&image) {
            return Err(RelaxError::Invalid(format!("word {} has no monomial image", w.display(p.vars()))));
        }
        match image.cmp(w) {
            core::cmp::Ordering::Equal => plus.push(Polynomial::word(w.clone())),
            core::cmp::Ordering::Greater => {
                plus.push(Polynomial::word(w.clone()).add(&Polynomial::word(image.clone())));
                minus.push(Polynomial::word(w.clone()).sub(&Polynomial::word(image)));
            }
            core::cmp::Ordering::Less => {}
        }
    }
    Ok([plus, minus])
}

/// The ambient Gram matrix over `words` represented by polynomial-basis
/// blocks: `G[α][β] = Σ_ij conj(b_iα) G_ij b_jβ`.
pub fn inflate(blocks: &[(&[Polynomial], &HermitianMatrix)], words: &[Word]) -> HermitianMatrix {
    let pos: BTreeMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let n = words.len();
    let mut out = HermitianMatrix::zeros(n);
    for (basis, g) in blocks {
        for (i, bi) in basis.iter().enumerate() {
            for (j, bj) in basis.iter().enumerate() {
                let gij = g.get(i, j);
                if gij.is_zero() {
                    continue;
                }
                for (a, ca) in bi.terms() {
                    for (b, cb) in bj.terms() {
                        if let (Some(&r), Some(&c)) = (pos.get(a), pos.get(b)) {
                            let v = &(&ca.conj() * gij) * cb;
                            *out.get_mut(r, c) += v;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Certified spectral bounds for every Gram block of `pre`, in order.
pub fn spectral_bounds(pre: &PreCertificate, cfg: &CertifyConfig) -> Result<Vec<SpectralBound>, Error> {
    pre.grams.iter().map(|(_, g)| min_eig_lower_bound(g, &cfg.gap).map_err(Error::from)).collect()
}

#[derive(Debug, Clone)]
pub struct Certified {
    pub pre: PreCertificate,
    pub bound: CertifiedBound,
    pub certificate: Certificate,
}

/// Rationalize, bound the spectra, and certify.
pub fn certify_solution(
    p: &NpoProblem,
    structures: &[GramStructure],
    sol: &NumericSolution,
    order: usize,
    rcfg: &RoundingConfig,
    ccfg: &CertifyConfig,
) -> Result<Certified, Error> {
    let pre = precertify(p, structures, sol, rcfg)?;
    let bounds = spectral_bounds(&pre, ccfg)?;
    let (bound, certificate) = certify(p, structures, &pre, &bounds, order, ccfg)?;
    Ok(Certified { pre, bound, certificate })
}
