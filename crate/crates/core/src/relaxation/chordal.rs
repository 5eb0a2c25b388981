use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::{NpoProblem, RelaxError};
use crate::ncalgebra::{RuleFamily, VarId};

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { adj: vec![BTreeSet::new(); n] }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in (u + 1)..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    pub fn neighbors(&self, u: usize) -> &BTreeSet<usize> {
        &self.adj[u]
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, nb) in self.adj.iter().enumerate() {
            for &v in nb.range(u + 1..) {
                out.push((u, v));
            }
        }
        out
    }

    fn add_clique(&mut self, vs: &BTreeSet<VarId>) {
        let vs: Vec<usize> = vs.iter().map(|&x| x as usize).collect();
        for (k, &u) in vs.iter().enumerate() {
            for &v in &vs[k + 1..] {
                self.add_edge(u, v);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChordalStrategy {
    /// Greedy minimum fill-in elimination; ties go to the highest vertex id.
    MinFill,
    /// Complete graph: one clique, the dense hierarchy.
    Dense,
}

/// Variables co-occurring in a monomial of the objective, in a constraint,
/// in a Pauli site, or in a user rule are joined by an edge.
pub fn correlation_graph(p: &NpoProblem) -> Graph {
    let mut g = Graph::new(p.vars().len());
    for (w, _) in p.objective.terms() {
        g.add_clique(&w.letters().iter().copied().collect());
    }
    for q in &p.inequalities {
        g.add_clique(&q.variables());
    }
    for m in &p.moment_inequalities {
        g.add_clique(&m.poly.variables());
    }
    for fam in p.rewrite.families() {
        match fam {
            RuleFamily::PauliSite { x, y, z } => g.add_clique(&[*x, *y, *z].into_iter().collect()),
            RuleFamily::Binomial { lhs, rhs, .. } => {
                g.add_clique(&lhs.letters().iter().chain(rhs.letters()).copied().collect())
            }
            _ => {}
        }
    }
    g
}

/// Chordal supergraph of `g`.
pub fn chordal_extension(g: &Graph, strategy: ChordalStrategy) -> Graph {
    match strategy {
        ChordalStrategy::Dense => Graph::complete(g.n()),
        ChordalStrategy::MinFill => {
            let mut out = g.clone();
            let mut work = g.clone();
            let mut alive = vec![true; g.n()];
            for _ in 0..g.n() {
                let mut best: Option<(usize, usize)> = None;
                for v in (0..g.n()).filter(|&v| alive[v]) {
                    let nb: Vec<usize> = work.neighbors(v).iter().copied().filter(|&u| alive[u]).collect();
                    let mut fill = 0;
                    for (k, &a) in nb.iter().enumerate() {
                        for &b in &nb[k + 1..] {
                            if !work.has_edge(a, b) {
                                fill += 1;
                            }
                        }
                    }
                    if best.is_none_or(|(bf, _)| fill <= bf) {
                        best = Some((fill, v));
                    }
                }
                let Some((_, v)) = best else { break };
                let nb: Vec<usize> = work.neighbors(v).iter().copied().filter(|&u| alive[u]).collect();
                for (k, &a) in nb.iter().enumerate() {
                    for &b in &nb[k + 1..] {
                        work.add_edge(a, b);
                        out.add_edge(a, b);
                    }
                }
                alive[v] = false;
            }
            out
        }
    }
}

/// Maximum cardinality search order (first visited first).
fn mcs_order(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut weight = vec![0usize; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n).filter(|&v| !seen[v]).max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a))).unwrap();
        seen[v] = true;
        order.push(v);
        for &u in g.neighbors(v) {
            if !seen[u] {
                weight[u] += 1;
            }
        }
    }
    order
}

/// For each vertex, its neighbours visited earlier by MCS; a graph is
/// chordal iff each of these sets is a clique.
fn earlier_neighbors(g: &Graph, order: &[usize]) -> Vec<Vec<usize>> {
    let mut pos = vec![0usize; g.n()];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    order
        .iter()
        .map(|&v| g.neighbors(v).iter().copied().filter(|&u| pos[u] < pos[v]).collect())
        .collect()
}

pub fn is_chordal(g: &Graph) -> bool {
    let order = mcs_order(g);
    earlier_neighbors(g, &order).iter().all(|nb| {
        nb.iter().enumerate().all(|(k, &a)| nb[k + 1..].iter().all(|&b| g.has_edge(a, b)))
    })
}

/// Maximal cliques of a chordal graph, each sorted, in lexicographic order.
pub fn maximal_cliques(g: &Graph) -> Result<Vec<Vec<usize>>, RelaxError> {
    if !is_chordal(g) {
        return Err(RelaxError::NotChordal);
    }
    let order = mcs_order(g);
    let mut cands: Vec<BTreeSet<usize>> = earlier_neighbors(g, &order)
        .into_iter()
        .zip(&order)
        .map(|(nb, &v)| nb.into_iter().chain([v]).collect())
        .collect();
    cands.sort_by_key(|c| core::cmp::Reverse(c.len()));
    let mut kept: Vec<BTreeSet<usize>> = Vec::new();
    for c in cands {
        if !kept.iter().any(|k| c.is_subset(k)) {
            kept.push(c);
        }
    }
    let mut out: Vec<Vec<usize>> = kept.into_iter().map(|c| c.into_iter().collect()).collect();
    out.sort();
    Ok(out)
}

/// Cliques plus the clique each constraint is assigned to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueDecomposition {
    pub cliques: Vec<Vec<VarId>>,
    pub inequality_clique: Vec<usize>,
    pub moment_clique: Vec<usize>,
    pub extension_edges: Vec<(VarId, VarId)>,
    pub strategy: ChordalStrategy,
}

impl CliqueDecomposition {
    pub fn new(p: &NpoProblem, strategy: ChordalStrategy) -> Result<Self, RelaxError> {
        let g = correlation_graph(p);
        let ext = chordal_extension(&g, strategy);
        let added: Vec<(VarId, VarId)> = ext
            .edges()
            .into_iter()
            .filter(|&(u, v)| !g.has_edge(u, v))
            .map(|(u, v)| (u as VarId, v as VarId))
            .collect();
        let cliques: Vec<Vec<VarId>> = maximal_cliques(&ext)?
            .into_iter()
            .map(|c| c.into_iter().map(|v| v as VarId).collect())
            .collect();
        let assign = |vs: &BTreeSet<VarId>| -> Result<usize, RelaxError> {
            cliques
                .iter()
                .position(|c| vs.iter().all(|v| c.contains(v)))
                .ok_or_else(|| RelaxError::Invalid(alloc::string::String::from("constraint spans several cliques")))
        };
        let inequality_clique = p.inequalities.iter().map(|g| assign(&g.variables())).collect::<Result<_, _>>()?;
        let moment_clique = p.moment_inequalities.iter().map(|m| assign(&m.poly.variables())).collect::<Result<_, _>>()?;
        Ok(CliqueDecomposition { cliques, inequality_clique, moment_clique, extension_edges: added, strategy })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> Graph {
        // X1..X5 as 0..4: X1X5, X1X2, X2X3, X3X4, X4X1
        Graph::from_edges(5, &[(0, 4), (0, 1), (1, 2), (2, 3), (3, 0)])
    }

    #[test]
    fn min_fill_on_five_cycle_with_tail() {
        let g = fig2();
        assert!(!is_chordal(&g));
        let ext = chordal_extension(&g, ChordalStrategy::MinFill);
        assert!(is_chordal(&ext));
        assert_eq!(ext.edges().len(), g.edges().len() + 1);
        assert!(ext.has_edge(0, 2));
        assert_eq!(maximal_cliques(&ext).unwrap(), vec![vec![0, 1, 2], vec![0, 2, 3], vec![0, 4]]);
    }

    #[test]
    fn alternative_extension() {
        let mut ext = fig2();
        ext.add_edge(0, 2);
        ext.add_edge(1, 3);
        assert_eq!(maximal_cliques(&ext).unwrap(), vec![vec![0, 1, 2, 3], vec![0, 4]]);
    }

    #[test]
    fn dense_and_chordal_inputs() {
        let g = fig2();
        let d = chordal_extension(&g, ChordalStrategy::Dense);
        assert_eq!(maximal_cliques(&d).unwrap(), vec![vec![0, 1, 2, 3, 4]]);
        let tree = Graph::from_edges(4, &[(0, 1), (1, 2), (1, 3)]);
        assert_eq!(chordal_extension(&tree, ChordalStrategy::MinFill), tree);
        assert!(maximal_cliques(&fig2()).is_err());
    }
}
