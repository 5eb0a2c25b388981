//! Test-side oracles. Nothing here calls the projection or certification
//! code; the algebra is only used to reduce words.
#![allow(dead_code)]

use std::collections::BTreeMap;

use certibound_core::{HermitianMatrix, Polynomial, Rational, RewriteSystem, Scalar, Word};
use num_traits::{One, Signed, Zero};

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// One real unknown of a Hermitian block: the real part of `(row, col)`
/// (`row <= col`) or its imaginary part (`row < col`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Param {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub imag: bool,
}

impl Param {
    /// Contribution of the parameter to the squared Frobenius norm.
    pub fn weight(&self) -> Rational {
        if self.row == self.col {
            Rational::one()
        } else {
            r(2, 1)
        }
    }
}

pub fn params(dims: &[usize], complex: &[bool]) -> Vec<Param> {
    let mut out = Vec::new();
    for (block, (&n, &cx)) in dims.iter().zip(complex).enumerate() {
        for row in 0..n {
            for col in row..n {
                out.push(Param { block, row, col, imag: false });
                if cx && row < col {
                    out.push(Param { block, row, col, imag: true });
                }
            }
        }
    }
    out
}

/// Real linear map from parameters to word coefficients of
/// `Σ_k Σ_ab G_k[a][b] 𝒩(b_a* b_b)`, with every complex equation split into
/// its real and imaginary parts. Returns `(rows, words)`; row `2t` is the
/// real part of word `t`, row `2t+1` the imaginary part.
pub fn constraint_matrix(rs: &RewriteSystem, bases: &[&[Polynomial]], ps: &[Param]) -> (Vec<Vec<Rational>>, Vec<Word>) {
    let entry = |k: usize, a: usize, b: usize| rs.reduce(&bases[k][a].involute().mul(&bases[k][b]));
    let mut cols: Vec<BTreeMap<Word, Scalar>> = Vec::new();
    for p in ps {
        let mut poly = if p.row == p.col {
            entry(p.block, p.row, p.row)
        } else if !p.imag {
            entry(p.block, p.row, p.col).add(&entry(p.block, p.col, p.row))
        } else {
            let i = Scalar::i();
            entry(p.block, p.row, p.col).scale(&i).sub(&entry(p.block, p.col, p.row).scale(&i))
        };
        poly = rs.reduce(&poly);
        cols.push(poly.into_terms());
    }
    let mut words: Vec<Word> = cols.iter().flat_map(|c| c.keys().cloned()).collect();
    words.sort();
    words.dedup();
    let mut rows = vec![vec![Rational::zero(); ps.len()]; 2 * words.len()];
    for (j, col) in cols.iter().enumerate() {
        for (w, c) in col {
            let t = words.binary_search(w).unwrap();
            rows[2 * t][j] = c.re.clone();
            rows[2 * t + 1][j] = c.im.clone();
        }
    }
    (rows, words)
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut [Vec<Rational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                let pivot_row = m[row].clone();
                for (v, pv) in m[i].iter_mut().zip(&pivot_row) {
                    *v = &*v - &(&f * pv);
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    pivots
}

/// Minimizes `Σ w_j x_j²` subject to `A x = b` by solving the normal
/// equations `(A W⁻¹ Aᵀ) z = b`, `x = W⁻¹ Aᵀ z`. `None` if inconsistent.
pub fn min_weighted_norm(a: &[Vec<Rational>], b: &[Rational], w: &[Rational]) -> Option<Vec<Rational>> {
    let m = a.len();
    let n = w.len();
    let winv: Vec<Rational> = w.iter().map(|x| x.recip()).collect();
    let mut aug: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut row: Vec<Rational> = (0..m)
                .map(|k| (0..n).fold(Rational::zero(), |acc, j| acc + &a[i][j] * &winv[j] * &a[k][j]))
                .collect();
            row.push(b[i].clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug, m);
    // inconsistent if a zero row has a non-zero right-hand side
    for row in aug.iter().skip(pivots.len()) {
        if !row[m].is_zero() {
            return None;
        }
    }
    let mut z = vec![Rational::zero(); m];
    for (i, &c) in pivots.iter().enumerate() {
        z[c] = aug[i][m].clone();
    }
    Some((0..n).map(|j| (0..m).fold(Rational::zero(), |acc, i| acc + &a[i][j] * &z[i]) * &winv[j]).collect())
}

/// A basis of `{x : A x = 0}`.
pub fn null_space(a: &[Vec<Rational>], n: usize) -> Vec<Vec<Rational>> {
    let mut m = a.to_vec();
    let pivots = rref(&mut m, n);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); n];
            v[f] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -m[i][f].clone();
            }
            v
        })
        .collect()
}

/// Parameter vector of a list of Hermitian blocks.
pub fn flatten(blocks: &[HermitianMatrix], ps: &[Param]) -> Vec<Rational> {
    ps.iter()
        .map(|p| {
            let v = blocks[p.block].get(p.row, p.col);
            if p.imag {
                v.im.clone()
            } else {
                v.re.clone()
            }
        })
        .collect()
}

pub fn weighted_norm_sqr(x: &[Rational], ps: &[Param]) -> Rational {
    x.iter().zip(ps).fold(Rational::zero(), |acc, (v, p)| acc + v * v * p.weight())
}

/// `Σ_k Σ_ab G_k[a][b] 𝒩(b_a* b_b)`, expanded directly.
pub fn gram_polynomial(rs: &RewriteSystem, bases: &[&[Polynomial]], grams: &[HermitianMatrix]) -> Polynomial {
    let mut acc = Polynomial::zero();
    for (basis, g) in bases.iter().zip(grams) {
        for (a, ba) in basis.iter().enumerate() {
            for (b, bb) in basis.iter().enumerate() {
                let c = g.get(a, b);
                if !c.is_zero() {
                    for (w, v) in ba.involute().mul(bb).terms() {
                        acc.add_term(w.clone(), v * c);
                    }
                }
            }
        }
    }
    rs.reduce(&acc)
}

/// `Σ_j v_j v_jᵀ` for integer vectors: PSD with rank at most `vs.len()`.
pub fn outer_sum(vs: &[Vec<i64>], n: usize) -> HermitianMatrix {
    let mut rows = vec![vec![Rational::zero(); n]; n];
    for v in vs {
        for a in 0..n {
            for b in 0..n {
                rows[a][b] += Rational::from_integer((v[a] * v[b]).into());
            }
        }
    }
    HermitianMatrix::from_real_rows(&rows).unwrap()
}

pub fn abs_diff_le(a: &Rational, b: &Rational, tol: &Rational) -> bool {
    (a - b).abs() <= *tol
}
