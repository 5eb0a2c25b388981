//! Dense primal-dual interior-point solver for the assembled SDPs, solution
//! import, and the floating-point certificate error `D_d`.
//!
//! The Gram side is the primal: minimize `⟨C, X⟩` subject to `A(X) = b`,
//! `X ⪰ 0`, with `λ = ⟨C, X⟩ + f₁` eliminated through the constant-word
//! constraint. Hermitian blocks of size `N` become real symmetric blocks of
//! size `2N` via `[[A, -B], [B, A]]`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, pow, sqrt};
use num_traits::Zero;

use crate::linalg::{cholesky, cholesky_solve, matmul, sym_eigen, transpose};
use crate::ncalgebra::Word;
use crate::relaxation::{GramStructure, NpoProblem, SdpData};
use crate::scalar::{to_f64, Rational};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("block count or dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("constraint on {0} has no entries but a non-zero right-hand side")]
    Infeasible(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub eps_feas: f64,
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Multiplier on the automatic starting point `ξ·I`.
    pub init_scale: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { eps_feas: 1e-9, gap_tol: 1e-9, max_iter: 200, init_scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    FeasibleOnly,
    Failed,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleOnly => "feasible_only",
            SolveStatus::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "optimal" => Some(SolveStatus::Optimal),
            "feasible_only" => Some(SolveStatus::FeasibleOnly),
            "failed" => Some(SolveStatus::Failed),
            _ => None,
        }
    }
}

/// A floating Gram block. Complex blocks hold the `2N×2N` real embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatBlock {
    pub dim: usize,
    pub complex: bool,
    pub data: Vec<f64>,
}

impl FloatBlock {
    pub fn real_dim(&self) -> usize {
        if self.complex {
            2 * self.dim
        } else {
            self.dim
        }
    }

    /// Hermitian entry `(r, c)` as `(re, im)`.
    pub fn entry(&self, r: usize, c: usize) -> (f64, f64) {
        if !self.complex {
            return (self.data[r * self.dim + c], 0.0);
        }
        let m = 2 * self.dim;
        let n = self.dim;
        let x = |i: usize, j: usize| self.data[i * m + j];
        (0.5 * (x(r, c) + x(n + r, n + c)), 0.5 * (x(n + r, c) - x(r, n + c)))
    }

    /// Real and imaginary parts of the Hermitian block, row-major `N×N`.
    pub fn hermitian_parts(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim;
        let mut re = vec![0.0; n * n];
        let mut im = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                let (a, b) = self.entry(r, c);
                re[r * n + c] = a;
                im[r * n + c] = b;
            }
        }
        (re, im)
    }

    pub fn from_hermitian(re: &[f64], im: Option<&[f64]>, n: usize) -> Self {
        match im {
            None => FloatBlock { dim: n, complex: false, data: re.to_vec() },
            Some(im) => FloatBlock { dim: n, complex: true, data: crate::linalg::embed_hermitian(re, im, n) },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericSolution {
    /// `λ_d` in maximization form.
    pub bound: f64,
    pub blocks: Vec<FloatBlock>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub gap: f64,
}

impl NumericSolution {
    /// Wraps imported Gram data, symmetrizing each block.
    pub fn from_blocks(sdp: &SdpData, bound: f64, mut blocks: Vec<FloatBlock>, status: SolveStatus) -> Result<Self, SolveError> {
        if blocks.len() != sdp.blocks.len() {
            return Err(SolveError::DimensionMismatch(format!("{} blocks, expected {}", blocks.len(), sdp.blocks.len())));
        }
        for (k, (b, s)) in blocks.iter_mut().zip(&sdp.blocks).enumerate() {
            if b.dim != s.dim || b.complex != s.complex || b.data.len() != b.real_dim() * b.real_dim() {
                return Err(SolveError::DimensionMismatch(format!("block {k}")));
            }
            if b.data.iter().any(|x| !x.is_finite()) {
                return Err(SolveError::NonFinite(format!("block {k}")));
            }
            let rd = b.real_dim();
            symmetrize(&mut b.data, rd);
        }
        Ok(NumericSolution {
            bound,
            blocks,
            status,
            iterations: 0,
            primal_infeasibility: f64::NAN,
            dual_infeasibility: f64::NAN,
            gap: f64::NAN,
        })
    }
}

fn symmetrize(a: &mut [f64], n: usize) {
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    }
}

/// Sparse linear functional `Σ v·X[blk][i][j]` over canonical entries `i <= j`.
type Functional = Vec<(usize, usize, usize, f64)>;

struct RealSdp {
    dims: Vec<usize>,
    rows: Vec<Functional>,
    b: Vec<f64>,
    c: Functional,
    offset: f64,
}

fn push_entry(acc: &mut BTreeMap<(usize, usize, usize), Rational>, blk: usize, i: usize, j: usize, v: Rational) {
    if v.is_zero() {
        return;
    }
    let key = if i <= j { (blk, i, j) } else { (blk, j, i) };
    let e = acc.entry(key).or_insert_with(Rational::zero);
    *e += v;
}

fn to_functional(acc: BTreeMap<(usize, usize, usize), Rational>) -> Functional {
    acc.into_iter().filter(|(_, v)| !v.is_zero()).map(|((b, i, j), v)| (b, i, j, to_f64(&v))).collect()
}

fn build_real(sdp: &SdpData) -> Result<RealSdp, SolveError> {
    let half = Rational::new(1.into(), 2.into());
    let dims: Vec<usize> = sdp.blocks.iter().map(|b| if b.complex { 2 * b.dim } else { b.dim }).collect();
    let mut rows = Vec::new();
    let mut b = Vec::new();
    let mut c = Vec::new();
    let mut offset = 0.0;
    for con in &sdp.constraints {
        let mut re_acc = BTreeMap::new();
        let mut im_acc = BTreeMap::new();
        for e in &con.entries {
            let blk = &sdp.blocks[e.block];
            let (nr, ni) = (&e.coeff.re, &e.coeff.im);
            if !blk.complex {
                push_entry(&mut re_acc, e.block, e.row, e.col, nr.clone());
                push_entry(&mut im_acc, e.block, e.row, e.col, ni.clone());
                continue;
            }
            let n = blk.dim;
            let (r, cc) = (e.row, e.col);
            // a = (X[r][c] + X[n+r][n+c])/2, b = (X[n+r][c] - X[r][n+c])/2
            let a_terms = [((r, cc), half.clone()), ((n + r, n + cc), half.clone())];
            let b_terms = [((n + r, cc), half.clone()), ((r, n + cc), -half.clone())];
            for ((i, j), w) in &a_terms {
                push_entry(&mut re_acc, e.block, *i, *j, nr * w);
                push_entry(&mut im_acc, e.block, *i, *j, ni * w);
            }
            for ((i, j), w) in &b_terms {
                push_entry(&mut re_acc, e.block, *i, *j, -(ni * w));
                push_entry(&mut im_acc, e.block, *i, *j, nr * w);
            }
        }
        let label = || format!("{:?}", con.word.letters());
        let (re_f, im_f) = (to_functional(re_acc), to_functional(im_acc));
        if con.lambda {
            // λ = Σ entries - rhs.re
            c = re_f;
            offset = -to_f64(&con.rhs.re);
        } else if !re_f.is_empty() {
            rows.push(re_f);
            b.push(to_f64(&con.rhs.re));
        } else if !con.rhs.re.is_zero() {
            return Err(SolveError::Infeasible(label()));
        }
        if !im_f.is_empty() {
            rows.push(im_f);
            b.push(to_f64(&con.rhs.im));
        } else if !con.rhs.im.is_zero() {
            return Err(SolveError::Infeasible(label()));
        }
    }
    Ok(RealSdp { dims, rows, b, c, offset })
}

type Blocks = Vec<Vec<f64>>;

fn zeros(dims: &[usize]) -> Blocks {
    dims.iter().map(|&n| vec![0.0; n * n]).collect()
}

fn eye(dims: &[usize], s: f64) -> Blocks {
    dims.iter()
        .map(|&n| {
            let mut m = vec![0.0; n * n];
            for k in 0..n {
                m[k * n + k] = s;
            }
            m
        })
        .collect()
}

fn apply(f: &Functional, x: &Blocks, dims: &[usize]) -> f64 {
    f.iter().map(|&(b, i, j, v)| v * x[b][i * dims[b] + j]).sum()
}

fn add_functional(out: &mut Blocks, f: &Functional, s: f64, dims: &[usize]) {
    for &(b, i, j, v) in f {
        let n = dims[b];
        if i == j {
            out[b][i * n + i] += s * v;
        } else {
            out[b][i * n + j] += 0.5 * s * v;
            out[b][j * n + i] += 0.5 * s * v;
        }
    }
}

fn functional_norm_sqr(f: &Functional) -> f64 {
    f.iter().map(|&(_, i, j, v)| if i == j { v * v } else { 0.5 * v * v }).sum()
}

fn inner(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>()).sum()
}

fn frob(a: &Blocks) -> f64 {
    sqrt(inner(a, a))
}

fn axpy(y: &mut Blocks, a: f64, x: &Blocks) {
    for (yb, xb) in y.iter_mut().zip(x) {
        for (p, q) in yb.iter_mut().zip(xb) {
            *p += a * q;
        }
    }
}

fn lower_inverse(l: &[f64], n: usize) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                s -= l[i * n + k] * inv[k * n + col];
            }
            inv[i * n + col] = s / l[i * n + i];
        }
    }
    inv
}

/// Largest `α` with `X + α·D ⪰ 0` (infinite when `D ⪰ 0`).
fn max_step(x: &Blocks, d: &Blocks, dims: &[usize]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (k, &n) in dims.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let l = cholesky(&x[k], n)?;
        let li = lower_inverse(&l, n);
        let t = matmul(&matmul(&li, &d[k], n), &transpose(&li, n), n);
        let (ev, _) = sym_eigen(&t, n);
        if ev[0] < 0.0 {
            alpha = alpha.min(-1.0 / ev[0]);
        }
    }
    Some(alpha)
}

struct NtScaling {
    g: Vec<f64>,
    ginv: Vec<f64>,
    w: Vec<f64>,
    v: Vec<f64>,
}

fn nt_scaling(x: &[f64], z: &[f64], n: usize) -> Option<NtScaling> {
    let lx = cholesky(x, n)?;
    let lz = cholesky(z, n)?;
    let bmat = matmul(&transpose(&lz, n), &lx, n);
    let btb = matmul(&transpose(&bmat, n), &bmat, n);
    let (ev, q) = sym_eigen(&btb, n);
    if ev.iter().any(|&e| !(e > 0.0)) {
        return None;
    }
    let s: Vec<f64> = ev.iter().map(|&e| sqrt(e)).collect();
    let mut g = matmul(&lx, &q, n);
    for r in 0..n {
        for c in 0..n {
            g[r * n + c] /= sqrt(s[c]);
        }
    }
    let lxi = lower_inverse(&lx, n);
    let mut ginv = matmul(&transpose(&q, n), &lxi, n);
    for r in 0..n {
        for c in 0..n {
            ginv[r * n + c] *= sqrt(s[r]);
        }
    }
    let w = matmul(&g, &transpose(&g, n), n);
    Some(NtScaling { g, ginv, w, v: s })
}

/// Schur complement `M_ab = ⟨A_a, W A_b W⟩`, accumulated over pairs of
/// canonical entries that live in the same block.
fn schur(rows: &[Functional], dims: &[usize], scal: &[NtScaling]) -> Vec<f64> {
    let m = rows.len();
    let mut mat = vec![0.0; m * m];
    let mut per_block: Vec<Vec<(usize, usize, usize, f64)>> = vec![Vec::new(); dims.len()];
    for (r, f) in rows.iter().enumerate() {
        for &(b, i, j, v) in f {
            per_block[b].push((r, i, j, v));
        }
    }
    for (b, list) in per_block.iter().enumerate() {
        let n = dims[b];
        let w = &scal[b].w;
        for (p, &(ra, i, j, va)) in list.iter().enumerate() {
            let wi = &w[i * n..(i + 1) * n];
            let wj = &w[j * n..(j + 1) * n];
            let diag = 0.5 * va * va * (wi[i] * wj[j] + wi[j] * wj[i]);
            mat[ra * m + ra] += diag;
            for &(rb, k, l, vb) in &list[p + 1..] {
                let kv = 0.5 * va * vb * (wi[k] * wj[l] + wi[l] * wj[k]);
                if ra == rb {
                    mat[ra * m + ra] += 2.0 * kv;
                } else {
                    mat[ra * m + rb] += kv;
                    mat[rb * m + ra] += kv;
                }
            }
        }
    }
    mat
}

/// Keeps a maximal linearly independent subset of the (normalized) rows.
fn independent_rows(rows: &[Functional], tol: f64) -> Vec<usize> {
    let m = rows.len();
    let mut by_key: BTreeMap<(usize, usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for (r, f) in rows.iter().enumerate() {
        for &(b, i, j, v) in f {
            by_key.entry((b, i, j)).or_default().push((r, if i == j { v } else { v / core::f64::consts::SQRT_2 }));
        }
    }
    let mut gram = vec![0.0; m * m];
    for list in by_key.values() {
        for &(a, va) in list {
            for &(b, vb) in list {
                gram[a * m + b] += va * vb;
            }
        }
    }
    // greedy pivoted Cholesky
    let mut keep = Vec::new();
    let mut l: Vec<Vec<f64>> = Vec::new();
    let mut resid: Vec<f64> = (0..m).map(|k| gram[k * m + k]).collect();
    let mut used = vec![false; m];
    loop {
        let mut best = None;
        for k in 0..m {
            if !used[k] && best.is_none_or(|b: usize| resid[k] > resid[b] + 1e-15) {
                best = Some(k);
            }
        }
        let Some(p) = best else { break };
        if resid[p] <= tol {
            break;
        }
        used[p] = true;
        let piv = sqrt(resid[p]);
        let mut col = vec![0.0; m];
        for k in 0..m {
            if used[k] && k != p {
                continue;
            }
            let mut s = gram[k * m + p];
            for lc in &l {
                s -= lc[k] * lc[p];
            }
            col[k] = s / piv;
        }
        for k in 0..m {
            if !used[k] {
                resid[k] -= col[k] * col[k];
            }
        }
        l.push(col);
        keep.push(p);
    }
    keep.sort_unstable();
    keep
}

/// Runs the interior-point method. Never fails on well-formed data: numerical
/// trouble is reported through [`SolveStatus`] with the last iterate.
pub fn solve(sdp: &SdpData, cfg: &SolverConfig) -> Result<NumericSolution, SolveError> {
    let real = build_real(sdp)?;
    let dims = real.dims.clone();
    let ntot: usize = dims.iter().sum();
    // normalize rows and drop dependent ones
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for (f, &bv) in real.rows.iter().zip(&real.b) {
        let nrm = sqrt(functional_norm_sqr(f));
        if nrm == 0.0 {
            continue;
        }
        rows.push(f.iter().map(|&(bk, i, j, v)| (bk, i, j, v / nrm)).collect::<Functional>());
        b.push(bv / nrm);
    }
    let keep = independent_rows(&rows, 1e-10);
    let rows: Vec<Functional> = keep.iter().map(|&k| rows[k].clone()).collect();
    let b: Vec<f64> = keep.iter().map(|&k| b[k]).collect();
    let m = rows.len();
    let mut cmat = zeros(&dims);
    add_functional(&mut cmat, &real.c, 1.0, &dims);

    let n_f = ntot.max(1) as f64;
    let bmax = b.iter().fold(0.0f64, |a, &x| a.max(fabs(x)));
    let cnorm = frob(&cmat);
    let xi = cfg.init_scale * (10.0f64).max(sqrt(n_f)).max(n_f * (1.0 + bmax) / 2.0);
    let eta = cfg.init_scale * (10.0f64).max(sqrt(n_f)).max(1.0 + cnorm);
    let mut x = eye(&dims, xi);
    let mut z = eye(&dims, eta);
    let mut y = vec![0.0; m];

    let bnorm = sqrt(b.iter().map(|v| v * v).sum::<f64>());
    let mut status = SolveStatus::FeasibleOnly;
    let mut iterations = 0;
    let (mut pinf, mut dinf, mut relgap) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut stalled = 0;
    let mut best: Option<(f64, Blocks)> = None;

    for it in 0..cfg.max_iter {
        iterations = it;
        let ax: Vec<f64> = rows.iter().map(|f| apply(f, &x, &dims)).collect();
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let mut rd = cmat.clone();
        axpy(&mut rd, -1.0, &z);
        for (f, &yv) in rows.iter().zip(&y) {
            add_functional(&mut rd, f, -yv, &dims);
        }
        let mu = inner(&x, &z) / n_f;
        let pobj = inner(&cmat, &x);
        let dobj: f64 = b.iter().zip(&y).map(|(p, q)| p * q).sum();
        pinf = sqrt(rp.iter().map(|v| v * v).sum::<f64>()) / (1.0 + bnorm);
        dinf = frob(&rd) / (1.0 + cnorm);
        relgap = fabs(pobj - dobj) / (1.0 + fabs(pobj) + fabs(dobj));
        if !(pinf.is_finite() && dinf.is_finite() && relgap.is_finite()) {
            status = SolveStatus::Failed;
            break;
        }
        let merit = pinf.max(dinf).max(relgap);
        if best.as_ref().is_none_or(|(bm, _)| merit < *bm) {
            best = Some((merit, x.clone()));
        }
        if pinf <= cfg.eps_feas && dinf <= cfg.eps_feas && relgap <= cfg.gap_tol {
            status = SolveStatus::Optimal;
            break;
        }
        let mut scal = Vec::with_capacity(dims.len());
        let mut ok = true;
        for (k, &n) in dims.iter().enumerate() {
            match nt_scaling(&x[k], &z[k], n) {
                Some(s) => scal.push(s),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let mut mmat = schur(&rows, &dims, &scal);
        let maxdiag = (0..m).fold(0.0f64, |a, k| a.max(mmat[k * m + k]));
        let mut lm = cholesky(&mmat, m);
        let mut reg = 1e-14 * maxdiag.max(1e-300);
        while lm.is_none() && reg < 1e-2 * maxdiag.max(1.0) {
            for k in 0..m {
                mmat[k * m + k] += reg;
            }
            lm = cholesky(&mmat, m);
            reg *= 100.0;
        }
        let Some(lm) = lm else { break };

        // solve the Newton system for a given complementarity target Rc
        let direction = |rc: &Blocks| -> (Blocks, Vec<f64>, Blocks) {
            // rhs = rp - A(Rc - W Rd W)
            let mut t = rc.clone();
            for (k, &n) in dims.iter().enumerate() {
                let w = &scal[k].w;
                let wrw = matmul(&matmul(w, &rd[k], n), w, n);
                for (p, q) in t[k].iter_mut().zip(&wrw) {
                    *p -= q;
                }
            }
            let mut dy: Vec<f64> = rows.iter().zip(&rp).map(|(f, r)| r - apply(f, &t, &dims)).collect();
            cholesky_solve(&lm, m, &mut dy);
            let mut dz = rd.clone();
            for (f, &v) in rows.iter().zip(&dy) {
                add_functional(&mut dz, f, -v, &dims);
            }
            let mut dx = rc.clone();
            for (k, &n) in dims.iter().enumerate() {
                let w = &scal[k].w;
                let wzw = matmul(&matmul(w, &dz[k], n), w, n);
                for (p, q) in dx[k].iter_mut().zip(&wzw) {
                    *p -= q;
                }
                symmetrize(&mut dx[k], n);
            }
            (dx, dy, dz)
        };

        // predictor
        let rc_aff: Blocks = x.iter().map(|xb| xb.iter().map(|v| -v).collect()).collect();
        let (dx_a, _dy_a, dz_a) = direction(&rc_aff);
        let ap = max_step(&x, &dx_a, &dims).unwrap_or(0.0).min(1.0);
        let ad = max_step(&z, &dz_a, &dims).unwrap_or(0.0).min(1.0);
        let mut xa = x.clone();
        axpy(&mut xa, ap, &dx_a);
        let mut za = z.clone();
        axpy(&mut za, ad, &dz_a);
        let mu_aff = inner(&xa, &za) / n_f;
        let sigma = if mu > 0.0 { pow((mu_aff / mu).clamp(0.0, 1.0), 3.0) } else { 0.0 };

        // corrector target in scaled space: Y_ij = 2 R_ij / (v_i + v_j)
        let mut rc = Vec::with_capacity(dims.len());
        for (k, &n) in dims.iter().enumerate() {
            let s = &scal[k];
            let dxh = matmul(&matmul(&s.ginv, &dx_a[k], n), &transpose(&s.ginv, n), n);
            let dzh = matmul(&matmul(&transpose(&s.g, n), &dz_a[k], n), &s.g, n);
            let prod = matmul(&dxh, &dzh, n);
            let mut yv = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    let mut r = -0.5 * (prod[i * n + j] + prod[j * n + i]);
                    if i == j {
                        r += sigma * mu - s.v[i] * s.v[i];
                    }
                    yv[i * n + j] = 2.0 * r / (s.v[i] + s.v[j]);
                }
            }
            rc.push(matmul(&matmul(&s.g, &yv, n), &transpose(&s.g, n), n));
        }
        let (dx, dy, dz) = direction(&rc);
        let tau = if ap.min(ad) > 0.5 { 0.98 } else { 0.95 };
        let sp = (tau * max_step(&x, &dx, &dims).unwrap_or(0.0)).min(1.0);
        let sd = (tau * max_step(&z, &dz, &dims).unwrap_or(0.0)).min(1.0);
        if !(sp > 0.0 && sd > 0.0) {
            break;
        }
        axpy(&mut x, sp, &dx);
        axpy(&mut z, sd, &dz);
        for (p, q) in y.iter_mut().zip(&dy) {
            *p += sd * q;
        }
        for (k, &n) in dims.iter().enumerate() {
            symmetrize(&mut x[k], n);
            symmetrize(&mut z[k], n);
        }
        if sp < 1e-8 && sd < 1e-8 {
            stalled += 1;
            if stalled >= 3 {
                break;
            }
        } else {
            stalled = 0;
        }
        iterations = it + 1;
    }
    if status != SolveStatus::Optimal {
        if let Some((_, bx)) = best {
            x = bx;
        }
        let loose = 1e-6;
        status = if pinf.is_finite() && pinf <= loose && dinf <= loose { SolveStatus::FeasibleOnly } else { SolveStatus::Failed };
    }
    let bound = inner(&cmat, &x) + real.offset;
    let blocks = sdp
        .blocks
        .iter()
        .zip(x)
        .map(|(blk, data)| FloatBlock { dim: blk.dim, complex: blk.complex, data })
        .collect();
    Ok(NumericSolution {
        bound,
        blocks,
        status,
        iterations,
        primal_infeasibility: pinf,
        dual_infeasibility: dinf,
        gap: relgap,
    })
}

/// `D_d = Σ_t |[t = 1]λ_d - f_t - Σ n^t G|` over every reduced word, in floating point.
pub fn certificate_error(p: &NpoProblem, structures: &[GramStructure], sol: &NumericSolution) -> f64 {
    let mut acc: BTreeMap<Word, (f64, f64)> = BTreeMap::new();
    for (w, c) in p.canonical_objective().terms() {
        let (a, b) = c.to_f64_pair();
        let e = acc.entry(w.clone()).or_insert((0.0, 0.0));
        e.0 -= a;
        e.1 -= b;
    }
    acc.entry(Word::one()).or_insert((0.0, 0.0)).0 += sol.bound;
    for (s, blk) in structures.iter().zip(&sol.blocks) {
        for r in 0..s.dim() {
            for c in 0..s.dim() {
                let (gr, gi) = blk.entry(r, c);
                for (w, n) in s.entry(r, c).terms() {
                    let (nr, ni) = n.to_f64_pair();
                    let e = acc.entry(w.clone()).or_insert((0.0, 0.0));
                    e.0 -= nr * gr - ni * gi;
                    e.1 -= nr * gi + ni * gr;
                }
            }
        }
    }
    acc.values().map(|&(a, b)| sqrt(a * a + b * b)).sum()
}
