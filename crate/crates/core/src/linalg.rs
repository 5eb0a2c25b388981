//! Small dense floating-point kernels: symmetric eigendecomposition
//! (Householder tridiagonalisation + implicit QL), Cholesky factors and the
//! real embedding of Hermitian matrices.

use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, hypot, sqrt};

/// Eigen-decomposition of a symmetric matrix (row-major `n×n`).
///
/// Returns eigenvalues in ascending order and a row-major matrix whose
/// column `j` is the unit eigenvector for eigenvalue `j`.
pub fn sym_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut v = a.to_vec();
    // symmetrise defensively
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (v[i * n + j] + v[j * n + i]);
            v[i * n + j] = m;
            v[j * n + i] = m;
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e);
    (d, v)
}

fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let ix = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[ix(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += fabs(d[k]);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[ix(i - 1, j)];
                v[ix(i, j)] = 0.0;
                v[ix(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[ix(j, i)] = f;
                g = e[j] + v[ix(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[ix(k, j)] * d[k];
                    e[k] += v[ix(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[ix(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[ix(i - 1, j)];
                v[ix(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[ix(n - 1, i)] = v[ix(i, i)];
        v[ix(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[ix(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[ix(k, i + 1)] * v[ix(k, j)];
                }
                for k in 0..=i {
                    v[ix(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[ix(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[ix(n - 1, j)];
        v[ix(n - 1, j)] = 0.0;
    }
    v[ix(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let ix = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(fabs(d[l]) + fabs(e[l]));
        let mut m = l;
        while m < n - 1 {
            if fabs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[ix(k, i + 1)];
                        v[ix(k, i + 1)] = s * v[ix(k, i)] + c * h;
                        v[ix(k, i)] = c * v[ix(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if fabs(e[l]) <= eps * tst1 || iter > 100 || !e[l].is_finite() {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for r in 0..n {
                v.swap(ix(r, i), ix(r, k));
            }
        }
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut s = a[j * n + j];
        for k in 0..j {
            s -= l[j * n + k] * l[j * n + k];
        }
        if !(s > 0.0) || !s.is_finite() {
            return None;
        }
        let djj = sqrt(s);
        l[j * n + j] = djj;
        for i in (j + 1)..n {
            let mut t = a[i * n + j];
            for k in 0..j {
                t -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = t / djj;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` in place given the lower factor.
pub fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Lower Cholesky factor `A = L L*` of a Hermitian matrix given by its real
/// and imaginary parts. The diagonal of `L` is real and positive.
pub fn cholesky_hermitian(re: &[f64], im: &[f64], n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut lr = vec![0.0; n * n];
    let mut li = vec![0.0; n * n];
    for j in 0..n {
        let mut s = re[j * n + j];
        for k in 0..j {
            let (a, b) = (lr[j * n + k], li[j * n + k]);
            s -= a * a + b * b;
        }
        if !(s > 0.0) || !s.is_finite() {
            return None;
        }
        let djj = sqrt(s);
        lr[j * n + j] = djj;
        for i in (j + 1)..n {
            let mut tr = re[i * n + j];
            let mut ti = im[i * n + j];
            for k in 0..j {
                // L_ik · conj(L_jk)
                let (a, b) = (lr[i * n + k], li[i * n + k]);
                let (c, d) = (lr[j * n + k], -li[j * n + k]);
                tr -= a * c - b * d;
                ti -= a * d + b * c;
            }
            lr[i * n + j] = tr / djj;
            li[i * n + j] = ti / djj;
        }
    }
    Some((lr, li))
}

/// The real symmetric embedding `[[A, -B], [B, A]]` of `A + iB`.
pub fn embed_hermitian(re: &[f64], im: &[f64], n: usize) -> Vec<f64> {
    let m = 2 * n;
    let mut out = vec![0.0; m * m];
    for r in 0..n {
        for c in 0..n {
            let a = re[r * n + c];
            let b = im[r * n + c];
            out[r * m + c] = a;
            out[(n + r) * m + n + c] = a;
            out[(n + r) * m + c] = b;
            out[r * m + n + c] = -b;
        }
    }
    out
}

/// Smallest eigenvalue and a unit eigenvector `(re, im)` of a Hermitian matrix.
pub fn hermitian_min_eig(re: &[f64], im: &[f64], n: usize) -> (f64, Vec<f64>, Vec<f64>) {
    if n == 0 {
        return (0.0, Vec::new(), Vec::new());
    }
    if im.iter().all(|&x| x == 0.0) {
        let (vals, vecs) = sym_eigen(re, n);
        let v: Vec<f64> = (0..n).map(|k| vecs[k * n]).collect();
        return (vals[0], v, vec![0.0; n]);
    }
    let e = embed_hermitian(re, im, n);
    let m = 2 * n;
    let (vals, vecs) = sym_eigen(&e, m);
    let vr: Vec<f64> = (0..n).map(|k| vecs[k * m]).collect();
    let vi: Vec<f64> = (0..n).map(|k| vecs[(n + k) * m]).collect();
    let norm = sqrt(vr.iter().chain(&vi).map(|x| x * x).sum::<f64>());
    (vals[0], vr.iter().map(|x| x / norm).collect(), vi.iter().map(|x| x / norm).collect())
}

/// Eigenvalues of a Hermitian matrix, ascending (each once, not doubled).
pub fn hermitian_eigenvalues(re: &[f64], im: &[f64], n: usize) -> Vec<f64> {
    if im.iter().all(|&x| x == 0.0) {
        return sym_eigen(re, n).0;
    }
    let e = embed_hermitian(re, im, n);
    let (vals, _) = sym_eigen(&e, 2 * n);
    vals.into_iter().step_by(2).collect()
}

pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let (crow, brow) = (&mut c[i * n..(i + 1) * n], &b[k * n..(k + 1) * n]);
            for (cv, bv) in crow.iter_mut().zip(brow) {
                *cv += aik * bv;
            }
        }
    }
    c
}

pub fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}
