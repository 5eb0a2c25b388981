//! Exact dense linear algebra over the Gaussian rationals.

use alloc::vec::Vec;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::scalar::{Rational, Scalar};

fn row_denominator_lcm(row: &[Scalar]) -> num_bigint::BigInt {
    let mut l = num_bigint::BigInt::one();
    for z in row {
        l = l.lcm(z.re.denom());
        l = l.lcm(z.im.denom());
    }
    l
}

/// Solves `A x = b` (row-major `A`, `n×n`) by fraction-free Bareiss
/// elimination with row pivoting. Returns the first column without a pivot
/// when `A` is singular.
pub fn solve(a: &[Scalar], n: usize, b: &[Scalar]) -> Result<Vec<Scalar>, usize> {
    let w = n + 1;
    let mut m: Vec<Scalar> = Vec::with_capacity(n * w);
    for r in 0..n {
        let mut row: Vec<Scalar> = a[r * n..(r + 1) * n].to_vec();
        row.push(b[r].clone());
        let l = Rational::from_integer(row_denominator_lcm(&row));
        m.extend(row.into_iter().map(|z| z.scale(&l)));
    }
    let mut prev = Scalar::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&p| !m[p * w + k].is_zero()) else {
            return Err(k);
        };
        if p != k {
            for j in 0..w {
                m.swap(k * w + j, p * w + j);
            }
        }
        let pivot = m[k * w + k].clone();
        let inv_prev = prev.inv().expect("non-zero pivot");
        for i in k + 1..n {
            let f = m[i * w + k].clone();
            for j in k + 1..w {
                let v = &(&(&pivot * &m[i * w + j]) - &(&f * &m[k * w + j])) * &inv_prev;
                m[i * w + j] = v;
            }
            m[i * w + k] = Scalar::zero();
        }
        prev = pivot;
    }
    let mut x = alloc::vec![Scalar::zero(); n];
    for k in (0..n).rev() {
        let mut s = m[k * w + n].clone();
        for j in k + 1..n {
            s -= &m[k * w + j] * &x[j];
        }
        x[k] = &s * &m[k * w + k].inv().expect("non-zero pivot");
    }
    Ok(x)
}

/// Solves a possibly singular `A x = b` by Gauss-Jordan elimination, with
/// free unknowns set to zero. `Err(rows)` lists the equations that are
/// inconsistent with the rest.
pub fn solve_consistent(a: &[Scalar], n: usize, b: &[Scalar]) -> Result<Vec<Scalar>, Vec<usize>> {
    let w = n + 1;
    let mut m: Vec<Scalar> = Vec::with_capacity(n * w);
    for r in 0..n {
        m.extend_from_slice(&a[r * n..(r + 1) * n]);
        m.push(b[r].clone());
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).find(|&p| !m[p * w + col].is_zero()) else {
            continue;
        };
        if p != row {
            for j in 0..w {
                m.swap(row * w + j, p * w + j);
            }
            order.swap(row, p);
        }
        let inv = m[row * w + col].inv().expect("non-zero pivot");
        for j in col..w {
            m[row * w + j] = &m[row * w + j] * &inv;
        }
        for i in (0..n).filter(|&i| i != row) {
            let f = m[i * w + col].clone();
            if f.is_zero() {
                continue;
            }
            for j in col..w {
                let v = &f * &m[row * w + j];
                m[i * w + j] -= v;
            }
        }
        pivots.push(col);
        row += 1;
    }
    let bad: Vec<usize> = (row..n).filter(|&i| !m[i * w + n].is_zero()).map(|i| order[i]).collect();
    if !bad.is_empty() {
        return Err(bad);
    }
    let mut x = alloc::vec![Scalar::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r * w + n].clone();
    }
    Ok(x)
}

/// Exact PSD decision for a Hermitian matrix by symmetric elimination in the
/// natural order. A zero pivot is admissible only if its whole remaining
/// row vanishes.
pub fn is_psd(a: &[Scalar], n: usize) -> bool {
    let mut m = a.to_vec();
    for k in 0..n {
        let d = m[k * n + k].re.clone();
        if d < Rational::zero() {
            return false;
        }
        if d.is_zero() {
            if (k + 1..n).any(|j| !m[k * n + j].is_zero()) {
                return false;
            }
            continue;
        }
        let dinv = Scalar::real(d.recip());
        for i in k + 1..n {
            if m[i * n + k].is_zero() {
                continue;
            }
            let f = &m[i * n + k] * &dinv;
            for j in k + 1..n {
                if m[k * n + j].is_zero() {
                    continue;
                }
                let v = &f * &m[k * n + j];
                m[i * n + j] -= v;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn s(n: i64, d: i64) -> Scalar {
        Scalar::real(rat(n, d))
    }

    #[test]
    fn solves_small_systems() {
        let a = [s(2, 1), s(1, 1), s(1, 1), s(2, 1)];
        let x = solve(&a, 2, &[s(1, 1), s(0, 1)]).unwrap();
        assert_eq!(x, [s(2, 3), s(-1, 3)]);
        let sing = [s(1, 1), s(2, 1), s(2, 1), s(4, 1)];
        assert_eq!(solve(&sing, 2, &[s(1, 1), s(1, 1)]), Err(1));
        let c = [Scalar::from_int(1), Scalar::i(), -Scalar::i(), Scalar::from_int(2)];
        let x = solve(&c, 2, &[Scalar::from_int(1), Scalar::zero()]).unwrap();
        assert_eq!(x[0], Scalar::from_int(2));
        assert_eq!(x[1], Scalar::i());
    }

    #[test]
    fn consistent_singular_systems() {
        let a = [s(1, 1), s(1, 1), s(1, 1), s(1, 1)];
        let x = solve_consistent(&a, 2, &[s(2, 1), s(2, 1)]).unwrap();
        assert_eq!(x, [s(2, 1), s(0, 1)]);
        assert_eq!(solve_consistent(&a, 2, &[s(2, 1), s(3, 1)]), Err(alloc::vec![1]));
        let full = [s(2, 1), s(1, 1), s(1, 1), s(2, 1)];
        assert_eq!(solve_consistent(&full, 2, &[s(1, 1), s(0, 1)]).unwrap(), solve(&full, 2, &[s(1, 1), s(0, 1)]).unwrap());
    }

    #[test]
    fn psd_decisions() {
        assert!(is_psd(&[s(1, 1), s(0, 1), s(0, 1), s(1, 1)], 2));
        assert!(!is_psd(&[s(0, 1), s(1, 1), s(1, 1), s(0, 1)], 2));
        assert!(is_psd(&[s(1, 1), s(1, 1), s(1, 1), s(1, 1)], 2));
        assert!(is_psd(&[Scalar::from_int(1), Scalar::i(), -Scalar::i(), Scalar::from_int(1)], 2));
        assert!(!is_psd(&[Scalar::from_int(1), Scalar::i(), -Scalar::i(), s(99, 100)], 2));
    }
}
