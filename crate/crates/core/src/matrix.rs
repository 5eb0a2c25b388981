//! Dense exact Hermitian matrices (Gram blocks and their corrections).

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::scalar::{to_f64, Rational, Scalar};

/// Square matrix of Gaussian rationals stored row-major. Most constructors
/// keep it Hermitian; [`HermitianMatrix::is_hermitian`] checks exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Scalar>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        HermitianMatrix { n, data: vec![Scalar::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for k in 0..n {
            m.data[k * n + k] = Scalar::from_int(1);
        }
        m
    }

    pub fn scaled_identity(n: usize, c: &Rational) -> Self {
        let mut m = Self::zeros(n);
        for k in 0..n {
            m.data[k * n + k] = Scalar::real(c.clone());
        }
        m
    }

    pub fn diagonal(d: &[Rational]) -> Self {
        let mut m = Self::zeros(d.len());
        for (k, v) in d.iter().enumerate() {
            m.data[k * d.len() + k] = Scalar::real(v.clone());
        }
        m
    }

    /// Builds from row-major data; the caller promises the shape.
    pub fn from_row_major(n: usize, data: Vec<Scalar>) -> Option<Self> {
        (data.len() == n * n).then_some(HermitianMatrix { n, data })
    }

    pub fn from_real_rows(rows: &[Vec<Rational>]) -> Option<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return None;
            }
            data.extend(r.iter().cloned().map(Scalar::real));
        }
        Some(HermitianMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.n + c]
    }

    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut Scalar {
        &mut self.data[r * self.n + c]
    }

    /// Sets `(r,c)` and mirrors the conjugate into `(c,r)`.
    pub fn set_hermitian(&mut self, r: usize, c: usize, v: Scalar) {
        if r != c {
            self.data[c * self.n + r] = v.conj();
        }
        self.data[r * self.n + c] = v;
    }

    pub fn data(&self) -> &[Scalar] {
        &self.data
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|r| (r..self.n).all(|c| *self.get(r, c) == self.get(c, r).conj()))
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(Scalar::is_real)
    }

    pub fn add(&self, o: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.n, o.n, "dimension mismatch");
        HermitianMatrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    /// `self + c·I`.
    pub fn shift_diagonal(&self, c: &Rational) -> HermitianMatrix {
        let mut m = self.clone();
        for k in 0..self.n {
            m.data[k * self.n + k].re += c;
        }
        m
    }

    /// `self + c·D` for a diagonal `D`.
    pub fn add_diagonal(&self, c: &Rational, d: &[Rational]) -> HermitianMatrix {
        let mut m = self.clone();
        for k in 0..self.n {
            m.data[k * self.n + k].re += c * &d[k];
        }
        m
    }

    /// Real and imaginary parts as doubles.
    pub fn to_f64(&self) -> (Vec<f64>, Vec<f64>) {
        let re = self.data.iter().map(|z| to_f64(&z.re)).collect();
        let im = self.data.iter().map(|z| to_f64(&z.im)).collect();
        (re, im)
    }

    /// Squared Frobenius norm, exact.
    pub fn frobenius_sqr(&self) -> Rational {
        self.data.iter().fold(Rational::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn sub(&self, o: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.n, o.n, "dimension mismatch");
        HermitianMatrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }
}
