//! Dense row-major complex matrices.
//!
//! Everything the toolkit touches is at most 256 x 256, so the storage is a
//! flat `Vec<Complex64>` and the heavy factorizations (Hermitian
//! eigendecomposition, SVD) are delegated to nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Projector-style outer product |v><v|.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.add_to(i, j, a * other.get(k, j));
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Largest entry magnitude (the max-norm used by all residual bounds).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// max |M - M^dag| over all entries.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    /// Hermitian eigendecomposition with ascending eigenvalues.
    ///
    /// The reconstruction residual `max|M - V L V^dag|` is checked against
    /// `EIG_RESIDUAL_REL * max|M| * dim` and a failure is reported instead of
    /// returning silently wrong spectra.
    pub fn eigh(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
        }
        let decomp = nalgebra::linalg::SymmetricEigen::new(self.to_nalgebra());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| decomp.eigenvalues[a].total_cmp(&decomp.eigenvalues[b]));
        let values: Vec<f64> = order.iter().map(|&k| decomp.eigenvalues[k]).collect();
        let vectors = ComplexMatrix::from_fn(n, n, |i, j| decomp.eigenvectors[(i, order[j])]);

        let residual = self.reconstruction_residual(&values, &vectors);
        let bound = tol::EIG_RESIDUAL_REL * self.max_abs().max(1.0) * n as f64;
        if residual > bound {
            return Err(Error::EigenFailure { residual, bound });
        }
        Ok((values, vectors))
    }

    fn reconstruction_residual(&self, values: &[f64], vectors: &ComplexMatrix) -> f64 {
        let n = self.rows;
        let mut residual: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += vectors.get(i, k) * values[k] * vectors.get(j, k).conj();
                }
                residual = residual.max((acc - self.get(i, j)).norm());
            }
        }
        residual
    }

    /// Smallest eigenvalue of a Hermitian matrix.
    pub fn min_eig(&self) -> Result<f64> {
        Ok(self.eigh()?.0[0])
    }

    /// Singular value decomposition M = U diag(s) V^dag, singular values
    /// descending. Returns (U, s, V^dag).
    pub fn svd(&self) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
        let svd = nalgebra::linalg::SVD::new(self.to_nalgebra(), true, true);
        let u = svd.u.expect("SVD requested with u");
        let vt = svd.v_t.expect("SVD requested with v_t");
        let s: Vec<f64> = svd.singular_values.iter().copied().collect();
        let k = s.len();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
        let values: Vec<f64> = order.iter().map(|&i| s[i]).collect();
        let u_m = ComplexMatrix::from_fn(u.nrows(), k, |i, j| u[(i, order[j])]);
        let vt_m = ComplexMatrix::from_fn(k, vt.ncols(), |i, j| vt[(order[i], j)]);
        (u_m, values, vt_m)
    }
}

/// <u|v> with the conjugation on the left argument.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

/// Kronecker product of vectors, left factor slowest.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_diagonal() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                c((i + 1) as f64, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let b = ComplexMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                c((i + 3) as f64, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let k = a.kron(&b);
        let diag: Vec<f64> = (0..4).map(|i| k.get(i, i).re).collect();
        assert_eq!(diag, vec![3.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn eigh_identity() {
        let (vals, _) = ComplexMatrix::identity(5).eigh().unwrap();
        for v in vals {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigh_pauli_y() {
        let m = ComplexMatrix::from_rows(
            2,
            2,
            vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        )
        .unwrap();
        let (vals, vecs) = m.eigh().unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        // eigenvector check: M v = lambda v
        let v0: Vec<Complex64> = (0..2).map(|i| vecs.get(i, 0)).collect();
        let mv = m.matvec(&v0);
        for i in 0..2 {
            assert!((mv[i] - v0[i] * vals[0]).norm() < 1e-12);
        }
    }

    #[test]
    fn svd_orders_descending() {
        let m = ComplexMatrix::from_rows(
            2,
            2,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)],
        )
        .unwrap();
        let (_, s, _) = m.svd();
        assert!((s[0] - 3.0).abs() < 1e-12);
        assert!((s[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermiticity_deviation_detects() {
        let mut m = ComplexMatrix::identity(3);
        m.set(0, 1, c(0.5, 0.0));
        assert!(m.hermiticity_deviation() > 0.4);
        m.set(1, 0, c(0.5, 0.0));
        assert_eq!(m.hermiticity_deviation(), 0.0);
    }
}
