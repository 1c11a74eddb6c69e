use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix.
///
/// Indexing is `(row, col)`; [`CMatrix::from_rows`] and [`CMatrix::to_rows`]
/// use row-major nesting.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    inner: DMatrix<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimensions must be positive");
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Self {
            inner: DMatrix::from_fn(rows, cols, f),
        }
    }

    /// Builds a matrix from row-major nested rows. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                got: bad.len(),
            });
        }
        Ok(Self::from_fn(n_rows, n_cols, |i, j| rows[i][j]))
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Rank-one projector |v⟩⟨v| (no normalization applied).
    pub fn projector(ket: &[Complex64]) -> Self {
        let n = ket.len();
        Self::from_fn(n, n, |i, j| ket[i] * ket[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.inner[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            inner: self.inner.map(|z| z * factor),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.diagonal().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &CMatrix) -> Complex64 {
        assert_eq!(self.cols(), other.rows());
        assert_eq!(self.rows(), other.cols());
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                acc += self.inner[(i, j)] * other.inner[(j, i)];
            }
        }
        acc
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    ///
    /// Only the Hermitian part of `self` is used.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let h = super::hermitize(self)?;
        let mut vals: Vec<f64> = h.inner.symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }

    /// Applies a real function to the spectrum of a Hermitian matrix: U f(Λ) U†.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
        let h = super::hermitize(self)?;
        let eig = h.inner.symmetric_eigen();
        let n = self.rows();
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            let lambda = f(eig.eigenvalues[k]);
            let v = eig.eigenvectors.column(k);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += v[i] * v[j].conj() * lambda;
                }
            }
        }
        Ok(Self { inner: out })
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix {}x{} ", self.rows(), self.cols())?;
        f.debug_list().entries(self.to_rows()).finish()
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}
