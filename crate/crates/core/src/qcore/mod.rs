//! Complex matrices and the quantum primitives built on them: tensor
//! products, partial traces, and validation of states and POVMs.
//!
//! Subsystem order is the order of the `dims` list; tensor factors compose
//! left to right, so subsystem 0 is the most significant digit of a
//! composite basis index.

mod matrix;
mod types;

pub use matrix::CMatrix;
pub use types::{DensityMatrix, Ensemble, OutcomeLabel, Povm, PovmElement, Scenario};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances shared by every validity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Frobenius norm bound on M − M†.
    pub herm: f64,
    /// Absolute bound below zero for eigenvalues.
    pub psd: f64,
    /// Frobenius norm bound on ΣM_b − I.
    pub sum: f64,
    /// Absolute bound on |Tr ρ − 1|.
    pub trace: f64,
    /// Absolute bound for prior sums and probability tables.
    pub prob: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-8,
            psd: 1e-9,
            sum: 1e-8,
            trace: 1e-9,
            prob: 1e-9,
        }
    }
}

/// Kronecker product; row `i_a·rows_b + i_b`, column `j_a·cols_b + j_b`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (rb, cb) = (b.rows(), b.cols());
    CMatrix::from_fn(a.rows() * rb, a.cols() * cb, |i, j| {
        a.get(i / rb, j / cb) * b.get(i % rb, j % cb)
    })
}

/// Kronecker product of a non-empty sequence of factors, left to right.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    let mut iter = factors.into_iter();
    let first = iter.next().expect("tensor_all needs at least one factor").clone();
    iter.fold(first, |acc, f| tensor(&acc, f))
}

/// Traces out every subsystem not listed in `keep`.
///
/// `dims` gives the subsystem dimensions in tensor order and `keep` holds
/// zero-based subsystem indices. The kept factors stay in their original
/// relative order regardless of the order in `keep`.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidSubsystems(format!("bad dims {dims:?}")));
    }
    let total: usize = dims.iter().product();
    if total != m.rows() {
        return Err(Error::DimensionMismatch {
            expected: total,
            got: m.rows(),
        });
    }
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("keep set is empty".into()));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::InvalidSubsystems(format!(
                "subsystem {k} out of range for {} subsystems",
                dims.len()
            )));
        }
        if kept[k] {
            return Err(Error::InvalidSubsystems(format!("subsystem {k} listed twice")));
        }
        kept[k] = true;
    }

    // Split every composite index into (kept part, traced part).
    let split: Vec<(usize, usize)> = (0..total)
        .map(|mut idx| {
            let (mut kept_idx, mut kept_stride) = (0, 1);
            let (mut traced_idx, mut traced_stride) = (0, 1);
            for (s, &d) in dims.iter().enumerate().rev() {
                let digit = idx % d;
                idx /= d;
                if kept[s] {
                    kept_idx += digit * kept_stride;
                    kept_stride *= d;
                } else {
                    traced_idx += digit * traced_stride;
                    traced_stride *= d;
                }
            }
            (kept_idx, traced_idx)
        })
        .collect();
    let out_dim: usize = dims
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(d, _)| d)
        .product();

    let mut out = vec![Complex64::new(0.0, 0.0); out_dim * out_dim];
    for (r, &(kr, tr)) in split.iter().enumerate() {
        for (c, &(kc, tc)) in split.iter().enumerate() {
            if tr == tc {
                out[kr * out_dim + kc] += m.get(r, c);
            }
        }
    }
    Ok(CMatrix::from_fn(out_dim, out_dim, |i, j| out[i * out_dim + j]))
}

/// Hermitian part (M + M†)/2.
pub fn hermitize(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok((m + &m.adjoint()).scale(0.5))
}

/// ‖M − M†‖_F.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - &m.adjoint()).frobenius_norm()
}

/// Minimum eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(m.hermitian_eigenvalues()?[0])
}

/// Outcome of [`validate_povm`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmValidation {
    /// Minimum eigenvalue of each element, in element order.
    pub min_eigenvalues: Vec<f64>,
    /// ‖ΣM_b − I‖_F.
    pub completeness_residual: f64,
    pub passed: bool,
}

impl PovmValidation {
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Checks positivity of every element and completeness of the set.
pub fn validate_povm(p: &Povm, tol_psd: f64, tol_sum: f64) -> PovmValidation {
    validate_elements(p.dim(), p.elements().iter().map(|e| &e.matrix), tol_psd, tol_sum)
}

pub(crate) fn validate_elements<'a>(
    dim: usize,
    elements: impl IntoIterator<Item = &'a CMatrix>,
    tol_psd: f64,
    tol_sum: f64,
) -> PovmValidation {
    let mut sum = CMatrix::zeros(dim, dim);
    let mut min_eigenvalues = Vec::new();
    for m in elements {
        min_eigenvalues.push(min_eigenvalue(m).unwrap_or(f64::NEG_INFINITY));
        sum = &sum + m;
    }
    let completeness_residual = (&sum - &CMatrix::identity(dim)).frobenius_norm();
    let passed = !min_eigenvalues.is_empty()
        && min_eigenvalues.iter().all(|&e| e >= -tol_psd)
        && completeness_residual <= tol_sum;
    PovmValidation {
        min_eigenvalues,
        completeness_residual,
        passed,
    }
}
