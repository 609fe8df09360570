//! Orthonormalization and orthogonal projection.

use crate::error::{FrameError, Result};
use crate::numerics::matrix::{DenseMatrix, Vector};

/// Default relative tolerance for dropping rank-deficient columns.
pub const ORTHO_DROP_TOL: f64 = 1e-10;

/// Orthonormalize the columns of `columns` by modified Gram-Schmidt with one
/// full re-orthogonalization pass.
///
/// Returns a matrix whose columns form an orthonormal basis of the column
/// space of the input. A column is dropped when its norm after
/// re-orthogonalization is at most `tol` times its original norm, or at most
/// `tol` absolutely (this catches zero input columns).
///
/// # Example
///
/// ```
/// use relay_frames::numerics::{orthonormalize, DenseMatrix};
///
/// // Two copies of the same column span a single direction.
/// let cols = DenseMatrix::from_columns(&[vec![2.0, 0.0], vec![3.0, 0.0]]).unwrap();
/// let u = orthonormalize(&cols, 1e-10).unwrap();
/// assert_eq!(u.cols(), 1);
/// ```
pub fn orthonormalize(columns: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(FrameError::InvalidShape(format!(
            "orthonormalization tolerance must be positive, got {tol}"
        )));
    }
    let mut basis: Vec<Vector> = Vec::new();
    for j in 0..columns.cols() {
        let col = columns.column(j);
        let original_norm = col.norm();
        let mut v = col;
        // MGS sweep plus one full re-orthogonalization pass.
        for _ in 0..2 {
            for u in &basis {
                let coeff = u.dot(&v);
                v.axpy(-coeff, u);
            }
        }
        let nrm = v.norm();
        if nrm <= tol * original_norm || nrm <= tol {
            continue;
        }
        basis.push(v.scale(1.0 / nrm));
    }
    if basis.is_empty() {
        return Err(FrameError::AllColumnsDegenerate { tol });
    }
    let cols: Vec<Vec<f64>> = basis.iter().map(|v| v.to_vec()).collect();
    DenseMatrix::from_columns(&cols)
}

/// Orthogonal projection `U (U^T f)` of `f` onto the column span of `U`.
///
/// `U` must have orthonormal columns for the result to be the orthogonal
/// projection; this is the caller's contract and is not re-checked here.
pub fn project(basis: &DenseMatrix, f: &Vector) -> Result<Vector> {
    if basis.rows() != f.dim() {
        return Err(FrameError::DimensionMismatch(format!(
            "projection basis has {} rows but vector has dim {}",
            basis.rows(),
            f.dim()
        )));
    }
    let coeffs = basis.mul_transpose_vec(f)?;
    basis.mul_vec(&coeffs)
}

/// Dense projector matrix `U U^T` for the column span of `U`.
pub fn projector_matrix(basis: &DenseMatrix) -> DenseMatrix {
    basis
        .mul(&basis.transpose())
        .expect("basis times its own transpose is always conformable")
}
