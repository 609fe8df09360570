//! SPD linear solves: Cholesky at dense desk scale, conjugate gradient above
//! it (and for matrix-free operators).

use crate::error::{FrameError, Result};
use crate::numerics::matrix::{DenseMatrix, Vector};

/// Dimension threshold below which [`solve_spd`] uses a dense Cholesky
/// factorization; larger systems go through conjugate gradient.
const CHOLESKY_MAX_DIM: usize = 512;

/// Solve `A x = b` for symmetric positive definite `A`.
///
/// Uses Cholesky with iterative refinement up to dimension 512 and conjugate
/// gradient beyond. The result satisfies `||A x - b|| <= tol * ||b||` for
/// well-conditioned systems; positive definiteness failures surface as
/// [`FrameError::NotPositiveDefinite`].
pub fn solve_spd(a: &DenseMatrix, b: &Vector, tol: f64) -> Result<Vector> {
    if !a.is_square() {
        return Err(FrameError::InvalidShape(format!(
            "SPD solve needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() != b.dim() {
        return Err(FrameError::DimensionMismatch(format!(
            "matrix is {}x{} but rhs has dim {}",
            a.rows(),
            a.cols(),
            b.dim()
        )));
    }
    if tol <= 0.0 || !tol.is_finite() {
        return Err(FrameError::InvalidShape(format!(
            "solve tolerance must be positive, got {tol}"
        )));
    }
    let deviation = a.symmetry_deviation();
    if deviation > 1e-10 * a.norm_max().max(1.0) {
        return Err(FrameError::NotSymmetric { deviation });
    }

    if a.rows() <= CHOLESKY_MAX_DIM {
        let chol = CholeskyFactor::new(a, tol)?;
        let mut x = chol.solve(b);
        // Iterative refinement: drives the residual to O(eps) backward error
        // even near the conditioning limit.
        let b_norm = b.norm();
        for _ in 0..3 {
            let residual = b.sub(&a.mul_vec(&x)?)?;
            if residual.norm() <= tol * b_norm {
                break;
            }
            let correction = chol.solve(&residual);
            x = x.add(&correction)?;
        }
        Ok(x)
    } else {
        conjugate_gradient(|v| a.mul_vec(v), b, tol, 10 * a.rows())
    }
}

/// Lower-triangular Cholesky factor of an SPD matrix.
pub struct CholeskyFactor {
    l: DenseMatrix,
}

impl CholeskyFactor {
    /// Factor `A = L L^T`. A pivot at or below `pivot_tol` (scaled by the
    /// largest diagonal entry) reports the matrix as not positive definite.
    pub fn new(a: &DenseMatrix, pivot_tol: f64) -> Result<Self> {
        let n = a.rows();
        let mut diag_max = 0.0f64;
        for i in 0..n {
            diag_max = diag_max.max(a[(i, i)].abs());
        }
        let floor = pivot_tol * diag_max.max(1.0);
        let mut l = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = a[(i, j)];
                for k in 0..j {
                    acc -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if acc <= floor {
                        return Err(FrameError::NotPositiveDefinite(format!(
                            "Cholesky pivot {acc} at index {i} (floor {floor})"
                        )));
                    }
                    l[(i, j)] = acc.sqrt();
                } else {
                    l[(i, j)] = acc / l[(j, j)];
                }
            }
        }
        Ok(Self { l })
    }

    /// Solve `L L^T x = b` by forward and backward substitution.
    pub fn solve(&self, b: &Vector) -> Vector {
        let n = self.l.rows();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = b[i];
            for (k, &yk) in y.iter().enumerate().take(i) {
                acc -= self.l[(i, k)] * yk;
            }
            y[i] = acc / self.l[(i, i)];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = y[i];
            for (k, &xk) in x.iter().enumerate().take(n).skip(i + 1) {
                acc -= self.l[(k, i)] * xk;
            }
            x[i] = acc / self.l[(i, i)];
        }
        Vector::from_raw(x)
    }
}

/// Conjugate gradient for a symmetric positive definite operator given as a
/// closure. Converges when `||r|| <= tol * ||b||`.
pub fn conjugate_gradient(
    apply: impl Fn(&Vector) -> Result<Vector>,
    b: &Vector,
    tol: f64,
    max_iter: usize,
) -> Result<Vector> {
    let n = b.dim();
    let mut x = Vector::zeros(n);
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rs_old = r.dot(&r);
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(x);
    }

    for _ in 0..max_iter {
        if rs_old.sqrt() <= tol * b_norm {
            break;
        }
        let ap = apply(&p)?;
        let p_ap = p.dot(&ap);
        if p_ap <= 0.0 {
            return Err(FrameError::NotPositiveDefinite(format!(
                "conjugate gradient detected curvature {p_ap}"
            )));
        }
        let alpha = rs_old / p_ap;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        let rs_new = r.dot(&r);
        let beta = rs_new / rs_old;
        let mut p_next = r.clone();
        p_next.axpy(beta, &p);
        p = p_next;
        rs_old = rs_new;
    }
    Ok(x)
}
