//! Symmetric eigendecomposition by cyclic Jacobi sweeps, plus the spectral
//! functions built on it: operator norm, SPD inverse and inverse square root.

use crate::error::{FrameError, Result};
use crate::numerics::matrix::{DenseMatrix, Vector};

/// Relative symmetry tolerance accepted by [`sym_eig`].
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Convergence target for the off-diagonal Frobenius norm, relative to the
/// Frobenius norm of the input.
const JACOBI_OFF_TOL: f64 = 1e-12;

/// Hard cap on full Jacobi sweeps.
const JACOBI_MAX_SWEEPS: usize = 100;

/// Full spectral decomposition of a symmetric matrix.
///
/// Eigenvalues are ascending; `eigenvectors` is orthogonal with column `k`
/// belonging to `eigenvalues[k]`.
#[derive(Debug, Clone)]
pub struct SymEigResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
}

impl SymEigResult {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    /// Apply `f` to each eigenvalue and reassemble `Q f(D) Q^T`,
    /// symmetrized.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let n = self.eigenvalues.len();
        let q = &self.eigenvectors;
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += q[(i, k)] * f(self.eigenvalues[k]) * q[(j, k)];
                }
                out[(i, j)] = acc;
            }
        }
        out.symmetrize();
        out
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// The input must be square and symmetric within [`SYMMETRY_TOL`] relative to
/// its largest entry; it is symmetrized before iteration so the decomposition
/// is exactly of `(A + A^T)/2`. Converges when the off-diagonal Frobenius
/// norm falls below `1e-12 * ||A||_F`, with a hard cap of 100 sweeps.
pub fn sym_eig(a: &DenseMatrix) -> Result<SymEigResult> {
    if !a.is_square() {
        return Err(FrameError::InvalidShape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let deviation = a.symmetry_deviation();
    if deviation > SYMMETRY_TOL * a.norm_max().max(1.0) {
        return Err(FrameError::NotSymmetric { deviation });
    }

    let n = a.rows();
    let mut m = a.clone();
    m.symmetrize();
    let norm_f = m.norm_frobenius();
    let mut q = DenseMatrix::identity(n);

    if n == 1 {
        return Ok(SymEigResult {
            eigenvalues: vec![m[(0, 0)]],
            eigenvectors: q,
        });
    }

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_frobenius(&m) <= JACOBI_OFF_TOL * norm_f {
            break;
        }
        for p in 0..n - 1 {
            for r in p + 1..n {
                let apr = m[(p, r)];
                if apr == 0.0 {
                    continue;
                }
                // Classic two-sided Jacobi rotation annihilating m[(p, r)].
                let theta = (m[(r, r)] - m[(p, p)]) / (2.0 * apr);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkr = m[(k, r)];
                    m[(k, p)] = c * mkp - s * mkr;
                    m[(k, r)] = s * mkp + c * mkr;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mrk = m[(r, k)];
                    m[(p, k)] = c * mpk - s * mrk;
                    m[(r, k)] = s * mpk + c * mrk;
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkr;
                    q[(k, r)] = s * qkp + c * qkr;
                }
            }
        }
    }

    // Sort ascending, stable in the original diagonal order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(i, i)]
            .partial_cmp(&m[(j, j)])
            .expect("finite eigenvalues")
            .then(i.cmp(&j))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = q[(k, src)];
        }
    }

    Ok(SymEigResult {
        eigenvalues,
        eigenvectors: vectors,
    })
}

fn off_diagonal_frobenius(m: &DenseMatrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)] * m[(i, j)];
            }
        }
    }
    acc.sqrt()
}

/// Spectral norm: the largest singular value, `sqrt(lambda_max(A^T A))`.
pub fn operator_norm(a: &DenseMatrix) -> Result<f64> {
    let gram = a.transpose().mul(a)?;
    let eig = sym_eig(&gram)?;
    Ok(eig.max().max(0.0).sqrt())
}

/// Smallest singular value, `sqrt(lambda_min(A^T A))`. For square invertible
/// `A` its reciprocal is the spectral norm of the inverse.
pub fn smallest_singular_value(a: &DenseMatrix) -> Result<f64> {
    let gram = a.transpose().mul(a)?;
    let eig = sym_eig(&gram)?;
    Ok(eig.min().max(0.0).sqrt())
}

fn require_positive_definite(eig: &SymEigResult, context: &str) -> Result<()> {
    let floor = 1e-13 * eig.max().abs().max(1.0);
    if eig.min() <= floor {
        return Err(FrameError::NotPositiveDefinite(format!(
            "{context}: smallest eigenvalue {} (scale {})",
            eig.min(),
            eig.max()
        )));
    }
    Ok(())
}

/// Inverse of a symmetric positive definite matrix via its spectrum.
pub fn inv_spd(a: &DenseMatrix) -> Result<DenseMatrix> {
    let eig = sym_eig(a)?;
    require_positive_definite(&eig, "inverse")?;
    Ok(eig.map_spectrum(|l| 1.0 / l))
}

/// Inverse square root `R` of a symmetric positive definite matrix,
/// satisfying `R A R = I` up to roundoff; `R` is symmetric.
pub fn inv_sqrt_spd(a: &DenseMatrix) -> Result<DenseMatrix> {
    let eig = sym_eig(a)?;
    require_positive_definite(&eig, "inverse square root")?;
    Ok(eig.map_spectrum(|l| 1.0 / l.sqrt()))
}

/// Apply the inverse of an SPD matrix given by its decomposition.
pub fn apply_spectrum(eig: &SymEigResult, f: impl Fn(f64) -> f64, x: &Vector) -> Result<Vector> {
    let coeffs = eig.eigenvectors.mul_transpose_vec(x)?;
    let mapped = Vector::new(
        coeffs
            .entries()
            .iter()
            .zip(eig.eigenvalues.iter())
            .map(|(&c, &l)| c * f(l))
            .collect(),
    )?;
    eig.eigenvectors.mul_vec(&mapped)
}
