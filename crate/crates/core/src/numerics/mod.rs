//! Dense real linear-algebra kernel.
//!
//! Everything downstream (frame operators, duals, perturbation bounds) is
//! built on the primitives here: modified Gram-Schmidt orthonormalization,
//! cyclic Jacobi eigendecomposition, Cholesky / conjugate-gradient SPD
//! solves, spectral norms and the SPD inverse square root. All routines are
//! pure and use fixed summation orders, so identical inputs give
//! bit-identical outputs.

mod eig;
mod matrix;
mod orth;
mod solve;

pub use eig::{
    apply_spectrum, inv_spd, inv_sqrt_spd, operator_norm, smallest_singular_value, sym_eig,
    SymEigResult, SYMMETRY_TOL,
};
pub use matrix::{DenseMatrix, Vector};
pub use orth::{orthonormalize, project, projector_matrix, ORTHO_DROP_TOL};
pub use solve::{conjugate_gradient, solve_spd, CholeskyFactor};
