//! The discretized relay fusion frame system model.
//!
//! A [`RelaySystem`] on an `n`-dimensional real space `H` is an ordered list
//! of local systems, one per outer atom `w`: a closed subspace `W_w` of `H`,
//! a bounded operator `Lambda_w` from `H` into a local space `K_w`, and a
//! nonempty inner family of weighted subspaces `V_{w,v}` of `K_w` with
//! weights `alpha_{w,v} > 0`. Degenerate constructors embed continuous
//! fusion frames and plain vector frames as special cases.

use crate::error::{FrameError, Result};
use crate::measure::{DiscreteMeasureSpace, MeasureAtom};
use crate::numerics::{orthonormalize, project, DenseMatrix, Vector, ORTHO_DROP_TOL};

/// Orthonormality tolerance enforced on stored bases, `max |B^T B - I|`.
pub const BASIS_ORTHO_TOL: f64 = 1e-10;

/// A closed subspace stored as an orthonormal basis matrix
/// (`ambient_dim x k`, `1 <= k <= ambient_dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DenseMatrix,
}

impl Subspace {
    /// Wrap an already-orthonormal basis, enforcing the orthonormality
    /// invariant.
    pub fn new(basis: DenseMatrix) -> Result<Self> {
        if basis.cols() > basis.rows() {
            return Err(FrameError::DimensionMismatch(format!(
                "subspace dimension {} exceeds ambient dimension {}",
                basis.cols(),
                basis.rows()
            )));
        }
        let gram = basis.transpose().mul(&basis)?;
        let defect = gram.max_abs_diff(&DenseMatrix::identity(basis.cols()))?;
        if defect > BASIS_ORTHO_TOL {
            return Err(FrameError::NonOrthonormalBasis(format!(
                "max |B^T B - I| = {defect}"
            )));
        }
        Ok(Self { basis })
    }

    /// Orthonormalize a raw spanning set and wrap the result.
    pub fn from_spanning(columns: &DenseMatrix, tol: f64) -> Result<Self> {
        Self::new(orthonormalize(columns, tol)?)
    }

    /// The full space of dimension `n` (identity basis).
    pub fn full(n: usize) -> Self {
        Self {
            basis: DenseMatrix::identity(n),
        }
    }

    /// Span of a single nonzero vector.
    pub fn line(direction: &Vector) -> Result<Self> {
        let cols = DenseMatrix::from_columns(&[direction.to_vec()])?;
        Self::from_spanning(&cols, ORTHO_DROP_TOL)
    }

    pub fn basis(&self) -> &DenseMatrix {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// Orthogonal projection of `f` onto this subspace.
    pub fn project(&self, f: &Vector) -> Result<Vector> {
        project(&self.basis, f)
    }

    /// Dense projector `B B^T`.
    pub fn projector(&self) -> DenseMatrix {
        crate::numerics::projector_matrix(&self.basis)
    }
}

/// One inner atom `(v, mu(v))` with weight `alpha_{w,v}` and subspace
/// `V_{w,v}` of the owning local space.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerAtom {
    pub atom: MeasureAtom,
    pub alpha: f64,
    pub v: Subspace,
    /// Per-atom operator override (`local_dim x ambient_dim`). Dual
    /// constructions produce operators that depend on the inner index; a
    /// plain system leaves this `None` and uses the local `lambda`.
    pub lambda: Option<DenseMatrix>,
}

/// One outer atom `(w, mu(w))` with subspace `W_w` of `H`, the operator
/// `Lambda_w` into the local space `K_w`, and the inner family over
/// `Omega_w`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSystem {
    pub atom: MeasureAtom,
    pub w: Subspace,
    pub local_dim: usize,
    pub lambda: DenseMatrix,
    pub inner: Vec<InnerAtom>,
}

impl LocalSystem {
    /// Operator used for inner atom `v_idx`: the per-atom override when
    /// present, the shared local operator otherwise.
    pub fn lambda_for(&self, v_idx: usize) -> &DenseMatrix {
        self.inner[v_idx].lambda.as_ref().unwrap_or(&self.lambda)
    }
}

/// The full discretized system.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaySystem {
    pub ambient_dim: usize,
    pub locals: Vec<LocalSystem>,
}

impl RelaySystem {
    /// Validate every type invariant: positive unique-id measure atoms,
    /// orthonormal stored bases, dimensional consistency of all operators,
    /// nonempty inner families.
    pub fn validate(&self) -> Result<()> {
        if self.ambient_dim == 0 {
            return Err(FrameError::InvalidShape("ambient dimension is zero".into()));
        }
        if self.locals.is_empty() {
            return Err(FrameError::EmptySpace);
        }
        let mut outer_ids = std::collections::BTreeSet::new();
        for local in &self.locals {
            if !outer_ids.insert(local.atom.id.as_str()) {
                return Err(FrameError::DuplicateId(format!(
                    "outer atom '{}'",
                    local.atom.id
                )));
            }
            check_weight(&local.atom, "outer")?;
            check_basis(&local.w, self.ambient_dim, &local.atom.id, "W")?;
            if local.lambda.rows() != local.local_dim || local.lambda.cols() != self.ambient_dim {
                return Err(FrameError::DimensionMismatch(format!(
                    "Lambda of '{}' is {}x{}, expected {}x{}",
                    local.atom.id,
                    local.lambda.rows(),
                    local.lambda.cols(),
                    local.local_dim,
                    self.ambient_dim
                )));
            }
            if local.inner.is_empty() {
                return Err(FrameError::EmptyInnerSpace(format!(
                    "local system '{}' has no inner atoms",
                    local.atom.id
                )));
            }
            let mut inner_ids = std::collections::BTreeSet::new();
            for inner in &local.inner {
                if !inner_ids.insert(inner.atom.id.as_str()) {
                    return Err(FrameError::DuplicateId(format!(
                        "inner atom '{}' of '{}'",
                        inner.atom.id, local.atom.id
                    )));
                }
                check_weight(&inner.atom, "inner")?;
                if inner.alpha <= 0.0 || !inner.alpha.is_finite() {
                    return Err(FrameError::NonPositiveWeight(format!(
                        "alpha of inner atom '{}' is {}",
                        inner.atom.id, inner.alpha
                    )));
                }
                check_basis(&inner.v, local.local_dim, &inner.atom.id, "V")?;
                if let Some(lambda) = &inner.lambda {
                    if lambda.rows() != local.local_dim || lambda.cols() != self.ambient_dim {
                        return Err(FrameError::DimensionMismatch(format!(
                            "per-atom Lambda of '{}'/'{}' is {}x{}, expected {}x{}",
                            local.atom.id,
                            inner.atom.id,
                            lambda.rows(),
                            lambda.cols(),
                            local.local_dim,
                            self.ambient_dim
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of outer atoms.
    pub fn n_locals(&self) -> usize {
        self.locals.len()
    }

    /// Total number of inner atoms across all locals.
    pub fn n_inner_atoms(&self) -> usize {
        self.locals.iter().map(|l| l.inner.len()).sum()
    }

    /// Embed a continuous fusion frame `{W_w, v_w}` over `measure` as a relay
    /// system: `K_w = H`, `Lambda_w = I`, a single inner atom of mass one
    /// with `V_{w,v} = W_w` and `alpha = v_w`. The relay frame inequality
    /// then reduces exactly to the fusion frame inequality.
    pub fn from_fusion_frame(
        weights: &[f64],
        subspaces: &[Subspace],
        measure: &DiscreteMeasureSpace,
    ) -> Result<RelaySystem> {
        measure.validate()?;
        if weights.len() != measure.len() || subspaces.len() != measure.len() {
            return Err(FrameError::DimensionMismatch(format!(
                "{} weights and {} subspaces for {} measure atoms",
                weights.len(),
                subspaces.len(),
                measure.len()
            )));
        }
        let ambient_dim = subspaces
            .first()
            .map(Subspace::ambient_dim)
            .ok_or(FrameError::EmptySpace)?;
        let locals = measure
            .atoms
            .iter()
            .zip(subspaces.iter().zip(weights.iter()))
            .map(|(atom, (w, &vw))| {
                if w.ambient_dim() != ambient_dim {
                    return Err(FrameError::DimensionMismatch(format!(
                        "subspace for '{}' lives in dim {}, expected {}",
                        atom.id,
                        w.ambient_dim(),
                        ambient_dim
                    )));
                }
                Ok(LocalSystem {
                    atom: atom.clone(),
                    w: w.clone(),
                    local_dim: ambient_dim,
                    lambda: DenseMatrix::identity(ambient_dim),
                    inner: vec![InnerAtom {
                        atom: MeasureAtom::new("v0", 1.0),
                        alpha: vw,
                        v: w.clone(),
                        lambda: None,
                    }],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let sys = RelaySystem {
            ambient_dim,
            locals,
        };
        sys.validate()?;
        Ok(sys)
    }

    /// Embed a plain vector frame `{F(w)}` over `measure` as a relay system
    /// with rank-one local spaces: `W_w = H`, `K_w = R`, `Lambda_w = F(w)^T`,
    /// a single full inner atom with `alpha = 1`. The frame operator equals
    /// the weighted sum of rank-one operators `<., F(w)> F(w)`.
    pub fn from_plain_frame(
        vectors: &[Vector],
        measure: &DiscreteMeasureSpace,
    ) -> Result<RelaySystem> {
        measure.validate()?;
        if vectors.len() != measure.len() {
            return Err(FrameError::DimensionMismatch(format!(
                "{} vectors for {} measure atoms",
                vectors.len(),
                measure.len()
            )));
        }
        let ambient_dim = vectors
            .first()
            .map(Vector::dim)
            .ok_or(FrameError::EmptySpace)?;
        let locals = measure
            .atoms
            .iter()
            .zip(vectors.iter())
            .enumerate()
            .map(|(idx, (atom, f))| {
                if f.dim() != ambient_dim {
                    return Err(FrameError::DimensionMismatch(format!(
                        "vector for '{}' has dim {}, expected {}",
                        atom.id,
                        f.dim(),
                        ambient_dim
                    )));
                }
                if f.norm() == 0.0 {
                    return Err(FrameError::ZeroVector(idx));
                }
                let lambda = DenseMatrix::new(1, ambient_dim, f.to_vec())?;
                Ok(LocalSystem {
                    atom: atom.clone(),
                    w: Subspace::full(ambient_dim),
                    local_dim: 1,
                    lambda,
                    inner: vec![InnerAtom {
                        atom: MeasureAtom::new("v0", 1.0),
                        alpha: 1.0,
                        v: Subspace::full(1),
                        lambda: None,
                    }],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let sys = RelaySystem {
            ambient_dim,
            locals,
        };
        sys.validate()?;
        Ok(sys)
    }
}

fn check_weight(atom: &MeasureAtom, kind: &str) -> Result<()> {
    if atom.weight <= 0.0 || !atom.weight.is_finite() {
        return Err(FrameError::NonPositiveWeight(format!(
            "{kind} atom '{}' has weight {}",
            atom.id, atom.weight
        )));
    }
    Ok(())
}

fn check_basis(space: &Subspace, expected_ambient: usize, id: &str, role: &str) -> Result<()> {
    if space.ambient_dim() != expected_ambient {
        return Err(FrameError::DimensionMismatch(format!(
            "{role} basis of '{id}' lives in dim {}, expected {expected_ambient}",
            space.ambient_dim()
        )));
    }
    let gram = space.basis().transpose().mul(space.basis())?;
    let defect = gram.max_abs_diff(&DenseMatrix::identity(space.dim()))?;
    if defect > BASIS_ORTHO_TOL {
        return Err(FrameError::NonOrthonormalBasis(format!(
            "{role} basis of '{id}': max |B^T B - I| = {defect}"
        )));
    }
    Ok(())
}
