//! Analysis, synthesis and frame operators of a relay system, in matrix-free
//! and densely assembled forms, together with the weighted representation
//! space they act on.
//!
//! For a system with outer atoms `(w, mu_w)`, inner atoms `(v, mu_v)`,
//! weights `alpha`, subspaces `W_w`, `V_{w,v}` and operators `Lambda`:
//!
//! * analysis: `f -> { alpha P_V Lambda pi_W f }`
//! * synthesis: `{c} -> sum mu_w mu_v alpha pi_W Lambda^T c`
//! * frame operator: `S = sum mu_w mu_v alpha^2 pi_W Lambda^T P_V Lambda pi_W`
//!
//! The weight enters once in analysis and once in synthesis, so `S = T^* T`
//! carries `alpha^2`, matching the defining frame inequality.

use crate::error::{FrameError, Result};
use crate::model::RelaySystem;
use crate::numerics::{DenseMatrix, Vector};

/// Tolerance for the block-membership invariant of a coefficient family.
pub const BLOCK_MEMBERSHIP_TOL: f64 = 1e-10;

/// An element of the weighted representation space: one block per inner atom,
/// each of the owning local dimension and lying in its subspace `V_{w,v}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFamily {
    blocks: Vec<Vec<Vector>>,
}

impl CoefficientFamily {
    /// All-zero family indexed by `sys`.
    pub fn zeros(sys: &RelaySystem) -> Self {
        Self {
            blocks: sys
                .locals
                .iter()
                .map(|l| l.inner.iter().map(|_| Vector::zeros(l.local_dim)).collect())
                .collect(),
        }
    }

    /// Wrap raw blocks, enforcing the index structure of `sys` and the
    /// membership of every block in its inner subspace.
    pub fn from_blocks(sys: &RelaySystem, blocks: Vec<Vec<Vector>>) -> Result<Self> {
        let family = Self { blocks };
        family.check_indexed_by(sys)?;
        for (li, local) in sys.locals.iter().enumerate() {
            for (vi, inner) in local.inner.iter().enumerate() {
                let block = &family.blocks[li][vi];
                let projected = inner.v.project(block)?;
                let defect = projected.sub(block)?.norm();
                if defect > BLOCK_MEMBERSHIP_TOL * block.norm().max(1.0) {
                    return Err(FrameError::IndexMismatch(format!(
                        "block ({}, {}) lies outside its inner subspace by {defect}",
                        local.atom.id, inner.atom.id
                    )));
                }
            }
        }
        Ok(family)
    }

    /// Project raw blocks into their inner subspaces, producing a valid
    /// family from arbitrary data of the right shape.
    pub fn project_into(sys: &RelaySystem, blocks: Vec<Vec<Vector>>) -> Result<Self> {
        let raw = Self { blocks };
        raw.check_indexed_by(sys)?;
        let mut projected = Vec::with_capacity(sys.locals.len());
        for (li, local) in sys.locals.iter().enumerate() {
            let mut row = Vec::with_capacity(local.inner.len());
            for (vi, inner) in local.inner.iter().enumerate() {
                row.push(inner.v.project(&raw.blocks[li][vi])?);
            }
            projected.push(row);
        }
        Ok(Self { blocks: projected })
    }

    /// Verify that the block layout matches the index structure of `sys`.
    pub fn check_indexed_by(&self, sys: &RelaySystem) -> Result<()> {
        if self.blocks.len() != sys.locals.len() {
            return Err(FrameError::IndexMismatch(format!(
                "family has {} outer blocks, system has {}",
                self.blocks.len(),
                sys.locals.len()
            )));
        }
        for (li, local) in sys.locals.iter().enumerate() {
            if self.blocks[li].len() != local.inner.len() {
                return Err(FrameError::IndexMismatch(format!(
                    "family has {} inner blocks at '{}', system has {}",
                    self.blocks[li].len(),
                    local.atom.id,
                    local.inner.len()
                )));
            }
            for (vi, block) in self.blocks[li].iter().enumerate() {
                if block.dim() != local.local_dim {
                    return Err(FrameError::IndexMismatch(format!(
                        "block ({}, {}) has dim {}, local space has dim {}",
                        local.atom.id,
                        local.inner[vi].atom.id,
                        block.dim(),
                        local.local_dim
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn block(&self, local_idx: usize, inner_idx: usize) -> &Vector {
        &self.blocks[local_idx][inner_idx]
    }

    pub fn block_mut(&mut self, local_idx: usize, inner_idx: usize) -> &mut Vector {
        &mut self.blocks[local_idx][inner_idx]
    }

    pub fn blocks(&self) -> &[Vec<Vector>] {
        &self.blocks
    }

    /// Blockwise difference; layouts must agree.
    pub fn sub(&self, other: &CoefficientFamily) -> Result<CoefficientFamily> {
        if self.blocks.len() != other.blocks.len() {
            return Err(FrameError::IndexMismatch(
                "outer block count differs".into(),
            ));
        }
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (row_a, row_b) in self.blocks.iter().zip(other.blocks.iter()) {
            if row_a.len() != row_b.len() {
                return Err(FrameError::IndexMismatch(
                    "inner block count differs".into(),
                ));
            }
            blocks.push(
                row_a
                    .iter()
                    .zip(row_b.iter())
                    .map(|(a, b)| a.sub(b))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(CoefficientFamily { blocks })
    }
}

/// Weighted inner product of the representation space:
/// `sum_w sum_v mu_w mu_v <c_{w,v}, d_{w,v}>`, fixed summation order.
pub fn coeff_inner(sys: &RelaySystem, c: &CoefficientFamily, d: &CoefficientFamily) -> Result<f64> {
    c.check_indexed_by(sys)?;
    d.check_indexed_by(sys)?;
    let mut acc = 0.0;
    for (li, local) in sys.locals.iter().enumerate() {
        for (vi, inner) in local.inner.iter().enumerate() {
            acc += local.atom.weight * inner.atom.weight * c.block(li, vi).dot(d.block(li, vi));
        }
    }
    Ok(acc)
}

/// Norm induced by [`coeff_inner`].
pub fn coeff_norm(sys: &RelaySystem, c: &CoefficientFamily) -> Result<f64> {
    Ok(coeff_inner(sys, c, c)?.max(0.0).sqrt())
}

/// Analysis operator: block `(w, v)` is `alpha_{w,v} P_{V_{w,v}} Lambda_w
/// pi_{W_w} f`. Every block lies in its inner subspace by construction.
pub fn analysis(sys: &RelaySystem, f: &Vector) -> Result<CoefficientFamily> {
    if f.dim() != sys.ambient_dim {
        return Err(FrameError::DimensionMismatch(format!(
            "vector has dim {}, ambient is {}",
            f.dim(),
            sys.ambient_dim
        )));
    }
    let mut blocks = Vec::with_capacity(sys.locals.len());
    for local in &sys.locals {
        let projected = local.w.project(f)?;
        let mut row = Vec::with_capacity(local.inner.len());
        for (vi, inner) in local.inner.iter().enumerate() {
            let mapped = local.lambda_for(vi).mul_vec(&projected)?;
            row.push(inner.v.project(&mapped)?.scale(inner.alpha));
        }
        blocks.push(row);
    }
    Ok(CoefficientFamily { blocks })
}

/// Synthesis operator (adjoint of analysis):
/// `sum_w sum_v mu_w mu_v alpha_{w,v} pi_{W_w} Lambda_w^T c_{w,v}`.
pub fn synthesis(sys: &RelaySystem, c: &CoefficientFamily) -> Result<Vector> {
    c.check_indexed_by(sys)?;
    let mut acc = Vector::zeros(sys.ambient_dim);
    for (li, local) in sys.locals.iter().enumerate() {
        for (vi, inner) in local.inner.iter().enumerate() {
            let lifted = local.lambda_for(vi).mul_transpose_vec(c.block(li, vi))?;
            let projected = local.w.project(&lifted)?;
            acc.axpy(
                local.atom.weight * inner.atom.weight * inner.alpha,
                &projected,
            );
        }
    }
    Ok(acc)
}

/// Matrix-free frame operator application: `synthesis(analysis(f))`.
pub fn frame_operator_apply(sys: &RelaySystem, f: &Vector) -> Result<Vector> {
    synthesis(sys, &analysis(sys, f)?)
}

/// The frame operator of a system, optionally with a dense realization.
///
/// The dense cache is computed once at construction. When present it is
/// symmetric by construction (the sum is symmetrized as `(M + M^T)/2`) and
/// positive semidefinite up to roundoff.
#[derive(Debug, Clone)]
pub struct FrameOperatorHandle<'a> {
    system: &'a RelaySystem,
    dense: Option<DenseMatrix>,
}

impl<'a> FrameOperatorHandle<'a> {
    /// Handle without a dense cache; `apply` runs matrix-free.
    pub fn matrix_free(system: &'a RelaySystem) -> Self {
        Self {
            system,
            dense: None,
        }
    }

    pub fn system(&self) -> &RelaySystem {
        self.system
    }

    /// The dense matrix when assembled.
    pub fn dense(&self) -> Option<&DenseMatrix> {
        self.dense.as_ref()
    }

    /// Apply the frame operator to `f`, through the cache when present.
    pub fn apply(&self, f: &Vector) -> Result<Vector> {
        match &self.dense {
            Some(m) => m.mul_vec(f),
            None => frame_operator_apply(self.system, f),
        }
    }
}

/// Assemble the dense frame operator
/// `S = sum mu_w mu_v alpha^2 (P_V Lambda pi_W)^T (P_V Lambda pi_W)`,
/// symmetrized after summation.
pub fn assemble_dense(sys: &RelaySystem) -> Result<FrameOperatorHandle<'_>> {
    let mut s = DenseMatrix::zeros(sys.ambient_dim, sys.ambient_dim);
    for local in &sys.locals {
        let pw = local.w.projector();
        for (vi, inner) in local.inner.iter().enumerate() {
            let lambda_pw = local.lambda_for(vi).mul(&pw)?;
            let factor = inner.v.projector().mul(&lambda_pw)?;
            let term = factor.transpose().mul(&factor)?;
            let scale = local.atom.weight * inner.atom.weight * inner.alpha * inner.alpha;
            s.axpy(scale, &term)?;
        }
    }
    s.symmetrize();
    Ok(FrameOperatorHandle {
        system: sys,
        dense: Some(s),
    })
}

/// Densify an arbitrary linear map on the ambient space by applying it to
/// the standard basis.
pub fn operator_to_dense(
    dim: usize,
    op: impl Fn(&Vector) -> Result<Vector>,
) -> Result<DenseMatrix> {
    let mut out = DenseMatrix::zeros(dim, dim);
    for j in 0..dim {
        let col = op(&Vector::basis(dim, j))?;
        if col.dim() != dim {
            return Err(FrameError::DimensionMismatch(format!(
                "operator returned dim {}, expected {dim}",
                col.dim()
            )));
        }
        for i in 0..dim {
            out[(i, j)] = col[i];
        }
    }
    Ok(out)
}
