//! Dual constructions, Parseval tightening, the minimal-norm coefficient
//! identity, and invertible-transform stability checks.
//!
//! Three duals are built from a frame system:
//!
//! * canonical: `W -> S^{-1} W`, `Lambda -> Lambda pi_W S^{-1}` with the
//!   ambient frame operator `S`;
//! * global: `V -> G_w^{-1} V`, `Lambda -> G_w^{-1} P_V Lambda` for
//!   user-supplied SPD operators `G_w` on the local spaces (the
//!   block-diagonal realization of a frame operator on the direct sum of
//!   the `K_w`);
//! * local: as global, with `G_w` the frame operator `sum g g^T` of a
//!   supplied spanning family of `K_w`.
//!
//! The global and local transforms produce operators that genuinely depend
//! on the inner index through `P_V`, so their dual systems carry per-atom
//! operator overrides.

use crate::analysis::{frame_bounds, FrameBoundsReport};
use crate::error::{FrameError, Result};
use crate::model::{RelaySystem, Subspace};
use crate::numerics::{
    inv_sqrt_spd, operator_norm, smallest_singular_value, sym_eig, DenseMatrix, Vector,
    ORTHO_DROP_TOL,
};
use crate::ops::{analysis, assemble_dense, synthesis, CoefficientFamily};

/// Slack allowed when checking that computed dual bounds sit inside their
/// predicted interval.
pub const DUAL_BRACKET_TOL: f64 = 1e-9;

/// Slack allowed on the spectral residuals of the ambient transform
/// sandwich.
pub const SANDWICH_TOL: f64 = 1e-8;

/// Singularity threshold on the smallest singular value of a transform.
pub const SINGULAR_Q_TOL: f64 = 1e-10;

/// Which dual construction produced a [`DualSystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualKind {
    Global,
    Local,
    Canonical,
}

impl DualKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DualKind::Global => "global",
            DualKind::Local => "local",
            DualKind::Canonical => "canonical",
        }
    }
}

/// The positive definite operators a dual construction applied.
#[derive(Debug, Clone)]
pub enum DualTransforms {
    /// The ambient frame operator (canonical dual).
    Ambient(DenseMatrix),
    /// One SPD operator per local space (global and local duals).
    PerLocal(Vec<DenseMatrix>),
}

/// Per-inner-atom operators of shape `local_dim(w) x ambient_dim`.
///
/// Dual operators formally indexed by the outer atom alone acquire a
/// dependence on the inner atom through the projection `P_{V_{w,v}}`; this
/// family materializes that indexing.
#[derive(Debug, Clone)]
pub struct PerAtomOperatorFamily {
    pub ops: Vec<Vec<DenseMatrix>>,
}

impl PerAtomOperatorFamily {
    /// Collect the effective operator of every inner atom of `sys`.
    pub fn from_system(sys: &RelaySystem) -> Self {
        Self {
            ops: sys
                .locals
                .iter()
                .map(|l| {
                    (0..l.inner.len())
                        .map(|vi| l.lambda_for(vi).clone())
                        .collect()
                })
                .collect(),
        }
    }
}

/// A derived dual system together with the transforms that produced it and
/// the frame bounds the construction predicts for it.
#[derive(Debug, Clone)]
pub struct DualSystem {
    pub system: RelaySystem,
    pub kind: DualKind,
    pub transforms: DualTransforms,
    pub predicted_lower: f64,
    pub predicted_upper: f64,
}

/// Computed-versus-predicted bounds of a dual system.
#[derive(Debug, Clone)]
pub struct DualBoundsCheck {
    pub actual_lower: f64,
    pub actual_upper: f64,
    pub bracket_ok: bool,
}

impl DualSystem {
    /// Compute the dual's optimal bounds and check the predicted bracket
    /// within [`DUAL_BRACKET_TOL`].
    pub fn check_bounds(&self) -> Result<DualBoundsCheck> {
        let bounds = frame_bounds(&self.system)?;
        let bracket_ok = self.predicted_lower <= bounds.a_opt + DUAL_BRACKET_TOL
            && bounds.b_opt <= self.predicted_upper + DUAL_BRACKET_TOL;
        Ok(DualBoundsCheck {
            actual_lower: bounds.a_opt,
            actual_upper: bounds.b_opt,
            bracket_ok,
        })
    }
}

fn require_frame(sys: &RelaySystem) -> Result<FrameBoundsReport> {
    let report = frame_bounds(sys)?;
    if !report.is_frame {
        return Err(FrameError::NotAFrame(format!(
            "lower bound {} at frame tolerance {}",
            report.a_opt, report.frame_tol
        )));
    }
    Ok(report)
}

/// Canonical dual: `W_w -> S^{-1} W_w`, `Lambda_w -> Lambda_w pi_{W_w}
/// S^{-1}`; inner subspaces and weights unchanged. Its frame operator is
/// `S^{-1}`, so `S_R S_dual = I`.
pub fn canonical_dual(sys: &RelaySystem) -> Result<DualSystem> {
    let bounds = require_frame(sys)?;
    let handle = assemble_dense(sys)?;
    let s = handle.dense().expect("assembled handle has a dense matrix");
    let eig = sym_eig(s)?;
    let s_inv = eig.map_spectrum(|l| 1.0 / l);

    let mut dual = sys.clone();
    for local in &mut dual.locals {
        let transformed = s_inv.mul(local.w.basis())?;
        let new_w = Subspace::from_spanning(&transformed, ORTHO_DROP_TOL)?;
        local.lambda = local.lambda.mul(&local.w.projector())?.mul(&s_inv)?;
        local.w = new_w;
    }
    dual.validate()?;

    let s_inv_norm = 1.0 / bounds.a_opt;
    Ok(DualSystem {
        system: dual,
        kind: DualKind::Canonical,
        transforms: DualTransforms::Ambient(s.clone()),
        predicted_lower: 1.0 / bounds.b_opt,
        predicted_upper: s_inv_norm * s_inv_norm * bounds.b_opt,
    })
}

/// Residuals of the canonical-dual operator identities:
/// `max |S_R S_dual - I|` and `max |T_R^* T_dual - I|`.
pub fn canonical_identity_residuals(sys: &RelaySystem, dual: &RelaySystem) -> Result<(f64, f64)> {
    let n = sys.ambient_dim;
    let s = assemble_dense(sys)?.dense().cloned().expect("dense");
    let s_dual = assemble_dense(dual)?.dense().cloned().expect("dense");
    let identity = DenseMatrix::identity(n);
    let product_residual = s.mul(&s_dual)?.max_abs_diff(&identity)?;
    let mixed = crate::ops::operator_to_dense(n, |f| synthesis(sys, &analysis(dual, f)?))?;
    let mixed_residual = mixed.max_abs_diff(&identity)?;
    Ok((product_residual, mixed_residual))
}

fn spd_transform_data(g: &DenseMatrix, context: &str) -> Result<(DenseMatrix, f64, f64)> {
    let deviation = g.symmetry_deviation();
    if deviation > 1e-10 * g.norm_max().max(1.0) {
        return Err(FrameError::NotSymmetric { deviation });
    }
    let eig = sym_eig(g)?;
    if eig.min() <= 1e-12 * eig.max().abs().max(1.0) {
        return Err(FrameError::NotPositiveDefinite(format!(
            "{context}: smallest eigenvalue {}",
            eig.min()
        )));
    }
    let inv = eig.map_spectrum(|l| 1.0 / l);
    Ok((inv, eig.max(), 1.0 / eig.min()))
}

fn transformed_inner_dual(
    sys: &RelaySystem,
    transforms: &[DenseMatrix],
    kind: DualKind,
    bounds: &FrameBoundsReport,
) -> Result<DualSystem> {
    if transforms.len() != sys.locals.len() {
        return Err(FrameError::DimensionMismatch(format!(
            "{} transforms for {} locals",
            transforms.len(),
            sys.locals.len()
        )));
    }
    let mut dual = sys.clone();
    let mut max_norm_sq: f64 = 0.0;
    let mut max_inv_norm_sq: f64 = 0.0;
    for (local, g) in dual.locals.iter_mut().zip(transforms.iter()) {
        if g.rows() != local.local_dim || g.cols() != local.local_dim {
            return Err(FrameError::DimensionMismatch(format!(
                "transform for '{}' is {}x{}, local space has dim {}",
                local.atom.id,
                g.rows(),
                g.cols(),
                local.local_dim
            )));
        }
        let (g_inv, g_norm, g_inv_norm) =
            spd_transform_data(g, &format!("transform for '{}'", local.atom.id))?;
        max_norm_sq = max_norm_sq.max(g_norm * g_norm);
        max_inv_norm_sq = max_inv_norm_sq.max(g_inv_norm * g_inv_norm);
        for inner in &mut local.inner {
            let new_lambda = g_inv.mul(&inner.v.projector())?.mul(&local.lambda)?;
            let transformed_basis = g_inv.mul(inner.v.basis())?;
            inner.v = Subspace::from_spanning(&transformed_basis, ORTHO_DROP_TOL)?;
            inner.lambda = Some(new_lambda);
        }
    }
    dual.validate()?;
    Ok(DualSystem {
        system: dual,
        kind,
        transforms: DualTransforms::PerLocal(transforms.to_vec()),
        predicted_lower: bounds.a_opt / max_norm_sq,
        predicted_upper: max_inv_norm_sq * bounds.b_opt,
    })
}

/// Global dual for a block-diagonal family of SPD operators `G_w` on the
/// local spaces: `V -> G_w^{-1} V`, `Lambda -> G_w^{-1} P_V Lambda` per
/// inner atom; outer subspaces and weights unchanged.
pub fn global_dual(sys: &RelaySystem, g_locals: &[DenseMatrix]) -> Result<DualSystem> {
    let bounds = require_frame(sys)?;
    transformed_inner_dual(sys, g_locals, DualKind::Global, &bounds)
}

/// Local dual: builds each `G_w` as the frame operator `sum_j g_j g_j^T` of
/// a supplied spanning family of `K_w`, then proceeds as the global dual.
pub fn local_dual(sys: &RelaySystem, local_frames: &[Vec<Vector>]) -> Result<DualSystem> {
    let bounds = require_frame(sys)?;
    if local_frames.len() != sys.locals.len() {
        return Err(FrameError::DimensionMismatch(format!(
            "{} local frames for {} locals",
            local_frames.len(),
            sys.locals.len()
        )));
    }
    let mut operators = Vec::with_capacity(local_frames.len());
    for (local, frame) in sys.locals.iter().zip(local_frames.iter()) {
        let mut s_w = DenseMatrix::zeros(local.local_dim, local.local_dim);
        for g in frame {
            if g.dim() != local.local_dim {
                return Err(FrameError::DimensionMismatch(format!(
                    "local frame vector of dim {} for '{}' with local dim {}",
                    g.dim(),
                    local.atom.id,
                    local.local_dim
                )));
            }
            for i in 0..local.local_dim {
                for j in 0..local.local_dim {
                    s_w[(i, j)] += g[i] * g[j];
                }
            }
        }
        let eig = sym_eig(&s_w)?;
        if eig.min() <= 1e-12 * eig.max().abs().max(1.0) {
            return Err(FrameError::LocalFrameDeficient(format!(
                "frame for '{}' has operator with smallest eigenvalue {}",
                local.atom.id,
                eig.min()
            )));
        }
        operators.push(s_w);
    }
    transformed_inner_dual(sys, &operators, DualKind::Local, &bounds)
}

/// Parseval tightening: `W -> S^{-1/2} W`, `Lambda -> Lambda pi_W S^{-1/2}`.
/// The resulting system's frame operator is the identity.
pub fn parseval_tighten(sys: &RelaySystem) -> Result<RelaySystem> {
    require_frame(sys)?;
    let handle = assemble_dense(sys)?;
    let s = handle.dense().expect("assembled handle has a dense matrix");
    let root_inv = inv_sqrt_spd(s)?;
    let mut tight = sys.clone();
    for local in &mut tight.locals {
        let transformed = root_inv.mul(local.w.basis())?;
        let new_w = Subspace::from_spanning(&transformed, ORTHO_DROP_TOL)?;
        local.lambda = local.lambda.mul(&local.w.projector())?.mul(&root_inv)?;
        local.w = new_w;
    }
    tight.validate()?;
    Ok(tight)
}

/// The three squared norms of the minimal-norm identity and its residual.
///
/// For a valid family `g` the synthesized vector is
/// `f = sum mu mu alpha^2 pi_W Lambda^T g`, the canonical coefficients are
/// `c* = P_V Lambda_dual pi_{W_dual} f`, and in the `alpha^2`-weighted inner
/// product `||g||^2 = ||c*||^2 + ||g - c*||^2`.
#[derive(Debug, Clone)]
pub struct MinimalNormReport {
    /// The vector synthesized from `g` with `alpha^2` weights.
    pub synthesized: Vector,
    pub norm_g_sq: f64,
    pub norm_canonical_sq: f64,
    pub norm_difference_sq: f64,
    /// `| norm_g_sq - norm_canonical_sq - norm_difference_sq |`.
    pub residual: f64,
}

/// Weighted inner product with `alpha^2` factors:
/// `sum mu_w mu_v alpha^2 <c, d>`.
fn alpha_weighted_inner(
    sys: &RelaySystem,
    c: &CoefficientFamily,
    d: &CoefficientFamily,
) -> Result<f64> {
    c.check_indexed_by(sys)?;
    d.check_indexed_by(sys)?;
    let mut acc = 0.0;
    for (li, local) in sys.locals.iter().enumerate() {
        for (vi, inner) in local.inner.iter().enumerate() {
            acc += local.atom.weight
                * inner.atom.weight
                * inner.alpha
                * inner.alpha
                * c.block(li, vi).dot(d.block(li, vi));
        }
    }
    Ok(acc)
}

/// Check the Pythagorean minimal-norm identity for a coefficient family.
pub fn minimal_norm_check(sys: &RelaySystem, g: &CoefficientFamily) -> Result<MinimalNormReport> {
    require_frame(sys)?;
    g.check_indexed_by(sys)?;

    // f = sum mu mu alpha^2 pi_W Lambda^T g (note the squared weight, which
    // distinguishes this synthesis from the adjoint of analysis).
    let mut f = Vector::zeros(sys.ambient_dim);
    for (li, local) in sys.locals.iter().enumerate() {
        for (vi, inner) in local.inner.iter().enumerate() {
            let lifted = local.lambda_for(vi).mul_transpose_vec(g.block(li, vi))?;
            let projected = local.w.project(&lifted)?;
            f.axpy(
                local.atom.weight * inner.atom.weight * inner.alpha * inner.alpha,
                &projected,
            );
        }
    }

    let dual = canonical_dual(sys)?;
    let mut canonical_blocks = Vec::with_capacity(sys.locals.len());
    for local in &dual.system.locals {
        let projected = local.w.project(&f)?;
        let mut row = Vec::with_capacity(local.inner.len());
        for (vi, inner) in local.inner.iter().enumerate() {
            let mapped = local.lambda_for(vi).mul_vec(&projected)?;
            row.push(inner.v.project(&mapped)?);
        }
        canonical_blocks.push(row);
    }
    let canonical = CoefficientFamily::from_blocks(&dual.system, canonical_blocks)?;

    let diff = g.sub(&canonical)?;
    let norm_g_sq = alpha_weighted_inner(sys, g, g)?;
    let norm_canonical_sq = alpha_weighted_inner(sys, &canonical, &canonical)?;
    let norm_difference_sq = alpha_weighted_inner(sys, &diff, &diff)?;
    let residual = (norm_g_sq - norm_canonical_sq - norm_difference_sq).abs();
    Ok(MinimalNormReport {
        synthesized: f,
        norm_g_sq,
        norm_canonical_sq,
        norm_difference_sq,
        residual,
    })
}

/// Outcome of an invertible-transform stability check.
#[derive(Debug, Clone)]
pub struct QTransformReport {
    pub transformed: RelaySystem,
    /// `lambda_min(S_Q - Q S Q^T / ||Q||^2)`; ambient transform only.
    pub sandwich_lower_residual: Option<f64>,
    /// `lambda_min(||Q^{-1}||^2 Q S Q^T - S_Q)`; ambient transform only.
    pub sandwich_upper_residual: Option<f64>,
    pub predicted_lower: f64,
    pub predicted_upper: f64,
    pub actual_lower: f64,
    pub actual_upper: f64,
    pub bracket_ok: bool,
    /// All sandwich residuals clear [`SANDWICH_TOL`] (vacuous for the local
    /// transform) and the bracket holds.
    pub pass: bool,
}

fn check_invertible(q: &DenseMatrix, context: &str) -> Result<f64> {
    if !q.is_square() {
        return Err(FrameError::InvalidShape(format!(
            "{context} must be square, got {}x{}",
            q.rows(),
            q.cols()
        )));
    }
    let sigma_min = smallest_singular_value(q)?;
    if sigma_min <= SINGULAR_Q_TOL {
        return Err(FrameError::SingularQ(format!(
            "{context} has smallest singular value {sigma_min}"
        )));
    }
    Ok(sigma_min)
}

/// Transform the outer subspaces by an invertible ambient operator `Q` and
/// verify the operator sandwich
/// `Q S Q^T / ||Q||^2 <= S_Q <= ||Q^{-1}||^2 Q S Q^T`
/// together with the predicted frame-bound bracket.
pub fn q_transform_ambient(sys: &RelaySystem, q: &DenseMatrix) -> Result<QTransformReport> {
    let bounds = require_frame(sys)?;
    if q.rows() != sys.ambient_dim {
        return Err(FrameError::DimensionMismatch(format!(
            "Q is {}x{}, ambient dim is {}",
            q.rows(),
            q.cols(),
            sys.ambient_dim
        )));
    }
    let sigma_min = check_invertible(q, "ambient transform")?;
    let q_norm = operator_norm(q)?;
    let q_inv_norm = 1.0 / sigma_min;

    let mut transformed = sys.clone();
    for local in &mut transformed.locals {
        let image = q.mul(local.w.basis())?;
        local.w = Subspace::from_spanning(&image, ORTHO_DROP_TOL)?;
    }
    transformed.validate()?;

    let s = assemble_dense(sys)?.dense().cloned().expect("dense");
    let s_q = assemble_dense(&transformed)?
        .dense()
        .cloned()
        .expect("dense");
    let mut qsqt = q.mul(&s)?.mul(&q.transpose())?;
    qsqt.symmetrize();

    let lower_gap = s_q.sub(&qsqt.scale(1.0 / (q_norm * q_norm)))?;
    let upper_gap = qsqt.scale(q_inv_norm * q_inv_norm).sub(&s_q)?;
    let sandwich_lower_residual = sym_eig(&lower_gap)?.min();
    let sandwich_upper_residual = sym_eig(&upper_gap)?.min();

    let cond_sq = (q_norm * q_inv_norm).powi(2);
    let predicted_lower = bounds.a_opt / cond_sq;
    let predicted_upper = bounds.b_opt * cond_sq;
    let actual = frame_bounds(&transformed)?;
    let bracket_ok = actual.a_opt >= predicted_lower - DUAL_BRACKET_TOL
        && actual.b_opt <= predicted_upper + DUAL_BRACKET_TOL;
    let pass = sandwich_lower_residual >= -SANDWICH_TOL
        && sandwich_upper_residual >= -SANDWICH_TOL
        && bracket_ok;
    Ok(QTransformReport {
        transformed,
        sandwich_lower_residual: Some(sandwich_lower_residual),
        sandwich_upper_residual: Some(sandwich_upper_residual),
        predicted_lower,
        predicted_upper,
        actual_lower: actual.a_opt,
        actual_upper: actual.b_opt,
        bracket_ok,
        pass,
    })
}

/// Transform every inner subspace by an invertible operator `Q_w` on its
/// local space and verify the predicted frame-bound bracket
/// `[min_w A / k_w^2, max_w k_w^2 B]` with `k_w = ||Q_w|| ||Q_w^{-1}||`.
pub fn q_transform_local(sys: &RelaySystem, q_locals: &[DenseMatrix]) -> Result<QTransformReport> {
    let bounds = require_frame(sys)?;
    if q_locals.len() != sys.locals.len() {
        return Err(FrameError::DimensionMismatch(format!(
            "{} transforms for {} locals",
            q_locals.len(),
            sys.locals.len()
        )));
    }
    let mut transformed = sys.clone();
    let mut max_cond_sq: f64 = 0.0;
    for (local, q) in transformed.locals.iter_mut().zip(q_locals.iter()) {
        if q.rows() != local.local_dim {
            return Err(FrameError::DimensionMismatch(format!(
                "transform for '{}' is {}x{}, local dim is {}",
                local.atom.id,
                q.rows(),
                q.cols(),
                local.local_dim
            )));
        }
        let sigma_min = check_invertible(q, &format!("transform for '{}'", local.atom.id))?;
        let cond = operator_norm(q)? / sigma_min;
        max_cond_sq = max_cond_sq.max(cond * cond);
        for inner in &mut local.inner {
            let image = q.mul(inner.v.basis())?;
            inner.v = Subspace::from_spanning(&image, ORTHO_DROP_TOL)?;
        }
    }
    transformed.validate()?;

    let predicted_lower = bounds.a_opt / max_cond_sq;
    let predicted_upper = bounds.b_opt * max_cond_sq;
    let actual = frame_bounds(&transformed)?;
    let bracket_ok = actual.a_opt >= predicted_lower - DUAL_BRACKET_TOL
        && actual.b_opt <= predicted_upper + DUAL_BRACKET_TOL;
    Ok(QTransformReport {
        transformed,
        sandwich_lower_residual: None,
        sandwich_upper_residual: None,
        predicted_lower,
        predicted_upper,
        actual_lower: actual.a_opt,
        actual_upper: actual.b_opt,
        bracket_ok,
        pass: bracket_ok,
    })
}
