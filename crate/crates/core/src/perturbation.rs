//! Perturbation stability checks between two systems that share everything
//! except their inner subspaces.
//!
//! The deviation operator measures the quadratic functional
//! `sum mu mu alpha^2 ||(P_V - P_Z) Lambda pi_W f||^2` exactly; its largest
//! eigenvalue is the optimal constant of the single-constant hypothesis. The
//! three-constant hypothesis quantifies over all vectors and is verified on
//! samples (random unit vectors plus deviation eigenvectors), so its verdict
//! is reported as sampled.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::frame_bounds;
use crate::error::{FrameError, Result};
use crate::model::RelaySystem;
use crate::numerics::{sym_eig, DenseMatrix, Vector};
use crate::ops::{analysis, coeff_norm};

/// Fixed default seed for sampled hypothesis checks.
pub const DEFAULT_SAMPLE_SEED: u64 = 42;

/// Slack allowed when comparing predicted against computed bounds.
pub const PERTURBATION_BRACKET_TOL: f64 = 1e-8;

/// Outcome of a perturbation theorem check.
#[derive(Debug, Clone)]
pub struct PerturbationReport {
    /// Largest eigenvalue of the deviation operator (the optimal
    /// single-constant bound), clamped at zero.
    pub c_exact: f64,
    /// The theorem hypothesis holds (exactly for the single-constant check,
    /// on samples for the three-constant check).
    pub hypothesis_holds: bool,
    /// True when the hypothesis was verified on samples rather than exactly.
    pub hypothesis_sampled: bool,
    pub predicted_lower: f64,
    pub predicted_upper: f64,
    pub actual_lower: f64,
    pub actual_upper: f64,
    /// `predicted_lower <= actual_lower + tol` and
    /// `actual_upper <= predicted_upper + tol`.
    pub bracket_ok: bool,
}

/// Constants of the three-constant perturbation hypothesis
/// `||(T1 - T2) f|| <= C ||T1 f|| + D ||T2 f|| + eps ||f||`.
#[derive(Debug, Clone, Copy)]
pub struct PerturbationConstants {
    pub c: f64,
    pub d: f64,
    pub eps: f64,
}

impl PerturbationConstants {
    fn validate(&self) -> Result<()> {
        if self.c < 0.0 || self.d < 0.0 || self.eps < 0.0 {
            return Err(FrameError::InvalidConstants(format!(
                "negative constant: C={}, D={}, eps={}",
                self.c, self.d, self.eps
            )));
        }
        if self.d >= 1.0 {
            return Err(FrameError::InvalidConstants(format!(
                "D must lie in [0, 1), got {}",
                self.d
            )));
        }
        if !(self.c.is_finite() && self.d.is_finite() && self.eps.is_finite()) {
            return Err(FrameError::InvalidConstants("non-finite constant".into()));
        }
        Ok(())
    }
}

/// Verify that two systems agree on every component except the inner
/// subspaces: outer and inner measure atoms, weights, outer subspaces and
/// operators must be identical.
pub fn check_shared_structure(sys1: &RelaySystem, sys2: &RelaySystem) -> Result<()> {
    if sys1.ambient_dim != sys2.ambient_dim {
        return Err(FrameError::StructureMismatch(format!(
            "ambient dims {} vs {}",
            sys1.ambient_dim, sys2.ambient_dim
        )));
    }
    if sys1.locals.len() != sys2.locals.len() {
        return Err(FrameError::StructureMismatch(format!(
            "{} locals vs {}",
            sys1.locals.len(),
            sys2.locals.len()
        )));
    }
    for (a, b) in sys1.locals.iter().zip(sys2.locals.iter()) {
        let id = &a.atom.id;
        if a.atom != b.atom {
            return Err(FrameError::StructureMismatch(format!(
                "outer atom '{id}' differs"
            )));
        }
        if a.local_dim != b.local_dim {
            return Err(FrameError::StructureMismatch(format!(
                "local dim of '{id}' differs"
            )));
        }
        if a.w != b.w {
            return Err(FrameError::StructureMismatch(format!(
                "outer subspace of '{id}' differs"
            )));
        }
        if a.lambda != b.lambda {
            return Err(FrameError::StructureMismatch(format!(
                "operator of '{id}' differs"
            )));
        }
        if a.inner.len() != b.inner.len() {
            return Err(FrameError::StructureMismatch(format!(
                "inner count of '{id}' differs"
            )));
        }
        for (ia, ib) in a.inner.iter().zip(b.inner.iter()) {
            if ia.atom != ib.atom || ia.alpha != ib.alpha {
                return Err(FrameError::StructureMismatch(format!(
                    "inner atom '{}' of '{id}' differs in weights",
                    ia.atom.id
                )));
            }
            if ia.lambda != ib.lambda {
                return Err(FrameError::StructureMismatch(format!(
                    "per-atom operator of '{}' in '{id}' differs",
                    ia.atom.id
                )));
            }
        }
    }
    Ok(())
}

/// The symmetric PSD deviation operator
/// `Delta = sum mu mu alpha^2 (pi_W Lambda^T (P_V - P_Z)^T (P_V - P_Z)
/// Lambda pi_W)`, whose quadratic form is the perturbation functional.
pub fn deviation_operator(sys1: &RelaySystem, sys2: &RelaySystem) -> Result<DenseMatrix> {
    check_shared_structure(sys1, sys2)?;
    let n = sys1.ambient_dim;
    let mut delta = DenseMatrix::zeros(n, n);
    for (local1, local2) in sys1.locals.iter().zip(sys2.locals.iter()) {
        let pw = local1.w.projector();
        for (vi, (inner1, inner2)) in local1.inner.iter().zip(local2.inner.iter()).enumerate() {
            let projector_gap = inner1.v.projector().sub(&inner2.v.projector())?;
            let factor = projector_gap.mul(local1.lambda_for(vi))?.mul(&pw)?;
            let term = factor.transpose().mul(&factor)?;
            let scale = local1.atom.weight * inner1.atom.weight * inner1.alpha * inner1.alpha;
            delta.axpy(scale, &term)?;
        }
    }
    delta.symmetrize();
    Ok(delta)
}

/// Single-constant perturbation check: the optimal constant is the largest
/// eigenvalue of the deviation operator, the hypothesis is `C < A`, and the
/// predicted bounds are `(sqrt(A) - sqrt(C))^2` and `(sqrt(B) + sqrt(C))^2`.
pub fn check_perturbation_simple(
    sys1: &RelaySystem,
    sys2: &RelaySystem,
) -> Result<PerturbationReport> {
    let bounds1 = frame_bounds(sys1)?;
    if !bounds1.is_frame {
        return Err(FrameError::NotAFrame(format!(
            "reference system has lower bound {}",
            bounds1.a_opt
        )));
    }
    let delta = deviation_operator(sys1, sys2)?;
    let c_exact = sym_eig(&delta)?.max().max(0.0);
    let hypothesis_holds = c_exact < bounds1.a_opt;
    let predicted_lower = (bounds1.a_opt.sqrt() - c_exact.sqrt()).powi(2);
    let predicted_upper = (bounds1.b_opt.sqrt() + c_exact.sqrt()).powi(2);
    let bounds2 = frame_bounds(sys2)?;
    let bracket_ok = predicted_lower <= bounds2.a_opt + PERTURBATION_BRACKET_TOL
        && bounds2.b_opt <= predicted_upper + PERTURBATION_BRACKET_TOL;
    Ok(PerturbationReport {
        c_exact,
        hypothesis_holds,
        hypothesis_sampled: false,
        predicted_lower,
        predicted_upper,
        actual_lower: bounds2.a_opt,
        actual_upper: bounds2.b_opt,
        bracket_ok,
    })
}

/// Three-constant perturbation check.
///
/// The inequality `||(T1 - T2) f|| <= C ||T1 f|| + D ||T2 f|| + eps ||f||`
/// is verified on `samples` seeded random unit vectors plus every
/// eigenvector of the deviation operator; the hypothesis additionally
/// requires `max(C + eps / sqrt(A), D) < 1`. Predicted bounds follow the
/// triangle-inequality derivation:
/// `A ((1 - C - eps/sqrt(A)) / (1 + D))^2` and
/// `B ((1 + C + eps/sqrt(B)) / (1 - D))^2`.
pub fn check_perturbation_three_constant(
    sys1: &RelaySystem,
    sys2: &RelaySystem,
    constants: PerturbationConstants,
    samples: usize,
    seed: u64,
) -> Result<PerturbationReport> {
    constants.validate()?;
    let bounds1 = frame_bounds(sys1)?;
    if !bounds1.is_frame {
        return Err(FrameError::NotAFrame(format!(
            "reference system has lower bound {}",
            bounds1.a_opt
        )));
    }
    let delta = deviation_operator(sys1, sys2)?;
    let delta_eig = sym_eig(&delta)?;
    let c_exact = delta_eig.max().max(0.0);

    let n = sys1.ambient_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_vectors: Vec<Vector> = Vec::with_capacity(samples + n);
    for _ in 0..samples {
        test_vectors.push(random_unit_vector(&mut rng, n));
    }
    for j in 0..n {
        test_vectors.push(delta_eig.eigenvectors.column(j));
    }

    let mut samples_pass = true;
    for f in &test_vectors {
        let c1 = analysis(sys1, f)?;
        let c2 = analysis(sys2, f)?;
        let gap = coeff_norm(sys1, &c1.sub(&c2)?)?;
        let bound = constants.c * coeff_norm(sys1, &c1)?
            + constants.d * coeff_norm(sys2, &c2)?
            + constants.eps * f.norm();
        if gap > bound + 1e-12 * (1.0 + f.norm()) {
            samples_pass = false;
            break;
        }
    }

    let sqrt_a = bounds1.a_opt.sqrt();
    let sqrt_b = bounds1.b_opt.sqrt();
    let strictness = (constants.c + constants.eps / sqrt_a).max(constants.d);
    let hypothesis_holds = samples_pass && strictness < 1.0;
    let predicted_lower = bounds1.a_opt
        * ((1.0 - constants.c - constants.eps / sqrt_a) / (1.0 + constants.d)).powi(2);
    let predicted_upper = bounds1.b_opt
        * ((1.0 + constants.c + constants.eps / sqrt_b) / (1.0 - constants.d)).powi(2);
    let bounds2 = frame_bounds(sys2)?;
    let bracket_ok = predicted_lower <= bounds2.a_opt + PERTURBATION_BRACKET_TOL
        && bounds2.b_opt <= predicted_upper + PERTURBATION_BRACKET_TOL;
    Ok(PerturbationReport {
        c_exact,
        hypothesis_holds,
        hypothesis_sampled: true,
        predicted_lower,
        predicted_upper,
        actual_lower: bounds2.a_opt,
        actual_upper: bounds2.b_opt,
        bracket_ok,
    })
}

/// Box-Muller standard normal direction, normalized.
fn random_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let entries: Vec<f64> = (0..n)
            .map(|_| {
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let v = Vector::from_raw(entries);
        let norm = v.norm();
        if norm > 1e-8 {
            return v.scale(1.0 / norm);
        }
    }
}
