//! Frame verdicts, optimal bounds, reconstruction and cross-duality.
//!
//! The optimal frame bounds of a system are the extreme eigenvalues of its
//! dense frame operator; every verdict here is derived from that spectrum.

use crate::error::{FrameError, Result};
use crate::model::RelaySystem;
use crate::numerics::{solve_spd, sym_eig, CholeskyFactor, Vector};
use crate::ops::{analysis, assemble_dense, frame_operator_apply, synthesis, CoefficientFamily};

/// Default absolute threshold on the (scale-normalized) smallest eigenvalue
/// of the frame operator for the frame verdict.
pub const FRAME_TOL_DEFAULT: f64 = 1e-10;

/// Default tolerance on `max(|A - 1|, |B - 1|)` for the Parseval verdict.
pub const PARSEVAL_TOL_DEFAULT: f64 = 1e-8;

/// Relative residual tolerance of the reconstruction solves.
const RECONSTRUCT_SOLVE_TOL: f64 = 1e-12;

/// Which side of the frame operator the inverse is applied to in a
/// reconstruction formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconstructionFormula {
    /// `f = S^{-1}(S f)`: invert after the frame-operator expansion.
    Left,
    /// `f = S(S^{-1} f)`: invert before the frame-operator expansion.
    Right,
}

impl ReconstructionFormula {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReconstructionFormula::Left => "left",
            ReconstructionFormula::Right => "right",
        }
    }
}

/// Optimal bounds and verdicts of a system.
#[derive(Debug, Clone)]
pub struct FrameBoundsReport {
    /// Optimal lower bound: smallest eigenvalue of the frame operator,
    /// clamped at zero.
    pub a_opt: f64,
    /// Optimal upper (Bessel) bound: largest eigenvalue.
    pub b_opt: f64,
    /// Lower bound clears the frame tolerance.
    pub is_frame: bool,
    /// Always true in finite dimensions; the bound is `b_opt`.
    pub is_bessel: bool,
    /// Both optimal bounds within `parseval_tol` of one.
    pub is_parseval: bool,
    pub frame_tol: f64,
    pub parseval_tol: f64,
}

/// Compute optimal bounds and verdicts with the default tolerances.
///
/// # Example
///
/// ```
/// use relay_frames::analysis::frame_bounds;
/// use relay_frames::{DiscreteMeasureSpace, RelaySystem, Vector};
///
/// // An orthonormal basis is a Parseval frame.
/// let measure = DiscreteMeasureSpace::counting("w", 2);
/// let sys = RelaySystem::from_plain_frame(
///     &[
///         Vector::new(vec![1.0, 0.0]).unwrap(),
///         Vector::new(vec![0.0, 1.0]).unwrap(),
///     ],
///     &measure,
/// )
/// .unwrap();
/// let bounds = frame_bounds(&sys).unwrap();
/// assert!(bounds.is_parseval);
/// assert!((bounds.a_opt - 1.0).abs() <= 1e-12);
/// ```
pub fn frame_bounds(sys: &RelaySystem) -> Result<FrameBoundsReport> {
    frame_bounds_with(sys, FRAME_TOL_DEFAULT, PARSEVAL_TOL_DEFAULT)
}

/// Compute optimal bounds and verdicts with explicit tolerances.
///
/// The frame verdict tests the smallest eigenvalue against
/// `frame_tol * max(1, max diagonal of S)`, so the threshold scales with the
/// operator while never dropping below the absolute tolerance.
pub fn frame_bounds_with(
    sys: &RelaySystem,
    frame_tol: f64,
    parseval_tol: f64,
) -> Result<FrameBoundsReport> {
    let spectrum = frame_spectrum(sys)?;
    let a_opt = spectrum.first().copied().unwrap_or(0.0).max(0.0);
    let b_opt = spectrum.last().copied().unwrap_or(0.0).max(0.0);
    let handle = assemble_dense(sys)?;
    let s = handle.dense().expect("assembled handle has a dense matrix");
    let mut diag_max = 0.0f64;
    for i in 0..s.rows() {
        diag_max = diag_max.max(s[(i, i)]);
    }
    let is_frame = a_opt > frame_tol * diag_max.max(1.0);
    let is_parseval = (a_opt - 1.0).abs().max((b_opt - 1.0).abs()) <= parseval_tol;
    Ok(FrameBoundsReport {
        a_opt,
        b_opt,
        is_frame,
        is_bessel: true,
        is_parseval,
        frame_tol,
        parseval_tol,
    })
}

/// Full ascending spectrum of the dense frame operator.
pub fn frame_spectrum(sys: &RelaySystem) -> Result<Vec<f64>> {
    sys.validate()?;
    let handle = assemble_dense(sys)?;
    let eig = sym_eig(handle.dense().expect("assembled handle has a dense matrix"))?;
    Ok(eig.eigenvalues)
}

/// Injectivity and range diagnostics of the analysis operator.
#[derive(Debug, Clone)]
pub struct AnalysisDiagnostics {
    /// Smallest singular value of the analysis operator, `sqrt(a_opt)`.
    pub smallest_singular_value: f64,
    /// Lower frame bound clears the tolerance, so the analysis operator has
    /// a trivial kernel.
    pub injective: bool,
    /// Ranges of operators between finite-dimensional spaces are always
    /// closed; reported structurally rather than tested.
    pub closed_range: bool,
}

pub fn analysis_diagnostics(sys: &RelaySystem) -> Result<AnalysisDiagnostics> {
    let report = frame_bounds(sys)?;
    Ok(AnalysisDiagnostics {
        smallest_singular_value: report.a_opt.sqrt(),
        injective: report.is_frame,
        closed_range: true,
    })
}

/// Reconstruction outcome against a known original vector.
#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    pub reconstructed: Vector,
    /// `||reconstructed - original|| / max(1, ||original||)`.
    pub relative_error: f64,
    pub formula_used: ReconstructionFormula,
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

/// Recover the vector with coefficient family `c`: the solution `g` of
/// `S g = synthesis(c)`.
///
/// `Left` solves once against the fully summed synthesis vector; `Right`
/// pushes the inverse inside the sum, solving per inner atom and summing the
/// solutions. The two paths agree up to roundoff by linearity.
pub fn reconstruct(
    sys: &RelaySystem,
    c: &CoefficientFamily,
    formula: ReconstructionFormula,
) -> Result<Vector> {
    require_frame(sys)?;
    c.check_indexed_by(sys)?;
    let handle = assemble_dense(sys)?;
    let s = handle.dense().expect("assembled handle has a dense matrix");
    match formula {
        ReconstructionFormula::Left => solve_spd(s, &synthesis(sys, c)?, RECONSTRUCT_SOLVE_TOL),
        ReconstructionFormula::Right => {
            let factor = CholeskyFactor::new(s, RECONSTRUCT_SOLVE_TOL)?;
            let mut acc = Vector::zeros(sys.ambient_dim);
            for (li, local) in sys.locals.iter().enumerate() {
                for (vi, inner) in local.inner.iter().enumerate() {
                    let lifted = local.lambda_for(vi).mul_transpose_vec(c.block(li, vi))?;
                    let term = local
                        .w
                        .project(&lifted)?
                        .scale(local.atom.weight * inner.atom.weight * inner.alpha);
                    acc.axpy(1.0, &factor.solve(&term));
                }
            }
            Ok(acc)
        }
    }
}

/// Run a reconstruction round trip on a known vector.
///
/// `Left` computes `S^{-1}(S f)` (frame-operator expansion first, one solve
/// after); `Right` computes `S(S^{-1} f)` (solve first, expansion after).
pub fn reconstruct_vector(
    sys: &RelaySystem,
    f: &Vector,
    formula: ReconstructionFormula,
) -> Result<ReconstructionReport> {
    require_frame(sys)?;
    if f.dim() != sys.ambient_dim {
        return Err(FrameError::DimensionMismatch(format!(
            "vector has dim {}, ambient is {}",
            f.dim(),
            sys.ambient_dim
        )));
    }
    let handle = assemble_dense(sys)?;
    let s = handle.dense().expect("assembled handle has a dense matrix");
    let reconstructed = match formula {
        ReconstructionFormula::Left => {
            let expanded = frame_operator_apply(sys, f)?;
            solve_spd(s, &expanded, RECONSTRUCT_SOLVE_TOL)?
        }
        ReconstructionFormula::Right => {
            let inverted = solve_spd(s, f, RECONSTRUCT_SOLVE_TOL)?;
            frame_operator_apply(sys, &inverted)?
        }
    };
    let relative_error = reconstructed.sub(f)?.norm() / f.norm().max(1.0);
    Ok(ReconstructionReport {
        reconstructed,
        relative_error,
        formula_used: formula,
    })
}

/// Tolerance on `max |T_{R2}^* T_R - I|` for declaring a dual pair.
pub const DUAL_PAIR_TOL: f64 = 1e-8;

/// Outcome of the cross-duality test between two systems.
#[derive(Debug, Clone)]
pub struct CrossDualityReport {
    /// `max |M - I|` where `M` densifies `f -> synthesis_{R2}(analysis_R(f))`.
    pub deviation_from_identity: f64,
    /// Deviation within [`DUAL_PAIR_TOL`].
    pub is_dual_pair: bool,
    pub bounds_first: FrameBoundsReport,
    pub bounds_second: FrameBoundsReport,
    /// When the pair is dual: both implied lower bounds `A >= 1/B'` hold
    /// within [`DUAL_PAIR_TOL`]. `None` when not a dual pair.
    pub bound_implications_ok: Option<bool>,
}

/// Check whether `synthesis_{R2} . analysis_{R}` is the identity, and when it
/// is, verify the implied mutual lower frame bounds `A >= 1/B'`.
pub fn cross_duality_check(
    sys_r: &RelaySystem,
    sys_r2: &RelaySystem,
) -> Result<CrossDualityReport> {
    if sys_r.ambient_dim != sys_r2.ambient_dim {
        return Err(FrameError::IncompatibleSystems(format!(
            "ambient dims {} vs {}",
            sys_r.ambient_dim, sys_r2.ambient_dim
        )));
    }
    if sys_r.locals.len() != sys_r2.locals.len() {
        return Err(FrameError::IncompatibleSystems(format!(
            "{} locals vs {}",
            sys_r.locals.len(),
            sys_r2.locals.len()
        )));
    }
    for (a, b) in sys_r.locals.iter().zip(sys_r2.locals.iter()) {
        if a.local_dim != b.local_dim || a.inner.len() != b.inner.len() {
            return Err(FrameError::IncompatibleSystems(format!(
                "local '{}' has shape ({}, {}) vs ({}, {})",
                a.atom.id,
                a.local_dim,
                a.inner.len(),
                b.local_dim,
                b.inner.len()
            )));
        }
    }

    let n = sys_r.ambient_dim;
    let m = crate::ops::operator_to_dense(n, |f| synthesis(sys_r2, &analysis(sys_r, f)?))?;
    let deviation = m.max_abs_diff(&crate::numerics::DenseMatrix::identity(n))?;
    let is_dual_pair = deviation <= DUAL_PAIR_TOL;
    let bounds_first = frame_bounds(sys_r)?;
    let bounds_second = frame_bounds(sys_r2)?;
    let bound_implications_ok = if is_dual_pair {
        let first_ok = bounds_first.a_opt >= 1.0 / bounds_second.b_opt - DUAL_PAIR_TOL;
        let second_ok = bounds_second.a_opt >= 1.0 / bounds_first.b_opt - DUAL_PAIR_TOL;
        Some(first_ok && second_ok)
    } else {
        None
    };
    Ok(CrossDualityReport {
        deviation_from_identity: deviation,
        is_dual_pair,
        bounds_first,
        bounds_second,
        bound_implications_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{
        det_vector, mercedes_benz_system, mixed_4d_system, parseval_2d, single_vector_system,
    };

    #[test]
    fn parseval_bounds_are_unit() {
        let report = frame_bounds(&parseval_2d()).unwrap();
        assert!((report.a_opt - 1.0).abs() <= 1e-12);
        assert!((report.b_opt - 1.0).abs() <= 1e-12);
        assert!(report.is_frame);
        assert!(report.is_parseval);
    }

    #[test]
    fn single_vector_system_is_not_a_frame() {
        let report = frame_bounds(&single_vector_system()).unwrap();
        assert!(report.a_opt.abs() <= 1e-12);
        assert!((report.b_opt - 4.0).abs() <= 1e-10);
        assert!(!report.is_frame);
        assert!(report.is_bessel);
    }

    #[test]
    fn mercedes_benz_is_tight_at_three_halves() {
        let report = frame_bounds(&mercedes_benz_system()).unwrap();
        assert!((report.a_opt - 1.5).abs() <= 1e-10);
        assert!((report.b_opt - 1.5).abs() <= 1e-10);
        assert!(report.is_frame);
        assert!(!report.is_parseval);
    }

    #[test]
    fn diagnostics_match_frame_verdict() {
        for sys in [parseval_2d(), single_vector_system(), mixed_4d_system()] {
            let report = frame_bounds(&sys).unwrap();
            let diag = analysis_diagnostics(&sys).unwrap();
            assert_eq!(diag.injective, report.is_frame);
            assert!(diag.closed_range);
            assert!((diag.smallest_singular_value.powi(2) - report.a_opt).abs() <= 1e-9);
        }
    }

    #[test]
    fn parseval_smallest_singular_value_is_one() {
        let diag = analysis_diagnostics(&parseval_2d()).unwrap();
        assert!((diag.smallest_singular_value - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn reconstruct_from_parseval_coefficients() {
        let sys = parseval_2d();
        let f = Vector::new(vec![3.0, 4.0]).unwrap();
        let c = analysis(&sys, &f).unwrap();
        let g = reconstruct(&sys, &c, ReconstructionFormula::Left).unwrap();
        assert!(g.sub(&f).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn reconstruct_zero_family_gives_zero() {
        let sys = parseval_2d();
        let c = CoefficientFamily::zeros(&sys);
        let g = reconstruct(&sys, &c, ReconstructionFormula::Right).unwrap();
        assert!(g.norm() <= 1e-14);
    }

    #[test]
    fn reconstruct_formulas_agree_on_random_frame() {
        let sys = mixed_4d_system();
        for tag in 0..10u64 {
            let f = det_vector(4, tag + 7);
            let c = analysis(&sys, &f).unwrap();
            let left = reconstruct(&sys, &c, ReconstructionFormula::Left).unwrap();
            let right = reconstruct(&sys, &c, ReconstructionFormula::Right).unwrap();
            assert!(left.sub(&right).unwrap().norm() <= 1e-10 * (1.0 + f.norm()));
            assert!(left.sub(&f).unwrap().norm() <= 1e-9 * (1.0 + f.norm()));
        }
    }

    #[test]
    fn reconstruct_vector_both_formulas_recover() {
        let sys = parseval_2d();
        let f = Vector::new(vec![3.0, 4.0]).unwrap();
        for formula in [ReconstructionFormula::Left, ReconstructionFormula::Right] {
            let report = reconstruct_vector(&sys, &f, formula).unwrap();
            assert!(report.relative_error <= 1e-12);
            assert!(report.reconstructed.sub(&f).unwrap().norm() <= 1e-12);
        }
    }

    #[test]
    fn reconstruct_vector_scale_invariant_under_alpha() {
        // Doubling alpha rescales S and S^{-1} inversely; the round trip is
        // unchanged.
        let sys = mixed_4d_system();
        let mut doubled = sys.clone();
        for local in &mut doubled.locals {
            for inner in &mut local.inner {
                inner.alpha *= 2.0;
            }
        }
        let f = det_vector(4, 99);
        let base = reconstruct_vector(&sys, &f, ReconstructionFormula::Left).unwrap();
        let scaled = reconstruct_vector(&doubled, &f, ReconstructionFormula::Left).unwrap();
        assert!(
            base.reconstructed
                .sub(&scaled.reconstructed)
                .unwrap()
                .norm()
                <= 1e-10 * (1.0 + f.norm())
        );
    }

    #[test]
    fn reconstruct_rejects_non_frame() {
        let sys = single_vector_system();
        let f = Vector::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            reconstruct_vector(&sys, &f, ReconstructionFormula::Left).unwrap_err(),
            FrameError::NotAFrame(_)
        ));
    }

    #[test]
    fn sandwich_inequality_on_random_vectors() {
        let sys = mixed_4d_system();
        let report = frame_bounds(&sys).unwrap();
        let handle = assemble_dense(&sys).unwrap();
        for tag in 0..100u64 {
            let f = det_vector(4, tag + 300);
            let norm_sq = f.dot(&f);
            if norm_sq == 0.0 {
                continue;
            }
            let quad = handle.apply(&f).unwrap().dot(&f) / norm_sq;
            assert!(quad >= report.a_opt - 1e-9);
            assert!(quad <= report.b_opt + 1e-9);
        }
    }

    #[test]
    fn self_cross_duality_of_parseval() {
        let sys = parseval_2d();
        let report = cross_duality_check(&sys, &sys).unwrap();
        assert!(report.deviation_from_identity <= 1e-12);
        assert!(report.is_dual_pair);
        assert_eq!(report.bound_implications_ok, Some(true));
    }

    #[test]
    fn canonical_dual_is_cross_dual_pair() {
        let sys = mixed_4d_system();
        let dual = crate::duality::canonical_dual(&sys).unwrap();
        for (first, second) in [(&sys, &dual.system), (&dual.system, &sys)] {
            let report = cross_duality_check(first, second).unwrap();
            assert!(
                report.deviation_from_identity <= 1e-8,
                "deviation {}",
                report.deviation_from_identity
            );
            assert!(report.is_dual_pair);
            assert_eq!(report.bound_implications_ok, Some(true));
        }
    }

    #[test]
    fn alpha_doubled_parseval_fails_cross_duality() {
        let mut doubled = parseval_2d();
        for local in &mut doubled.locals {
            for inner in &mut local.inner {
                inner.alpha *= 2.0;
            }
        }
        // Both arguments are the doubled system, so M = S = 4 I.
        let report = cross_duality_check(&doubled, &doubled).unwrap();
        assert!((report.deviation_from_identity - 3.0).abs() <= 1e-10);
        assert!(!report.is_dual_pair);
        assert_eq!(report.bound_implications_ok, None);
    }

    #[test]
    fn cross_duality_rejects_incompatible_layouts() {
        let err = cross_duality_check(&parseval_2d(), &mixed_4d_system()).unwrap_err();
        assert!(matches!(err, FrameError::IncompatibleSystems(_)));
    }

    #[test]
    fn frame_verdict_monotone_under_added_atom() {
        // Appending a PSD term can only push both bounds up.
        let sys = mixed_4d_system();
        let before = frame_bounds(&sys).unwrap();
        let mut extended = sys.clone();
        extended.locals[2].inner.push(crate::model::InnerAtom {
            atom: crate::measure::MeasureAtom::new("v9", 0.7),
            alpha: 0.9,
            v: crate::model::Subspace::full(4),
            lambda: None,
        });
        let after = frame_bounds(&extended).unwrap();
        assert!(after.a_opt >= before.a_opt - 1e-12);
        assert!(after.b_opt >= before.b_opt - 1e-12);
    }
}
