//! Cross-module invariants, exercised on randomized inputs with fixed seeds.

use proptest::prelude::*;
use rand::Rng as _;

use relay_frames::analysis::{
    analysis_diagnostics, frame_bounds, frame_spectrum, reconstruct_vector, ReconstructionFormula,
};
use relay_frames::duality::{canonical_dual, canonical_identity_residuals, parseval_tighten};
use relay_frames::measure::{DiscreteMeasureSpace, MeasureAtom};
use relay_frames::model::{RelaySystem, Subspace};
use relay_frames::numerics::{
    operator_norm, orthonormalize, projector_matrix, solve_spd, sym_eig, DenseMatrix, Vector,
};
use relay_frames::ops::{
    analysis, assemble_dense, coeff_inner, coeff_norm, frame_operator_apply, synthesis,
};
use relay_frames::perturbation::{check_perturbation_simple, deviation_operator};
use relay_frames::testkit;

// ---------------------------------------------------------------------------
// numerics invariants
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Projectors from orthonormalized bases are idempotent and symmetric.
    #[test]
    fn projector_idempotent_and_symmetric(
        cols in 1usize..4,
        seed in 0u64..1_000_000,
    ) {
        let mut rng = testkit::rng(seed);
        let raw = testkit::random_matrix(&mut rng, 5, cols, 1.0);
        if let Ok(u) = orthonormalize(&raw, 1e-10) {
            let p = projector_matrix(&u);
            let pp = p.mul(&p).unwrap();
            prop_assert!(pp.max_abs_diff(&p).unwrap() <= 1e-10);
            prop_assert!(p.symmetry_deviation() <= 1e-10);
        }
    }

    /// Spectral norm is absolutely homogeneous.
    #[test]
    fn operator_norm_homogeneous(
        seed in 0u64..1_000_000,
        alpha in -8.0f64..8.0,
    ) {
        let mut rng = testkit::rng(seed);
        let a = testkit::random_matrix(&mut rng, 4, 6, 1.0);
        let base = operator_norm(&a).unwrap();
        let scaled = operator_norm(&a.scale(alpha)).unwrap();
        prop_assert!((scaled - alpha.abs() * base).abs() <= 1e-10 * (1.0 + base));
    }

    /// Eigenvalues come out ascending with an orthogonal eigenvector matrix.
    #[test]
    fn sym_eig_sorted_and_orthogonal(n in 2usize..8, seed in 0u64..1_000_000) {
        let mut rng = testkit::rng(seed);
        let mut a = testkit::random_matrix(&mut rng, n, n, 1.0);
        a.symmetrize();
        let eig = sym_eig(&a).unwrap();
        for pair in eig.eigenvalues.windows(2) {
            prop_assert!(pair[0] <= pair[1]);
        }
        let q = &eig.eigenvectors;
        let defect = q.transpose().mul(q).unwrap()
            .max_abs_diff(&DenseMatrix::identity(n)).unwrap();
        prop_assert!(defect <= 1e-10);
    }
}

/// 100 random SPD systems of dimension <= 16 solve to the stated residual.
#[test]
fn solve_spd_residual_on_random_systems() {
    let mut rng = testkit::rng(7);
    for round in 0..100 {
        let n = 1 + (round % 16);
        let a = testkit::random_spd(&mut rng, n, 1e3);
        let b = testkit::random_vector(&mut rng, n);
        let tol = 1e-10;
        let x = solve_spd(&a, &b, tol).unwrap();
        let residual = b.sub(&a.mul_vec(&x).unwrap()).unwrap().norm();
        assert!(residual <= tol * b.norm(), "residual {residual} at dim {n}");
    }
}

/// Projection lemma: P_V A^T = P_V A^T P_{orth(A V)} entrywise.
#[test]
fn projection_lemma_holds() {
    let mut rng = testkit::rng(11);
    for round in 0..100 {
        let n = 2 + (round % 7);
        let k = 1 + (round % n.min(3));
        let a = testkit::random_matrix(&mut rng, n, n, 1.0);
        let v = testkit::random_subspace(&mut rng, n, k);
        let image = orthonormalize(&a.mul(v.basis()).unwrap(), 1e-10).unwrap();
        let lhs = v.projector().mul(&a.transpose()).unwrap();
        let rhs = lhs.mul(&projector_matrix(&image)).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-10);
    }
}

// ---------------------------------------------------------------------------
// measure invariants
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// validate accepts exactly the spaces satisfying the type invariants.
    #[test]
    fn measure_validate_matches_invariants(
        weights in prop::collection::vec(-1.0f64..3.0, 0..6),
        dup in any::<bool>(),
    ) {
        let mut atoms: Vec<MeasureAtom> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| MeasureAtom::new(format!("a{i}"), w))
            .collect();
        if dup && atoms.len() >= 2 {
            atoms[0].id = atoms[1].id.clone();
        }
        let space = DiscreteMeasureSpace::new(atoms.clone());
        let invariants_hold = !atoms.is_empty()
            && atoms.iter().all(|a| a.weight > 0.0 && a.weight.is_finite())
            && !(dup && atoms.len() >= 2);
        prop_assert_eq!(space.validate().is_ok(), invariants_hold);
    }
}

// ---------------------------------------------------------------------------
// relay-model invariants
// ---------------------------------------------------------------------------

/// Constructor outputs always validate, and serialization round-trips
/// bitwise.
#[test]
fn constructors_validate_and_roundtrip() {
    let mut rng = testkit::rng(23);
    for round in 0..20 {
        let n = 2 + (round % 5);
        let count = 1 + (round % 4);
        let measure = DiscreteMeasureSpace::counting("w", count);
        let subspaces: Vec<Subspace> = (0..count)
            .map(|_| {
                let d = 1 + (testkit::gaussian(&mut rng).abs() as usize) % n;
                testkit::random_subspace(&mut rng, n, d)
            })
            .collect();
        let weights: Vec<f64> = (0..count).map(|i| 0.5 + 0.25 * i as f64).collect();
        let fusion = RelaySystem::from_fusion_frame(&weights, &subspaces, &measure).unwrap();
        assert!(fusion.validate().is_ok());

        let vectors: Vec<Vector> = (0..count)
            .map(|_| testkit::random_vector(&mut rng, n))
            .collect();
        let plain = RelaySystem::from_plain_frame(&vectors, &measure).unwrap();
        assert!(plain.validate().is_ok());

        for sys in [&fusion, &plain] {
            let json = relay_frames::format::system_to_json(sys);
            let loaded = relay_frames::format::load_system_str(&json).unwrap();
            assert_eq!(&loaded.system, sys);
        }
    }
}

/// Fusion-frame embedding: the relay integrand equals the fusion integrand
/// `v_w^2 ||pi_W f||^2` for random vectors.
#[test]
fn fusion_embedding_integrand_matches() {
    let mut rng = testkit::rng(29);
    for _ in 0..20 {
        let n = 4;
        let measure = DiscreteMeasureSpace::counting("w", 3);
        let subspaces: Vec<Subspace> = (0..3)
            .map(|i| testkit::random_subspace(&mut rng, n, 1 + i % n))
            .collect();
        let weights = [1.5, 0.5, 2.0];
        let sys = RelaySystem::from_fusion_frame(&weights, &subspaces, &measure).unwrap();
        let f = testkit::random_vector(&mut rng, n);
        let c = analysis(&sys, &f).unwrap();
        for (li, local) in sys.locals.iter().enumerate() {
            let relay_term = {
                let b = c.block(li, 0);
                b.dot(b)
            };
            let proj = subspaces[li].project(&f).unwrap();
            let fusion_term = weights[li] * weights[li] * proj.dot(&proj);
            assert!(
                (relay_term - fusion_term).abs() <= 1e-12 * (1.0 + fusion_term),
                "local {}",
                local.atom.id
            );
        }
    }
}

/// Fusion-frame embedding reproduces the weighted sum of projectors.
#[test]
fn fusion_embedding_matches_projector_sum() {
    let mut rng = testkit::rng(31);
    let n = 4;
    let measure = DiscreteMeasureSpace::new(
        (0..5)
            .map(|i| MeasureAtom::new(format!("w{i}"), 0.5 + 0.3 * i as f64))
            .collect(),
    );
    let subspaces: Vec<Subspace> = (0..5)
        .map(|i| testkit::random_subspace(&mut rng, n, 1 + i % n))
        .collect();
    let weights: Vec<f64> = (0..5).map(|i| 0.75 + 0.5 * i as f64).collect();
    let sys = RelaySystem::from_fusion_frame(&weights, &subspaces, &measure).unwrap();
    let s = assemble_dense(&sys).unwrap().dense().cloned().unwrap();
    let mut oracle = DenseMatrix::zeros(n, n);
    for ((sub, &vw), atom) in subspaces.iter().zip(weights.iter()).zip(&measure.atoms) {
        oracle
            .axpy(vw * vw * atom.weight, &sub.projector())
            .unwrap();
    }
    assert!(s.max_abs_diff(&oracle).unwrap() <= 1e-12 * oracle.norm_max().max(1.0));
}

// ---------------------------------------------------------------------------
// frame-ops invariants
// ---------------------------------------------------------------------------

/// Adjointness across random systems.
#[test]
fn adjointness_across_random_systems() {
    let mut rng = testkit::rng(37);
    for round in 0..40 {
        let n = 2 + (round % 8);
        let sys = testkit::random_frame_system(&mut rng, n, 1e4);
        let f = testkit::random_vector(&mut rng, n);
        let c = testkit::random_coefficient_family(&mut rng, &sys);
        let lhs = coeff_inner(&sys, &analysis(&sys, &f).unwrap(), &c).unwrap();
        let rhs = f.dot(&synthesis(&sys, &c).unwrap());
        let scale = (1.0 + f.norm()) * (1.0 + coeff_norm(&sys, &c).unwrap());
        assert!((lhs - rhs).abs() <= 1e-10 * scale);
    }
}

/// Assembled frame operators are symmetric and PSD; the Bessel bound caps
/// the synthesis norm.
#[test]
fn frame_operator_symmetric_psd_and_bessel_bound() {
    let mut rng = testkit::rng(41);
    for round in 0..20 {
        let n = 2 + (round % 6);
        let sys = testkit::random_frame_system(&mut rng, n, 1e4);
        let s = assemble_dense(&sys).unwrap().dense().cloned().unwrap();
        assert!(s.symmetry_deviation() <= 1e-12);
        let eig = sym_eig(&s).unwrap();
        assert!(eig.min() >= -1e-10);

        let b_opt = frame_bounds(&sys).unwrap().b_opt;
        let c = testkit::random_coefficient_family(&mut rng, &sys);
        let out = synthesis(&sys, &c).unwrap();
        assert!(out.norm() <= b_opt.sqrt() * coeff_norm(&sys, &c).unwrap() + 1e-10);
    }
}

/// The largest eigenvalue of S matches a power-iteration estimate, tying
/// `||T||^2 = ||T^*||^2 = ||S||` together.
#[test]
fn frame_operator_norm_matches_power_iteration() {
    let mut rng = testkit::rng(43);
    for round in 0..10 {
        let n = 2 + (round % 6);
        let sys = testkit::random_frame_system(&mut rng, n, 1e4);
        let b_opt = frame_bounds(&sys).unwrap().b_opt;
        // Independent estimate: power iteration through the matrix-free
        // apply path.
        let mut x = testkit::random_unit_vector(&mut rng, n);
        let mut estimate = 0.0;
        for _ in 0..2000 {
            let y = frame_operator_apply(&sys, &x).unwrap();
            let norm = y.norm();
            if norm == 0.0 {
                break;
            }
            estimate = norm;
            x = y.scale(1.0 / norm);
        }
        assert!(
            (estimate - b_opt).abs() <= 1e-8 * b_opt.max(1.0),
            "power iteration {estimate} vs eigenvalue {b_opt}"
        );
    }
}

// ---------------------------------------------------------------------------
// frame-analysis invariants
// ---------------------------------------------------------------------------

/// Sandwich inequality with optimal constants on random unit vectors.
#[test]
fn sandwich_with_optimal_constants() {
    let mut rng = testkit::rng(47);
    for round in 0..10 {
        let n = 2 + (round % 8);
        let sys = testkit::random_frame_system(&mut rng, n, 1e4);
        let bounds = frame_bounds(&sys).unwrap();
        let handle = assemble_dense(&sys).unwrap();
        for _ in 0..100 {
            let f = testkit::random_unit_vector(&mut rng, n);
            let quad = handle.apply(&f).unwrap().dot(&f);
            assert!(quad >= bounds.a_opt - 1e-9);
            assert!(quad <= bounds.b_opt + 1e-9);
        }
    }
}

/// Both reconstruction formulas hit the stated tolerance on conditioned
/// systems.
#[test]
fn reconstruction_error_within_tolerance() {
    let mut rng = testkit::rng(53);
    for round in 0..20 {
        let n = 2 + (round % 8);
        let sys = testkit::random_frame_system(&mut rng, n, 1e4);
        let f = testkit::random_vector(&mut rng, n);
        let left = reconstruct_vector(&sys, &f, ReconstructionFormula::Left).unwrap();
        let right = reconstruct_vector(&sys, &f, ReconstructionFormula::Right).unwrap();
        assert!(left.relative_error <= 1e-8);
        assert!(right.relative_error <= 1e-8);
        let gap = left.reconstructed.sub(&right.reconstructed).unwrap().norm();
        assert!(gap <= 1e-10 * (1.0 + f.norm()));
    }
}

/// Injectivity verdict coincides with the frame verdict.
#[test]
fn injectivity_equals_frame_verdict() {
    let mut rng = testkit::rng(59);
    for round in 0..30 {
        let n = 2 + (round % 6);
        let sys = testkit::random_system(&mut rng, n, &testkit::SystemShape::default());
        let bounds = frame_bounds(&sys).unwrap();
        let diag = analysis_diagnostics(&sys).unwrap();
        assert_eq!(diag.injective, bounds.is_frame);
        assert!((diag.smallest_singular_value.powi(2) - bounds.a_opt).abs() <= 1e-9);
    }
}

// ---------------------------------------------------------------------------
// duality invariants
// ---------------------------------------------------------------------------

/// Canonical dual identities and mixed reconstruction on random frames.
#[test]
fn canonical_dual_identities_on_random_frames() {
    let mut rng = testkit::rng(61);
    for round in 0..10 {
        let n = 2 + (round % 8);
        let sys = testkit::random_frame_system(&mut rng, n, 1e4);
        let dual = canonical_dual(&sys).unwrap();
        let (product, mixed) = canonical_identity_residuals(&sys, &dual.system).unwrap();
        assert!(product <= 1e-8, "S_R S_dual residual {product}");
        assert!(mixed <= 1e-8, "T_R^* T_dual residual {mixed}");
        assert!(dual.check_bounds().unwrap().bracket_ok);

        for _ in 0..5 {
            let f = testkit::random_vector(&mut rng, n);
            let via_dual = synthesis(&sys, &analysis(&dual.system, &f).unwrap()).unwrap();
            let via_primal = synthesis(&dual.system, &analysis(&sys, &f).unwrap()).unwrap();
            assert!(via_dual.sub(&f).unwrap().norm() <= 1e-8 * (1.0 + f.norm()));
            assert!(via_primal.sub(&f).unwrap().norm() <= 1e-8 * (1.0 + f.norm()));
        }
    }
}

/// Canonical dual involution on tightened systems.
#[test]
fn canonical_dual_fixes_tightened_systems() {
    let mut rng = testkit::rng(67);
    for round in 0..5 {
        let n = 2 + (round % 6);
        let sys = testkit::random_frame_system(&mut rng, n, 1e4);
        let tight = parseval_tighten(&sys).unwrap();
        let dual = canonical_dual(&tight).unwrap();
        let s_tight = assemble_dense(&tight).unwrap().dense().cloned().unwrap();
        let s_dual = assemble_dense(&dual.system)
            .unwrap()
            .dense()
            .cloned()
            .unwrap();
        assert!(s_tight.max_abs_diff(&s_dual).unwrap() <= 1e-9);
    }
}

/// Tightened spectra collapse to one.
#[test]
fn tightened_spectrum_is_unit() {
    let mut rng = testkit::rng(71);
    for round in 0..10 {
        let n = 2 + (round % 8);
        let sys = testkit::random_frame_system(&mut rng, n, 1e4);
        let tight = parseval_tighten(&sys).unwrap();
        for l in frame_spectrum(&tight).unwrap() {
            assert!((l - 1.0).abs() <= 1e-8, "eigenvalue {l}");
        }
    }
}

/// Ambient transform sandwich on fusion-regime systems, where the predicted
/// operator inequalities are sound.
#[test]
fn ambient_transform_sandwich_on_fusion_regime() {
    let mut rng = testkit::rng(83);
    for round in 0..10 {
        let n = 2 + (round % 6);
        let sys = testkit::random_fusion_regime_system(&mut rng, n, 1e4);
        let q = testkit::random_invertible(&mut rng, n, 10.0);
        let report = relay_frames::duality::q_transform_ambient(&sys, &q).unwrap();
        assert!(
            report.sandwich_lower_residual.unwrap() >= -1e-8,
            "lower residual {:?}",
            report.sandwich_lower_residual
        );
        assert!(report.sandwich_upper_residual.unwrap() >= -1e-8);
        assert!(report.bracket_ok);
        assert!(report.pass);
    }
}

/// Per-block transforms that map every inner subspace onto itself keep the
/// computed bounds inside the predicted interval.
#[test]
fn local_transform_bracket_for_subspace_preserving_blocks() {
    let mut rng = testkit::rng(89);
    for round in 0..10 {
        let n = 2 + (round % 6);
        let sys = testkit::random_frame_system(&mut rng, n, 1e4);
        // One transform per local, preserving every inner subspace of that
        // local (built against the first; locals with several distinct inner
        // subspaces get a scalar, which preserves all of them).
        let q: Vec<_> = sys
            .locals
            .iter()
            .map(|l| {
                let all_same = l.inner.iter().all(|i| i.v == l.inner[0].v);
                if all_same {
                    testkit::v_preserving_invertible(&mut rng, &l.inner[0].v, 10.0)
                } else {
                    relay_frames::DenseMatrix::identity(l.local_dim).scale(rng.gen_range(0.5..2.0))
                }
            })
            .collect();
        let report = relay_frames::duality::q_transform_local(&sys, &q).unwrap();
        assert!(report.bracket_ok, "bracket failed: {report:?}");
        assert!(report.pass);
    }
}

/// The adapted-block construction really does fix the subspace.
#[test]
fn v_preserving_invertible_fixes_subspace() {
    let mut rng = testkit::rng(97);
    for _ in 0..20 {
        let n = 2 + (testkit::gaussian(&mut rng).abs() as usize) % 5;
        let k = 1 + (testkit::gaussian(&mut rng).abs() as usize) % n;
        let v = testkit::random_subspace(&mut rng, n, k);
        let q = testkit::v_preserving_invertible(&mut rng, &v, 10.0);
        let image = orthonormalize(&q.mul(v.basis()).unwrap(), 1e-10).unwrap();
        let diff = projector_matrix(&image)
            .max_abs_diff(&v.projector())
            .unwrap();
        assert!(diff <= 1e-10, "projector moved by {diff}");
    }
}

// ---------------------------------------------------------------------------
// perturbation invariants
// ---------------------------------------------------------------------------

/// Deviation operators are PSD and symmetric under swapping the systems;
/// whenever the single-constant hypothesis holds the predicted bracket does
/// too.
#[test]
fn perturbation_soundness_on_random_rotations() {
    let mut rng = testkit::rng(73);
    for round in 0..25 {
        let n = 2 + (round % 8);
        let sys = testkit::random_frame_system(&mut rng, n, 1e4);
        let perturbed = testkit::perturb_inner_subspaces(&mut rng, &sys, 0.08);

        let delta = deviation_operator(&sys, &perturbed).unwrap();
        let swapped = deviation_operator(&perturbed, &sys).unwrap();
        assert!(delta.max_abs_diff(&swapped).unwrap() <= 1e-12);
        assert!(sym_eig(&delta).unwrap().min() >= -1e-10);

        let report = check_perturbation_simple(&sys, &perturbed).unwrap();
        if report.hypothesis_holds {
            assert!(
                report.bracket_ok,
                "hypothesis held but bracket failed: {report:?}"
            );
        }
    }
}

/// With zero deviation the predicted interval collapses to the exact bounds.
#[test]
fn zero_deviation_predicts_exact_bounds() {
    let mut rng = testkit::rng(79);
    let sys = testkit::random_frame_system(&mut rng, 5, 1e4);
    let report = check_perturbation_simple(&sys, &sys).unwrap();
    let bounds = frame_bounds(&sys).unwrap();
    assert!(report.hypothesis_holds);
    assert!((report.predicted_lower - bounds.a_opt).abs() <= 1e-12 * (1.0 + bounds.a_opt));
    assert!((report.predicted_upper - bounds.b_opt).abs() <= 1e-12 * (1.0 + bounds.b_opt));
}
