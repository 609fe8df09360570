//! Implementations of the CLI subcommands.
//!
//! Every command produces deterministic stdout text plus a [`ReportFile`];
//! load-time notices go to stderr. Exit codes: 0 when every verdict passes,
//! 2 on a mathematical failure (not a frame, hypothesis fails, bracket
//! violated), 1 for file, parse, validation or usage problems (mapped in
//! `main`).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use relay_frames::analysis::{
    cross_duality_check, frame_bounds_with, frame_spectrum, reconstruct_vector, FrameBoundsReport,
    ReconstructionFormula,
};
use relay_frames::duality::{
    canonical_dual, canonical_identity_residuals, global_dual, local_dual, parseval_tighten,
    q_transform_ambient, q_transform_local, DualKind, DualSystem,
};
use relay_frames::error::{FrameError, Result};
use relay_frames::format::{system_to_json, LoadedSystem, SystemTransforms};
use relay_frames::model::RelaySystem;
use relay_frames::perturbation::{
    check_perturbation_simple, check_perturbation_three_constant, PerturbationConstants,
    PerturbationReport,
};
use relay_frames::Vector;

use crate::report::ReportFile;

/// Reconstruction passes when the relative error clears this bound.
pub const RECONSTRUCTION_PASS_TOL: f64 = 1e-8;

/// Residual bound on the canonical-dual operator identities.
pub const CANONICAL_IDENTITY_TOL: f64 = 1e-8;

/// Outcome of a command: exit code, rendered stdout text, notices for
/// stderr, and the machine-readable report.
pub struct CommandResult {
    pub exit: u8,
    pub text: String,
    pub notices: Vec<String>,
    pub report: ReportFile,
}

/// Tolerances shared by all commands, with flag provenance.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub frame_tol: f64,
    pub frame_tol_from_flag: bool,
    pub parseval_tol: f64,
    pub parseval_tol_from_flag: bool,
}

fn read_input(path: &Path, report: &mut ReportFile) -> Result<LoadedSystem> {
    let bytes =
        std::fs::read(path).map_err(|e| FrameError::Parse(format!("{}: {e}", path.display())))?;
    report.add_input(path, &bytes);
    let text = String::from_utf8(bytes)
        .map_err(|e| FrameError::Parse(format!("{}: not UTF-8: {e}", path.display())))?;
    relay_frames::format::load_system_str(&text).map_err(|e| annotate_path(e, path))
}

fn annotate_path(err: FrameError, path: &Path) -> FrameError {
    match err {
        FrameError::Parse(msg) => FrameError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    }
}

fn record_tolerances(report: &mut ReportFile, tol: &Tolerances) {
    report.add_tolerance("frame_tol", tol.frame_tol, tol.frame_tol_from_flag);
    report.add_tolerance("parseval_tol", tol.parseval_tol, tol.parseval_tol_from_flag);
}

fn bounds_verdict(bounds: &FrameBoundsReport) -> &'static str {
    if bounds.is_parseval {
        "PARSEVAL"
    } else if bounds.is_frame {
        "FRAME"
    } else {
        "NOT A FRAME"
    }
}

fn write_system_summary(text: &mut String, path: &Path, sys: &RelaySystem) {
    let _ = writeln!(text, "system: {}", path.display());
    let _ = writeln!(
        text,
        "ambient dim: {}  locals: {}  inner atoms: {}",
        sys.ambient_dim,
        sys.n_locals(),
        sys.n_inner_atoms()
    );
}

fn bounds_results_json(bounds: &FrameBoundsReport) -> serde_json::Value {
    json!({
        "a_opt": bounds.a_opt,
        "b_opt": bounds.b_opt,
    })
}

fn record_bounds_verdicts(report: &mut ReportFile, bounds: &FrameBoundsReport) {
    report.add_verdict("is_frame", bounds.is_frame);
    report.add_verdict("is_bessel", bounds.is_bessel);
    report.add_verdict("is_parseval", bounds.is_parseval);
}

/// `check`: frame verdict with optimal bounds.
pub fn cmd_check(path: &Path, tol: Tolerances, args: &[String]) -> Result<CommandResult> {
    let mut report = ReportFile::new("check", args);
    record_tolerances(&mut report, &tol);
    let loaded = read_input(path, &mut report)?;
    let bounds = frame_bounds_with(&loaded.system, tol.frame_tol, tol.parseval_tol)?;

    let mut text = String::new();
    write_system_summary(&mut text, path, &loaded.system);
    let _ = writeln!(
        text,
        "A={:?} B={:?} {}",
        bounds.a_opt,
        bounds.b_opt,
        bounds_verdict(&bounds)
    );

    report.results = bounds_results_json(&bounds);
    record_bounds_verdicts(&mut report, &bounds);
    report.pass = bounds.is_frame;
    Ok(CommandResult {
        exit: if bounds.is_frame { 0 } else { 2 },
        text,
        notices: loaded.notices,
        report,
    })
}

/// `bounds`: frame verdict plus the full spectrum of the frame operator.
pub fn cmd_bounds(path: &Path, tol: Tolerances, args: &[String]) -> Result<CommandResult> {
    let mut report = ReportFile::new("bounds", args);
    record_tolerances(&mut report, &tol);
    let loaded = read_input(path, &mut report)?;
    let bounds = frame_bounds_with(&loaded.system, tol.frame_tol, tol.parseval_tol)?;
    let spectrum = frame_spectrum(&loaded.system)?;

    let mut text = String::new();
    write_system_summary(&mut text, path, &loaded.system);
    let _ = writeln!(
        text,
        "A={:?} B={:?} {}",
        bounds.a_opt,
        bounds.b_opt,
        bounds_verdict(&bounds)
    );
    let _ = writeln!(text, "spectrum: {spectrum:?}");

    report.results = json!({
        "a_opt": bounds.a_opt,
        "b_opt": bounds.b_opt,
        "spectrum": spectrum,
    });
    record_bounds_verdicts(&mut report, &bounds);
    report.pass = bounds.is_frame;
    Ok(CommandResult {
        exit: if bounds.is_frame { 0 } else { 2 },
        text,
        notices: loaded.notices,
        report,
    })
}

fn parse_vector(raw: &str) -> Result<Vector> {
    let entries = raw
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|e| FrameError::Parse(format!("vector entry '{part}': {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    Vector::new(entries)
}

/// `reconstruct`: round-trip a vector through analysis and the inverse frame
/// operator.
pub fn cmd_reconstruct(
    path: &Path,
    vector: &str,
    formula: ReconstructionFormula,
    tol: Tolerances,
    args: &[String],
) -> Result<CommandResult> {
    let mut report = ReportFile::new("reconstruct", args);
    record_tolerances(&mut report, &tol);
    report.add_tolerance("reconstruction_pass_tol", RECONSTRUCTION_PASS_TOL, false);
    let loaded = read_input(path, &mut report)?;
    let f = parse_vector(vector)?;
    let outcome = reconstruct_vector(&loaded.system, &f, formula)?;
    let pass = outcome.relative_error <= RECONSTRUCTION_PASS_TOL;

    let mut text = String::new();
    write_system_summary(&mut text, path, &loaded.system);
    let _ = writeln!(text, "formula: {}", formula.as_str());
    let _ = writeln!(text, "reconstructed: {:?}", outcome.reconstructed.to_vec());
    let _ = writeln!(text, "relative error: {:?}", outcome.relative_error);
    let _ = writeln!(
        text,
        "reconstruction: {}",
        if pass { "PASS" } else { "FAIL" }
    );

    report.results = json!({
        "formula": formula.as_str(),
        "input": f.to_vec(),
        "reconstructed": outcome.reconstructed.to_vec(),
        "relative_error": outcome.relative_error,
    });
    report.add_verdict("reconstruction_ok", pass);
    report.pass = pass;
    Ok(CommandResult {
        exit: if pass { 0 } else { 2 },
        text,
        notices: loaded.notices,
        report,
    })
}

fn build_dual(loaded: &LoadedSystem, kind: DualKind) -> Result<DualSystem> {
    let transforms = loaded.transforms.as_ref();
    match kind {
        DualKind::Canonical => canonical_dual(&loaded.system),
        DualKind::Global => {
            let t: &SystemTransforms = transforms.ok_or_else(|| {
                FrameError::MissingTransforms("global dual needs a transforms section".into())
            })?;
            global_dual(&loaded.system, &t.g_locals_for(&loaded.system)?)
        }
        DualKind::Local => {
            let t: &SystemTransforms = transforms.ok_or_else(|| {
                FrameError::MissingTransforms("local dual needs a transforms section".into())
            })?;
            local_dual(&loaded.system, &t.local_frames_for(&loaded.system)?)
        }
    }
}

/// `dual`: construct a dual system, verify its predicted bounds (and the
/// canonical identities), and write it as a system file.
pub fn cmd_dual(
    path: &Path,
    kind: DualKind,
    out: &Path,
    tol: Tolerances,
    args: &[String],
) -> Result<CommandResult> {
    let mut report = ReportFile::new("dual", args);
    record_tolerances(&mut report, &tol);
    let loaded = read_input(path, &mut report)?;
    let dual = build_dual(&loaded, kind)?;
    let check = dual.check_bounds()?;

    let mut text = String::new();
    write_system_summary(&mut text, path, &loaded.system);
    let _ = writeln!(text, "kind: {}", kind.as_str());
    let _ = writeln!(
        text,
        "predicted bounds: [{:?}, {:?}]",
        dual.predicted_lower, dual.predicted_upper
    );
    let _ = writeln!(
        text,
        "computed bounds: [{:?}, {:?}]",
        check.actual_lower, check.actual_upper
    );
    let _ = writeln!(
        text,
        "bracket: {}",
        if check.bracket_ok { "PASS" } else { "FAIL" }
    );

    let mut pass = check.bracket_ok;
    let mut results = json!({
        "kind": kind.as_str(),
        "predicted_lower": dual.predicted_lower,
        "predicted_upper": dual.predicted_upper,
        "actual_lower": check.actual_lower,
        "actual_upper": check.actual_upper,
        "out": out.display().to_string(),
    });
    if kind == DualKind::Canonical {
        let (product, mixed) = canonical_identity_residuals(&loaded.system, &dual.system)?;
        let identity_ok = product <= CANONICAL_IDENTITY_TOL && mixed <= CANONICAL_IDENTITY_TOL;
        let _ = writeln!(text, "S_R S_dual identity residual: {product:?}");
        let _ = writeln!(text, "mixed operator identity residual: {mixed:?}");
        let _ = writeln!(
            text,
            "identities: {}",
            if identity_ok { "PASS" } else { "FAIL" }
        );
        results["s_product_identity_residual"] = json!(product);
        results["mixed_identity_residual"] = json!(mixed);
        report.add_verdict("canonical_identities_ok", identity_ok);
        pass = pass && identity_ok;

        let cross = cross_duality_check(&loaded.system, &dual.system)?;
        results["cross_duality_deviation"] = json!(cross.deviation_from_identity);
        report.add_verdict("cross_duality_ok", cross.is_dual_pair);
        pass = pass && cross.is_dual_pair;
    }

    std::fs::write(out, system_to_json(&dual.system))
        .map_err(|e| FrameError::Parse(format!("writing {}: {e}", out.display())))?;
    let _ = writeln!(text, "dual written: {}", out.display());

    report.results = results;
    report.add_verdict("bracket_ok", check.bracket_ok);
    report.pass = pass;
    Ok(CommandResult {
        exit: if pass { 0 } else { 2 },
        text,
        notices: loaded.notices,
        report,
    })
}

/// `tighten`: write the Parseval tightening and report the spectral
/// deviation from one.
pub fn cmd_tighten(
    path: &Path,
    out: &Path,
    tol: Tolerances,
    args: &[String],
) -> Result<CommandResult> {
    let mut report = ReportFile::new("tighten", args);
    record_tolerances(&mut report, &tol);
    let loaded = read_input(path, &mut report)?;
    let tight = parseval_tighten(&loaded.system)?;
    let spectrum = frame_spectrum(&tight)?;
    let deviation = spectrum.iter().fold(0.0f64, |m, l| m.max((l - 1.0).abs()));
    let pass = deviation <= tol.parseval_tol;

    std::fs::write(out, system_to_json(&tight))
        .map_err(|e| FrameError::Parse(format!("writing {}: {e}", out.display())))?;

    let mut text = String::new();
    write_system_summary(&mut text, path, &loaded.system);
    let _ = writeln!(text, "max |eigenvalue - 1|: {deviation:?}");
    let _ = writeln!(text, "parseval: {}", if pass { "PASS" } else { "FAIL" });
    let _ = writeln!(text, "tightened written: {}", out.display());

    report.results = json!({
        "spectrum": spectrum,
        "max_deviation_from_one": deviation,
        "out": out.display().to_string(),
    });
    report.add_verdict("parseval_ok", pass);
    report.pass = pass;
    Ok(CommandResult {
        exit: if pass { 0 } else { 2 },
        text,
        notices: loaded.notices,
        report,
    })
}

/// Which transform family `transform` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformMode {
    Ambient,
    Local,
}

/// `transform`: apply the invertible transforms from the file's transforms
/// section and verify the sandwich/bracket predictions.
pub fn cmd_transform(
    path: &Path,
    mode: TransformMode,
    tol: Tolerances,
    args: &[String],
) -> Result<CommandResult> {
    let mut report = ReportFile::new("transform", args);
    record_tolerances(&mut report, &tol);
    let loaded = read_input(path, &mut report)?;
    let transforms = loaded.transforms.as_ref().ok_or_else(|| {
        FrameError::MissingTransforms("transform command needs a transforms section".into())
    })?;

    let outcome = match mode {
        TransformMode::Ambient => q_transform_ambient(&loaded.system, transforms.ambient_q()?)?,
        TransformMode::Local => {
            q_transform_local(&loaded.system, &transforms.q_locals_for(&loaded.system)?)?
        }
    };

    let mut text = String::new();
    write_system_summary(&mut text, path, &loaded.system);
    let _ = writeln!(
        text,
        "mode: {}",
        match mode {
            TransformMode::Ambient => "ambient",
            TransformMode::Local => "local",
        }
    );
    let mut results = json!({
        "predicted_lower": outcome.predicted_lower,
        "predicted_upper": outcome.predicted_upper,
        "actual_lower": outcome.actual_lower,
        "actual_upper": outcome.actual_upper,
    });
    if let (Some(lo), Some(hi)) = (
        outcome.sandwich_lower_residual,
        outcome.sandwich_upper_residual,
    ) {
        let _ = writeln!(text, "sandwich lower residual: {lo:?}");
        let _ = writeln!(text, "sandwich upper residual: {hi:?}");
        results["sandwich_lower_residual"] = json!(lo);
        results["sandwich_upper_residual"] = json!(hi);
        report.add_verdict(
            "sandwich_ok",
            lo >= -relay_frames::duality::SANDWICH_TOL
                && hi >= -relay_frames::duality::SANDWICH_TOL,
        );
    }
    let _ = writeln!(
        text,
        "predicted interval: [{:?}, {:?}]",
        outcome.predicted_lower, outcome.predicted_upper
    );
    let _ = writeln!(
        text,
        "computed bounds: [{:?}, {:?}]",
        outcome.actual_lower, outcome.actual_upper
    );
    let _ = writeln!(
        text,
        "bracket: {}",
        if outcome.bracket_ok { "PASS" } else { "FAIL" }
    );
    let _ = writeln!(
        text,
        "transform: {}",
        if outcome.pass { "PASS" } else { "FAIL" }
    );

    report.results = results;
    report.add_verdict("bracket_ok", outcome.bracket_ok);
    report.pass = outcome.pass;
    Ok(CommandResult {
        exit: if outcome.pass { 0 } else { 2 },
        text,
        notices: loaded.notices,
        report,
    })
}

/// `perturb`: compare two structure-compatible systems under the
/// perturbation theorems.
#[allow(clippy::too_many_arguments)]
pub fn cmd_perturb(
    path1: &Path,
    path2: &Path,
    constants: Option<(f64, f64, f64)>,
    samples: usize,
    seed: u64,
    tol: Tolerances,
    args: &[String],
) -> Result<CommandResult> {
    let mut report = ReportFile::new("perturb", args);
    record_tolerances(&mut report, &tol);
    let loaded1 = read_input(path1, &mut report)?;
    let loaded2 = read_input(path2, &mut report)?;

    let outcome: PerturbationReport = match constants {
        None => check_perturbation_simple(&loaded1.system, &loaded2.system)?,
        Some((c, d, eps)) => check_perturbation_three_constant(
            &loaded1.system,
            &loaded2.system,
            PerturbationConstants { c, d, eps },
            samples,
            seed,
        )?,
    };
    let pass = outcome.hypothesis_holds && outcome.bracket_ok;

    let mut text = String::new();
    let _ = writeln!(text, "system: {}", path1.display());
    let _ = writeln!(text, "perturbed: {}", path2.display());
    let _ = writeln!(text, "c_exact: {:?}", outcome.c_exact);
    let hypothesis = match (outcome.hypothesis_holds, outcome.hypothesis_sampled) {
        (true, false) => "HOLDS (exact)".to_string(),
        (true, true) => format!("HOLDS (sampled, {samples} samples)"),
        (false, _) => "FAILS (predicted bounds not applicable)".to_string(),
    };
    let _ = writeln!(text, "hypothesis: {hypothesis}");
    let _ = writeln!(
        text,
        "predicted interval: [{:?}, {:?}]",
        outcome.predicted_lower, outcome.predicted_upper
    );
    let _ = writeln!(
        text,
        "computed bounds: [{:?}, {:?}]",
        outcome.actual_lower, outcome.actual_upper
    );
    let _ = writeln!(
        text,
        "bracket: {}",
        if outcome.bracket_ok { "PASS" } else { "FAIL" }
    );
    let _ = writeln!(text, "perturbation: {}", if pass { "PASS" } else { "FAIL" });

    report.results = json!({
        "c_exact": outcome.c_exact,
        "hypothesis_sampled": outcome.hypothesis_sampled,
        "samples": samples,
        "seed": seed,
        "predicted_lower": outcome.predicted_lower,
        "predicted_upper": outcome.predicted_upper,
        "actual_lower": outcome.actual_lower,
        "actual_upper": outcome.actual_upper,
    });
    report.add_verdict("hypothesis_holds", outcome.hypothesis_holds);
    report.add_verdict("bracket_ok", outcome.bracket_ok);
    report.pass = pass;
    let mut notices = loaded1.notices;
    notices.extend(loaded2.notices);
    Ok(CommandResult {
        exit: if pass { 0 } else { 2 },
        text,
        notices,
        report,
    })
}

/// Write a report file if a path was requested.
pub fn maybe_write_report(report: &ReportFile, json_out: Option<&PathBuf>) -> Result<()> {
    if let Some(path) = json_out {
        std::fs::write(path, report.to_json())
            .map_err(|e| FrameError::Parse(format!("writing {}: {e}", path.display())))?;
    }
    Ok(())
}
