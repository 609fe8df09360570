//! `relay-frames`: load relay fusion frame system files, compute frame
//! bounds and reconstructions, build duals and Parseval tightenings, and
//! verify transform and perturbation predictions.
//!
//! Exit codes: 0 when every verdict passes, 1 on usage/parse/validation
//! errors, 2 on mathematical failures (not a frame, hypothesis fails,
//! bracket violated).

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relay_frames::analysis::{ReconstructionFormula, FRAME_TOL_DEFAULT, PARSEVAL_TOL_DEFAULT};
use relay_frames::duality::DualKind;
use relay_frames::error::FrameError;
use relay_frames::perturbation::DEFAULT_SAMPLE_SEED;

use commands::{CommandResult, Tolerances, TransformMode};

#[derive(Parser)]
#[command(
    name = "relay-frames",
    version,
    about = "Numerical workbench for discretized relay fusion frame systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct TolArgs {
    /// Frame verdict tolerance on the smallest frame-operator eigenvalue.
    #[arg(long = "tol-frame")]
    tol_frame: Option<f64>,
    /// Parseval verdict tolerance on |bound - 1|.
    #[arg(long = "tol-parseval")]
    tol_parseval: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Tolerances {
        Tolerances {
            frame_tol: self.tol_frame.unwrap_or(FRAME_TOL_DEFAULT),
            frame_tol_from_flag: self.tol_frame.is_some(),
            parseval_tol: self.tol_parseval.unwrap_or(PARSEVAL_TOL_DEFAULT),
            parseval_tol_from_flag: self.tol_parseval.is_some(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulaArg {
    Left,
    Right,
}

impl From<FormulaArg> for ReconstructionFormula {
    fn from(f: FormulaArg) -> Self {
        match f {
            FormulaArg::Left => ReconstructionFormula::Left,
            FormulaArg::Right => ReconstructionFormula::Right,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Canonical,
    Global,
    Local,
}

impl From<KindArg> for DualKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Canonical => DualKind::Canonical,
            KindArg::Global => DualKind::Global,
            KindArg::Local => DualKind::Local,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Frame verdict with optimal bounds.
    Check {
        path: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
        /// Write the machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Frame verdict plus the full frame-operator spectrum.
    Bounds {
        path: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Reconstruct a vector through the inverse frame operator.
    Reconstruct {
        path: PathBuf,
        /// Comma-separated decimal entries, e.g. "3,4".
        #[arg(long)]
        vector: String,
        /// Where the inverse is applied: left = after the expansion,
        /// right = before it.
        #[arg(long, value_enum, default_value = "left")]
        formula: FormulaArg,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Construct a dual system and verify its predicted bounds.
    Dual {
        path: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Output path for the dual system file.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Write the Parseval tightening of a frame system.
    Tighten {
        path: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Verify the invertible-transform sandwich and bracket predictions.
    Transform {
        path: PathBuf,
        /// Use the ambient transform Q from the transforms section.
        #[arg(long = "ambient-q", conflicts_with = "local_q")]
        ambient_q: bool,
        /// Use the per-local transforms Q_locals from the transforms section.
        #[arg(long = "local-q")]
        local_q: bool,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compare two structure-compatible systems under the perturbation
    /// theorems.
    Perturb {
        path1: PathBuf,
        path2: PathBuf,
        /// Three-constant hypothesis (C, D, EPS); omitted runs the exact
        /// single-constant check.
        #[arg(long, num_args = 3, value_names = ["C", "D", "EPS"])]
        constants: Option<Vec<f64>>,
        /// Random unit vectors sampled for the three-constant hypothesis.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Seed for the sampled hypothesis check.
        #[arg(long, default_value_t = DEFAULT_SAMPLE_SEED)]
        seed: u64,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn exit_code_for(err: &FrameError) -> u8 {
    match err {
        // Mathematical failure: the input is valid but is not a frame.
        FrameError::NotAFrame(_) => 2,
        // Everything else is a usage, file or validation problem.
        _ => 1,
    }
}

fn run(cli: Cli, raw_args: &[String]) -> Result<(CommandResult, Option<PathBuf>), FrameError> {
    match cli.command {
        Command::Check { path, tol, json } => {
            Ok((commands::cmd_check(&path, tol.resolve(), raw_args)?, json))
        }
        Command::Bounds { path, tol, json } => {
            Ok((commands::cmd_bounds(&path, tol.resolve(), raw_args)?, json))
        }
        Command::Reconstruct {
            path,
            vector,
            formula,
            tol,
            json,
        } => Ok((
            commands::cmd_reconstruct(&path, &vector, formula.into(), tol.resolve(), raw_args)?,
            json,
        )),
        Command::Dual {
            path,
            kind,
            out,
            tol,
            json,
        } => Ok((
            commands::cmd_dual(&path, kind.into(), &out, tol.resolve(), raw_args)?,
            json,
        )),
        Command::Tighten {
            path,
            out,
            tol,
            json,
        } => Ok((
            commands::cmd_tighten(&path, &out, tol.resolve(), raw_args)?,
            json,
        )),
        Command::Transform {
            path,
            ambient_q,
            local_q,
            tol,
            json,
        } => {
            let mode = match (ambient_q, local_q) {
                (true, false) => TransformMode::Ambient,
                (false, true) => TransformMode::Local,
                _ => {
                    return Err(FrameError::Parse(
                        "exactly one of --ambient-q or --local-q is required".into(),
                    ))
                }
            };
            Ok((
                commands::cmd_transform(&path, mode, tol.resolve(), raw_args)?,
                json,
            ))
        }
        Command::Perturb {
            path1,
            path2,
            constants,
            samples,
            seed,
            tol,
            json,
        } => {
            let parsed = match constants {
                None => None,
                Some(v) if v.len() == 3 => Some((v[0], v[1], v[2])),
                Some(_) => {
                    return Err(FrameError::Parse(
                        "--constants takes exactly three values: C D EPS".into(),
                    ))
                }
            };
            Ok((
                commands::cmd_perturb(
                    &path1,
                    &path2,
                    parsed,
                    samples,
                    seed,
                    tol.resolve(),
                    raw_args,
                )?,
                json,
            ))
        }
    }
}

fn main() -> ExitCode {
    let raw_args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli, &raw_args) {
        Ok((result, json_out)) => {
            for notice in &result.notices {
                eprintln!("notice: {notice}");
            }
            print!("{}", result.text);
            if let Err(e) = commands::maybe_write_report(&result.report, json_out.as_ref()) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(result.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
