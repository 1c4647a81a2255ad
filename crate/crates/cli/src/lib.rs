//! Command-line front end for `chiralkit`: scene ingestion, membership and
//! upgrade checks, sampling verifiers and epipolar-line plots.
//!
//! Exit codes: 0 positive answer, 1 negative answer, 2 malformed input,
//! 3 empty chiral domain, 4 undecided (baseline image tuple),
//! 5 numerical failure.

pub mod commands;
pub mod plot;
pub mod scene;

use std::ffi::OsString;
use std::path::PathBuf;

use chiralkit::Tolerances;
use clap::{Parser, Subcommand};
use thiserror::Error;

pub use scene::{Scene, SceneFile};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DOMAIN_EMPTY: i32 = 3;
pub const EXIT_UNDECIDED: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

/// Environment variable overriding the sign tolerance.
pub const TOL_ENV: &str = "CHIRALKIT_TOL";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed scene: {0}")]
    Scene(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("the chiral domain is empty")]
    DomainEmpty,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } | Self::Scene(_) | Self::Argument(_) => EXIT_INPUT,
            Self::DomainEmpty => EXIT_DOMAIN_EMPTY,
            Self::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

/// JSON document for stdout plus the exit code it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub json: serde_json::Value,
    pub code: i32,
}

impl Outcome {
    pub fn new(json: serde_json::Value, code: i32) -> Self {
        Self { json, code }
    }
}

#[derive(Debug, Parser)]
#[command(name = "chiralkit", version, about = "Chirality checks for camera arrangements")]
pub struct Cli {
    /// Print the parsed scene in canonical form and exit.
    #[arg(long, global = true)]
    pub dump_canonical: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Nonemptiness of the chiral domain, or membership of one point.
    Domain {
        scene: PathBuf,
        /// Homogeneous world point `x,y,z,w`.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Membership of an image tuple in the chiral joint image, or a plot
    /// along one epipolar line.
    Cji {
        scene: PathBuf,
        /// Image points `x,y,w`, one per camera.
        #[arg(allow_hyphen_values = true, conflicts_with = "plot")]
        tuple: Vec<String>,
        /// Fixed first image point, `p1=x,y,w`.
        #[arg(long, allow_hyphen_values = true)]
        plot: Option<String>,
        /// SVG output path.
        #[arg(long, requires = "plot")]
        out: Option<PathBuf>,
        /// CSV output path.
        #[arg(long, requires = "plot")]
        csv: Option<PathBuf>,
    },
    /// Whether the scene's reconstruction can be made chiral by a homography.
    Upgrade {
        scene: PathBuf,
        /// Restrict to the twisted-pair homographies of Euclidean cameras.
        #[arg(long)]
        euclidean: bool,
    },
    /// Cross-check the closed-form tests against sampling.
    Oracle {
        scene: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

impl Command {
    fn scene(&self) -> &PathBuf {
        match self {
            Self::Domain { scene, .. } | Self::Cji { scene, .. } | Self::Upgrade { scene, .. } | Self::Oracle { scene, .. } => {
                scene
            }
        }
    }
}

/// Everything a run writes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Reads the sign tolerance override; `None` means the default.
pub fn tolerances_from(value: Option<&str>) -> Result<Tolerances, CliError> {
    let Some(raw) = value else {
        return Ok(Tolerances::default());
    };
    let tol: f64 = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Argument(format!("{TOL_ENV}={raw:?} is not a number")))?;
    if !(tol.is_finite() && tol > 0.0 && tol < 1.0) {
        return Err(CliError::Argument(format!("{TOL_ENV}={raw:?} must lie in (0, 1)")));
    }
    Ok(Tolerances::with_sign(tol))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, tol_override: Option<&str>) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_YES };
            let text = e.render().to_string();
            return if e.use_stderr() {
                RunOutput {
                    stdout: String::new(),
                    stderr: text,
                    code,
                }
            } else {
                RunOutput {
                    stdout: text,
                    stderr: String::new(),
                    code,
                }
            };
        }
    };
    match execute(&cli, tol_override) {
        Ok(Outcome { json, code }) => RunOutput {
            stdout: to_json(&json),
            stderr: String::new(),
            code,
        },
        Err(e) => RunOutput {
            stdout: to_json(&serde_json::json!({ "error": e.to_string() })),
            stderr: format!("chiralkit: {e}\n"),
            code: e.exit_code(),
        },
    }
}

fn to_json(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

fn execute(cli: &Cli, tol_override: Option<&str>) -> Result<Outcome, CliError> {
    let tol = tolerances_from(tol_override)?;
    let scene = Scene::load(cli.command.scene(), tol)?;
    if cli.dump_canonical {
        let value: serde_json::Value = serde_json::from_str(&scene.canonical_json()).expect("canonical scene is JSON");
        return Ok(Outcome::new(value, EXIT_YES));
    }
    match &cli.command {
        Command::Domain { point, .. } => {
            let point = point.as_deref().map(commands::parse_point).transpose()?;
            Ok(commands::domain(&scene, point))
        }
        Command::Cji {
            tuple, plot, out, csv, ..
        } => match plot {
            Some(spec) => {
                let p1 = commands::parse_plot_spec(spec)?;
                commands::cji_plot(&scene, p1, out.as_deref(), csv.as_deref())
            }
            None => {
                let tuple = tuple.iter().map(|s| commands::parse_image_point(s)).collect::<Result<Vec<_>, _>>()?;
                commands::cji_tuple(&scene, &tuple)
            }
        },
        Command::Upgrade { euclidean, .. } => {
            if *euclidean {
                commands::upgrade_euclidean(&scene)
            } else {
                commands::upgrade(&scene)
            }
        }
        Command::Oracle { trials, seed, .. } => commands::oracle(&scene, *trials, *seed),
    }
}
