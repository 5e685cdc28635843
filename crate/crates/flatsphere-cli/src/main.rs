//! flatsphere: build and check uniformly bounded orthonormal systems of
//! spherical polynomials.
//!
//! Exit codes: 0 success, 2 configuration/IO/usage, 3 verification failure,
//! 4 frame (Riesz) failure.

mod commands;
mod report;

use clap::{ArgGroup, Parser, Subcommand};
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "flatsphere", version, about = "Uniformly bounded orthonormal systems on the sphere")]
struct Cli {
    /// Suppress normal output (files are still written).
    #[arg(long, global = true)]
    quiet: bool,
    /// Print machine-readable JSON instead of prose.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

pub struct GlobalOpts {
    pub quiet: bool,
    pub json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Select well-separated interpolation nodes on the sphere.
    #[command(group(ArgGroup::new("shrink").required(true).args(["epsilon", "fraction"])))]
    Points {
        /// Sphere dimension m (the sphere lives in R^{m+1}).
        #[arg(long, default_value_t = 2)]
        m: u32,
        /// Degree cutoff L of the polynomial space.
        #[arg(short = 'L', long = "degree")]
        degree_cutoff: u32,
        /// Taper width; nodes are selected at degree floor((1-2*eps)L).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Target dimension fraction n/k_L; converted to an epsilon.
        #[arg(long)]
        fraction: Option<f64>,
        /// Candidate mesh resolution (radians). Default 1/(4*degree).
        #[arg(long = "mesh-res")]
        mesh_res: Option<f64>,
        /// Seed for mesh rotation; omit for the deterministic axis-aligned mesh.
        #[arg(long)]
        seed: Option<u64>,
        /// Output points file.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Orthonormalize kernel translates at stored nodes into a flat system.
    Build {
        /// Points file produced by `points`.
        #[arg(long)]
        points: PathBuf,
        /// Degree cutoff L; defaults to the smallest cutoff consistent with
        /// the stored node degree and epsilon.
        #[arg(short = 'L', long = "degree")]
        degree_cutoff: Option<u32>,
        /// Orthonormality residual the build must reach.
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        /// Output system file.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Re-derive the acceptance checks for a stored system.
    Verify {
        /// System file produced by `build`.
        #[arg(long)]
        system: PathBuf,
        /// Sup-norm probe mesh resolution. Default 1/(4L).
        #[arg(long = "probe-res")]
        probe_res: Option<f64>,
        /// Closed-form orthonormality threshold.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        /// Optional JSON report path.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Evaluate system functions at probe points, CSV to --out.
    #[command(group(ArgGroup::new("probes").required(true).args(["points", "mesh_res"])))]
    Eval {
        /// System file produced by `build`.
        #[arg(long)]
        system: PathBuf,
        /// Points file with probe locations.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Generate probes from a mesh at this resolution instead.
        #[arg(long = "mesh-res")]
        mesh_res: Option<f64>,
        /// Seed for mesh rotation.
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluate a single function index instead of all of them.
        #[arg(long)]
        index: Option<usize>,
        /// Output CSV file.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Sweep cutoffs and tapers, one CSV row of invariants per cell.
    Table {
        /// Comma-separated degree cutoffs.
        #[arg(short = 'L', long = "degree", value_delimiter = ',', required = true)]
        degrees: Vec<u32>,
        /// Comma-separated taper widths.
        #[arg(long = "epsilon", value_delimiter = ',')]
        epsilons: Vec<f64>,
        /// Comma-separated dimension fractions (converted to tapers).
        #[arg(long = "fraction", value_delimiter = ',')]
        fractions: Vec<f64>,
        /// Candidate mesh resolution override.
        #[arg(long = "mesh-res")]
        mesh_res: Option<f64>,
        /// Sup-norm probe resolution override.
        #[arg(long = "probe-res")]
        probe_res: Option<f64>,
        /// Seed for mesh rotation.
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV file.
        #[arg(long, short)]
        out: PathBuf,
    },
}

/// Command outcome, carrying the process exit code.
pub enum Failure {
    Config(String),
    Verification(String),
    Riesz(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Verification(_) => 3,
            Failure::Riesz(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "{msg}"),
            Failure::Verification(msg) => write!(f, "verification failed: {msg}"),
            Failure::Riesz(msg) => write!(f, "frame bound failed: {msg}"),
        }
    }
}

impl From<flatsphere::Error> for Failure {
    fn from(e: flatsphere::Error) -> Self {
        match e {
            flatsphere::Error::NotPositiveDefinite { .. } | flatsphere::Error::RankDeficient { .. } => {
                Failure::Riesz(e.to_string())
            }
            flatsphere::Error::VerificationFailure { .. } => Failure::Verification(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = GlobalOpts { quiet: cli.quiet, json: cli.json };

    let result = match cli.command {
        Command::Points { m, degree_cutoff, epsilon, fraction, mesh_res, seed, out } => {
            commands::cmd_points(&opts, m, degree_cutoff, epsilon, fraction, mesh_res, seed, out)
        }
        Command::Build { points, degree_cutoff, tolerance, out } => {
            commands::cmd_build(&opts, points, degree_cutoff, tolerance, out)
        }
        Command::Verify { system, probe_res, tolerance, out } => {
            commands::cmd_verify(&opts, system, probe_res, tolerance, out)
        }
        Command::Eval { system, points, mesh_res, seed, index, out } => {
            commands::cmd_eval(&opts, system, points, mesh_res, seed, index, out)
        }
        Command::Table { degrees, epsilons, fractions, mesh_res, probe_res, seed, out } => {
            commands::cmd_table(&opts, degrees, epsilons, fractions, mesh_res, probe_res, seed, out)
        }
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
