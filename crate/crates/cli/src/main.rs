//! `minsurf`: generate, solve, verify, deform and export minimal surfaces.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad input, 3 numerical failure.

mod commands;
mod config;
mod json;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_resolution, ReportFormat};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
    /// The command ran, but a judged check did not pass.
    CheckFailed,
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            CliError::CheckFailed => 1,
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "minsurf", version, about = "Minimal surface generation, Plateau solving and verification")]
struct Cli {
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tessellate a catalog surface or Weierstrass data file.
    Generate(GenerateArgs),
    /// Solve a Plateau problem for a closed curve.
    Solve(SolveArgs),
    /// Run identity checks on a mesh.
    Verify(VerifyArgs),
    /// Sweep the associate family of a Weierstrass surface.
    Deform(DeformArgs),
    /// Convert a mesh between OBJ and PLY.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Catalog name: catenoid, helicoid, enneper, plane_disk, holomorphic_curve(n).
    #[arg(required_unless_present = "data", conflicts_with = "data")]
    pub name: Option<String>,
    /// Weierstrass data JSON file.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Parameter grid resolution, `NUxNV`.
    #[arg(long, value_parser = parse_resolution)]
    pub res: Option<[usize; 2]>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem JSON file.
    pub problem: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// OBJ or PLY mesh.
    pub mesh: PathBuf,
    /// Check names, or `all`.
    #[arg(required = true)]
    pub checks: Vec<String>,
    /// `x,y,z[,w]`, `neck` (vertex nearest the vertex centroid) or `deepest`.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    /// `start:stop:count`, evenly spaced and inclusive.
    #[arg(long)]
    pub radii: Option<String>,
    /// Vector field components for the first-variation check, separated by `;`.
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub origin: Option<String>,
    #[arg(long)]
    pub pogorelov_radius: Option<f64>,
    #[arg(long)]
    pub eigenvalues: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
    /// Also write the JSON report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DeformArgs {
    #[arg(required_unless_present = "data", conflicts_with = "data")]
    pub name: Option<String>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Comma-separated angles; each may be an expression such as `pi/2`.
    #[arg(long, required = true, allow_hyphen_values = true)]
    pub theta: String,
    #[arg(long, value_parser = parse_resolution)]
    pub res: Option<[usize; 2]>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub mesh: PathBuf,
    /// Output file; the format follows the extension (.obj or .ply).
    #[arg(long)]
    pub to: PathBuf,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("MINSURF_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("MINSURF_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let name = match &cli.command {
        Command::Generate(_) => "generate",
        Command::Solve(_) => "solve",
        Command::Verify(_) => "verify",
        Command::Deform(_) => "deform",
        Command::Export(_) => "export",
    };
    let cfg = match &cli.config {
        Some(p) => config::RunConfig::load(p, name)?,
        None => config::RunConfig::default(),
    };
    match cli.command {
        Command::Generate(a) => commands::generate(a, &cfg),
        Command::Solve(a) => commands::solve(a, &cfg),
        Command::Verify(a) => commands::verify(a, &cfg),
        Command::Deform(a) => commands::deform(a, &cfg),
        Command::Export(a) => commands::export(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Input(m) => eprintln!("error: {m}"),
                CliError::Numerical(m) => eprintln!("numerical failure: {m}"),
                CliError::CheckFailed => eprintln!("one or more checks failed"),
            }
            ExitCode::from(e.code())
        }
    }
}
