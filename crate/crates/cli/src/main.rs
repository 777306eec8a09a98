use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use circpack::Geometry;
use circpack_cli::commands::{self, Options};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Inversive-distance circle packings on closed triangulated surfaces.
#[derive(Parser)]
#[command(name = "pack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate topology, weights and (if present) radii.
    Check(FileArgs),
    /// Cone angles and per-face data at the given radii.
    Angles(FileArgs),
    /// Solve for radii realizing `target_angles`.
    Solve(FileArgs),
    /// Recover radii from per-face edge lengths.
    Invert(FileArgs),
    /// Run numerical certificates.
    Verify(VerifyArgs),
    /// Develop the packing as an SVG net.
    Layout(LayoutArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryArg {
    Euclidean,
    Hyperbolic,
}

impl From<GeometryArg> for Geometry {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::Euclidean => Geometry::Euclidean,
            GeometryArg::Hyperbolic => Geometry::Hyperbolic,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Override the geometry tag of the input.
    #[arg(long, value_enum)]
    geometry: Option<GeometryArg>,
    /// Write the output document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FileArgs {
    /// Surface document (JSON, or OFF by extension).
    file: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Residual tolerance on max |a - a*| (solve).
    #[arg(long)]
    tol: Option<f64>,
    /// Newton iteration limit (solve).
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Certificate to run; repeatable. Defaults to the per-triangle suite.
    #[arg(long = "check", value_name = "NAME")]
    checks: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Samples per sampled certificate.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct LayoutArgs {
    file: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Face to develop from.
    #[arg(long, default_value_t = 0)]
    root: usize,
}

fn options(common: Common) -> Options {
    Options { geometry: common.geometry.map(Into::into), out: common.out, ..Options::default() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(a) => {
            let opts = Options { checks: a.checks, seed: a.seed, samples: a.samples, ..options(a.common) };
            commands::cmd_verify(&opts)
        }
        Command::Layout(a) => commands::cmd_layout(&a.file, &Options { root: a.root, ..options(a.common) }),
        Command::Check(a) => run_file(commands::cmd_check, a),
        Command::Angles(a) => run_file(commands::cmd_angles, a),
        Command::Solve(a) => run_file(commands::cmd_solve, a),
        Command::Invert(a) => run_file(commands::cmd_invert, a),
    };
    finish(outcome)
}

fn run_file(cmd: fn(&std::path::Path, &Options) -> commands::Outcome, a: FileArgs) -> commands::Outcome {
    let opts = Options { tol: a.tol, max_iter: a.max_iter, ..options(a.common) };
    cmd(&a.file, &opts)
}

fn finish(outcome: commands::Outcome) -> ExitCode {
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.status as u8)
}
