//! `lagshrink`: solve shrinking curves, build and verify product tori,
//! classify them, run curve flows and export meshes.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 bad arguments or
//! input files, 3 numerical failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lagshrink_core::{Error, Result};

use commands::{FlowArgs, TorusInput, Verdict};
use config::{Overrides, RunConfig, Settings};

#[derive(Parser)]
#[command(
    name = "lagshrink",
    version,
    about = "Shrinking curves and product Lagrangian tori in C^2"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output directory [default: .]
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Pass/fail tolerance of the verifying commands (shrinker residual for
    /// verify-torus, matrix identities for normalize-hyperplane)
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// JSON indentation; 0 writes compact JSON [default: 2]
    #[arg(long, global = true, value_name = "N")]
    json_indent: Option<usize>,
    /// Worker threads [default: all cores]
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// TOML run configuration; flags take precedence over it
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TorusArgs {
    /// Torus JSON
    #[arg(long, conflicts_with_all = ["curve1", "curve2"])]
    torus: Option<PathBuf>,
    /// First factor curve JSON
    #[arg(long, requires = "curve2")]
    curve1: Option<PathBuf>,
    /// Second factor curve JSON
    #[arg(long, requires = "curve1")]
    curve2: Option<PathBuf>,
    /// Grid size NS or NS,NT
    #[arg(long, value_delimiter = ',', conflicts_with = "spacing")]
    grid: Vec<usize>,
    /// Target arclength spacing of the grid instead of --grid
    #[arg(long)]
    spacing: Option<f64>,
}

impl TorusArgs {
    fn input(&self) -> TorusInput<'_> {
        TorusInput {
            torus: self.torus.as_deref(),
            curve1: self.curve1.as_deref(),
            curve2: self.curve2.as_deref(),
            grid: &self.grid,
            spacing: self.spacing,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the closed shrinker with rotation index p and q lobes;
    /// writes al_P_Q.json and al_P_Q.csv
    SolveCurve {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        q: u32,
        /// Samples per period
        #[arg(long)]
        n: Option<usize>,
    },
    /// The unit circle; writes circle.json and circle.csv
    MakeCircle {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Tabulate the half-period angle over the shooting range; writes
    /// sweep_deltatheta.csv
    SweepDeltatheta {
        #[arg(long, default_value_t = 0.05)]
        r0_min: f64,
        #[arg(long, default_value_t = 0.999)]
        r0_max: f64,
        #[arg(long, default_value_t = 64)]
        count: usize,
    },
    /// Product torus of two curve files; writes torus.json
    BuildTorus(TorusArgs),
    /// Full verification report; writes report.json, exits 1 if a check fails
    VerifyTorus {
        #[command(flatten)]
        torus: TorusArgs,
        /// Derivative scheme (analytic, finite-difference, fd-laplacian)
        #[arg(long)]
        scheme: Option<String>,
    },
    /// Clifford torus or immersed product; writes classification.json
    Classify(TorusArgs),
    /// Self-intersections of a curve (writes intersections.json), or finder
    /// agreement on seeded random polylines
    CheckEmbedded {
        #[arg(long, conflicts_with = "random")]
        curve: Option<PathBuf>,
        #[arg(long, default_value = "sweep")]
        finder: String,
        /// Number of random polylines to cross-check all finders on
        #[arg(long)]
        random: Option<usize>,
    },
    /// Curve-shortening or rescaled flow; writes flow_series.csv,
    /// flow_snapshot.json and, for the rescaled flow, flow_drift.csv
    Flow {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, default_value = "csf")]
        scheme: String,
        /// Final flow time
        #[arg(long = "T", alias = "t-end")]
        t_end: f64,
        #[arg(long)]
        dt: f64,
        /// Time between series rows [default: T/100]
        #[arg(long)]
        sample_interval: Option<f64>,
        /// Step as this fraction of (min segment)² instead of a fixed dt
        #[arg(long)]
        adaptive: Option<f64>,
    },
    /// Unitary map sending a hyperplane normal to (1, 0); writes hyperplane.json
    NormalizeHyperplane {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        nu: Vec<f64>,
    },
    /// OBJ mesh of a torus under an R^4 -> R^3 projection; writes torus.obj
    ExportMesh {
        #[command(flatten)]
        torus: TorusArgs,
        /// drop-x4 (lossy) or perspective
        #[arg(long, default_value = "drop-x4")]
        projection: String,
        /// Eye point of the perspective projection [default: 0,0,0,4]
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        viewpoint: Option<Vec<f64>>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SolveCurve { .. } => "solve-curve",
            Command::MakeCircle { .. } => "make-circle",
            Command::SweepDeltatheta { .. } => "sweep-deltatheta",
            Command::BuildTorus(_) => "build-torus",
            Command::VerifyTorus { .. } => "verify-torus",
            Command::Classify(_) => "classify",
            Command::CheckEmbedded { .. } => "check-embedded",
            Command::Flow { .. } => "flow",
            Command::NormalizeHyperplane { .. } => "normalize-hyperplane",
            Command::ExportMesh { .. } => "export-mesh",
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::FlowFailure { source, .. } => exit_code(source),
        e if e.is_input_error() => 2,
        Error::NotAShrinker { .. } | Error::EmbeddedNonCircle { .. } => 1,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<Verdict> {
    let file = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let flags = Overrides {
        out: cli.global.out,
        tol: cli.global.tol,
        json_indent: cli.global.json_indent,
        threads: cli.global.threads,
    };
    let s = Settings::resolve(cli.command.name(), file, flags)?;
    if let Some(n) = s.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InputDomain(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::SolveCurve { p, q, n } => commands::solve_curve(&s, *p, *q, *n),
        Command::MakeCircle { n } => commands::make_circle(&s, *n),
        Command::SweepDeltatheta { r0_min, r0_max, count } => commands::sweep(&s, *r0_min, *r0_max, *count),
        Command::BuildTorus(t) => commands::build(&s, &t.input()),
        Command::VerifyTorus { torus, scheme } => commands::verify(&s, &torus.input(), scheme.as_deref()),
        Command::Classify(t) => commands::classify(&s, &t.input()),
        Command::CheckEmbedded { curve, finder, random } => {
            commands::check_embedded(&s, curve.as_deref(), finder, *random)
        }
        Command::Flow {
            curve,
            scheme,
            t_end,
            dt,
            sample_interval,
            adaptive,
        } => commands::flow(
            &s,
            &FlowArgs {
                curve,
                scheme,
                t_end: *t_end,
                dt: *dt,
                sample_interval: *sample_interval,
                adaptive: *adaptive,
            },
        ),
        Command::NormalizeHyperplane { nu } => commands::normalize(&s, nu),
        Command::ExportMesh {
            torus,
            projection,
            viewpoint,
        } => commands::export_mesh(&s, &torus.input(), projection, viewpoint.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
