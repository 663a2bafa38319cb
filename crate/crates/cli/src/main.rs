//! `ptorus`: command-line front end for the punctured-torus toolkit.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage or validation error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "PTORUS_WORKERS";

#[derive(Parser, Debug)]
#[command(
    name = "ptorus",
    version,
    about = "Punctured-torus Kleinian groups: Maskit slice, twist limits, geometric limits"
)]
struct Cli {
    /// TOML file whose keys override the subcommand's flags.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long, short = 'o', global = true)]
    out: Option<std::path::PathBuf>,
    /// Seed for every sampling step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    group: Group,
}

#[derive(Subcommand, Debug)]
enum Group {
    /// Maskit slice boundary and cusps.
    Maskit {
        #[command(subcommand)]
        action: MaskitCmd,
    },
    /// Twist-sequence verdicts and limits.
    Seq {
        #[command(subcommand)]
        action: SeqCmd,
    },
    /// Power limits and geometric convergence of cyclic groups.
    Geom {
        #[command(subcommand)]
        action: GeomCmd,
    },
    /// Self-bumping clouds M(p).
    Bump {
        #[command(subcommand)]
        action: BumpCmd,
    },
    /// Geometric limits of Bers slices.
    Bers {
        #[command(subcommand)]
        action: BersCmd,
    },
    /// Limit-set rendering.
    Render {
        #[command(subcommand)]
        action: RenderCmd,
    },
}

#[derive(Subcommand, Debug)]
enum MaskitCmd {
    /// Solve every cusp p/q in one period with q ≤ qmax.
    Trace(commands::TraceArgs),
    /// Solve a single cusp.
    Cusp(commands::CuspArgs),
}

#[derive(Subcommand, Debug)]
enum SeqCmd {
    /// Classify the sequences listed in a TOML spec file.
    Classify(commands::ClassifyArgs),
    /// Evaluate ξ = (p+1)μ − pν̄ + 2q.
    Limit(commands::LimitArgs),
}

#[derive(Subcommand, Debug)]
enum GeomCmd {
    /// Power-limit residuals and both Hausdorff conditions per m.
    Check(commands::GeomArgs),
}

#[derive(Subcommand, Debug)]
enum BumpCmd {
    /// Cloud of (p+1)μ − pν̄ over sampled μ, ν ∈ M.
    Cloud(commands::BumpArgs),
}

#[derive(Subcommand, Debug)]
enum BersCmd {
    /// Two-branch cloud M ⊔ (M* + 2ν̄).
    Cloud(commands::BersArgs),
}

#[derive(Subcommand, Debug)]
enum RenderCmd {
    /// Points of the limit set of ⟨T₂, U_μ⟩.
    Limitset(commands::RenderArgs),
}

/// Options shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Common {
    pub config: Option<std::path::PathBuf>,
    pub out: Option<std::path::PathBuf>,
    pub seed: u64,
}

#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 1,
        }
    }
}

pub fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

pub fn numerical(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Numerical(e.into())
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn init_workers() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(anyhow::anyhow!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(usage)
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_workers()?;
    let common = Common { config: cli.config, out: cli.out, seed: cli.seed };
    match cli.group {
        Group::Maskit { action: MaskitCmd::Trace(a) } => commands::maskit_trace(a, &common),
        Group::Maskit { action: MaskitCmd::Cusp(a) } => commands::maskit_cusp(a, &common),
        Group::Seq { action: SeqCmd::Classify(a) } => commands::seq_classify(a, &common),
        Group::Seq { action: SeqCmd::Limit(a) } => commands::seq_limit(a, &common),
        Group::Geom { action: GeomCmd::Check(a) } => commands::geom_check(a, &common),
        Group::Bump { action: BumpCmd::Cloud(a) } => commands::bump_cloud(a, &common),
        Group::Bers { action: BersCmd::Cloud(a) } => commands::bers_cloud(a, &common),
        Group::Render { action: RenderCmd::Limitset(a) } => commands::render_limitset(a, &common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(e) | Failure::Numerical(e)) = &f;
            eprintln!("ptorus: {e:#}");
            ExitCode::from(f.code())
        }
    }
}
