use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use radialscope::config::{EnergyConfig, Number};
use radialscope::{emit, run_command, to_canonical_json, AnalysisConfig, Command, Format, RunError};

#[derive(Parser)]
#[command(name = "radialscope", version, about = "Radial-point analysis for order-zero potentials")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Full pipeline: radial points, resonances, normal forms, templates, flow and checks.
    Analyze(Common),
    /// Effectively resonant energies and Hessian thresholds over the configured interval.
    ScanEnergies(Common),
    /// Radial points, resonances and normal forms.
    NormalForm(Common),
    /// Flow-out trajectories between radial points (explicit mode).
    Flow(Common),
    /// Flow-out graph and Morse sequence (explicit mode).
    Morse(Common),
    /// Exponent data and expansion templates at outgoing radial points.
    Expansion(Common),
    /// Stationary-phase check of the long-time prefactor.
    StationaryPhase(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured energy with a single value (`p/q`, decimal or integer).
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    max_degree: Option<u32>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json,csv")]
    format: Vec<Format>,
}

impl Sub {
    fn split(self) -> (Command, Common) {
        match self {
            Sub::Analyze(c) => (Command::Analyze, c),
            Sub::ScanEnergies(c) => (Command::ScanEnergies, c),
            Sub::NormalForm(c) => (Command::NormalForm, c),
            Sub::Flow(c) => (Command::Flow, c),
            Sub::Morse(c) => (Command::Morse, c),
            Sub::Expansion(c) => (Command::Expansion, c),
            Sub::StationaryPhase(c) => (Command::StationaryPhase, c),
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("RADIALSCOPE_THREADS") {
        let n: usize = v.parse().with_context(|| format!("RADIALSCOPE_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("building the thread pool")?;
    }
    Ok(())
}

fn load(common: &Common) -> Result<AnalysisConfig, RunError> {
    let mut cfg = AnalysisConfig::load(&common.config)?;
    if let Some(s) = &common.sigma {
        cfg.energy = EnergyConfig::Single { sigma: Number::Text(s.clone()) };
    }
    if let Some(d) = common.max_degree {
        cfg.options.max_degree = d;
    }
    if let Some(t) = common.tol {
        cfg.options.tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cmd: Command, common: &Common) -> Result<i32, RunError> {
    let cfg = load(common)?;
    let report = run_command(&cfg, cmd)?;
    for path in emit(&report, &common.format, &common.out)? {
        println!("{}", path.display());
    }
    for f in report.failures() {
        eprintln!("stage {} [{}] failed: {}", f.stage, f.scope, f.message.as_deref().unwrap_or(""));
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let (cmd, common) = cli.command.split();
    match run(cmd, &common) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            if let RunError::Forbidden { evidence, .. } = &e {
                if !evidence.is_empty() {
                    eprint!("{}", to_canonical_json(evidence));
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
