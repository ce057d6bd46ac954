use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use lzcool::config::{ExperimentConfig, ExperimentKind, OutputFormat};
use lzcool::experiments;

#[derive(Parser)]
#[command(
    name = "lzcool",
    version,
    about = "Dissipative Landau-Zener sweeps: ground-state population under engineered baths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bloch-vector time trace over one sweep (optionally several alpha_x)
    Trace(RunArgs),
    /// Final ground population across a velocity grid, per temperature
    Vsweep(RunArgs),
    /// Ground population over the (alpha_x, alpha_z) coupling plane
    Grid(RunArgs),
    /// Ground population versus alpha_z with the transverse bath off
    Azcurve(RunArgs),
    /// Scan-and-refine search for an optimal velocity or coupling
    Optimize(RunArgs),
}

/// Every flag mirrors the config-file key of the same name.
#[derive(Args)]
struct RunArgs {
    /// Config file of `key = value` lines; its `experiment` key must match
    /// the subcommand
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sweep velocity in units of the squared gap
    #[arg(long)]
    velocity: Option<f64>,
    /// Velocity grid: `lo:hi:count` (log-spaced) or a comma list
    #[arg(long)]
    velocity_grid: Option<String>,
    /// Bath temperature in units of the gap
    #[arg(long)]
    temperature: Option<f64>,
    /// Temperatures for the sweep, comma-separated
    #[arg(long)]
    temperature_list: Option<String>,
    /// Transverse bath coupling
    #[arg(long)]
    alpha_x: Option<f64>,
    /// Longitudinal bath coupling
    #[arg(long)]
    alpha_z: Option<f64>,
    /// Transverse coupling grid: `lo:hi:count` or comma list
    #[arg(long)]
    alpha_x_grid: Option<String>,
    /// Longitudinal coupling grid: `lo:hi:count` or comma list
    #[arg(long)]
    alpha_z_grid: Option<String>,
    /// Transverse couplings overlaid in a trace, comma-separated
    #[arg(long)]
    alpha_x_list: Option<String>,
    /// Spectral cutoff for both baths
    #[arg(long)]
    cutoff: Option<f64>,
    /// Drive offset at the crossing
    #[arg(long)]
    offset: Option<f64>,
    /// Half-window drive extent v*t0
    #[arg(long)]
    span_product: Option<f64>,
    /// Integrator relative tolerance
    #[arg(long)]
    rtol: Option<f64>,
    /// Integrator absolute tolerance
    #[arg(long)]
    atol: Option<f64>,
    /// Integrator step cap: `auto` or a time
    #[arg(long)]
    max_step: Option<String>,
    /// Output samples per trajectory
    #[arg(long)]
    samples: Option<usize>,
    /// Velocity-sweep columns: z | xz | both
    #[arg(long)]
    mode: Option<String>,
    /// Optimize target: velocity | alpha-z
    #[arg(long)]
    target: Option<String>,
    /// Optimize scan interval `lo:hi`
    #[arg(long)]
    scan_range: Option<String>,
    /// Optimize scan grid size
    #[arg(long)]
    scan_points: Option<usize>,
    /// Output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv | svg | both
    #[arg(long)]
    format: Option<String>,
    /// Worker threads for grid points (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
}

fn build_config(kind: ExperimentKind, args: &RunArgs) -> lzcool::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_file(path)?;
            cfg.ensure_kind(kind)?;
            cfg
        }
        None => ExperimentConfig::default_for(kind),
    };
    if let Some(v) = args.velocity {
        cfg.velocity = v;
    }
    if let Some(v) = args.temperature {
        cfg.temperature = v;
    }
    if let Some(v) = args.alpha_x {
        cfg.alpha_x = v;
    }
    if let Some(v) = args.alpha_z {
        cfg.alpha_z = v;
    }
    if let Some(v) = args.cutoff {
        cfg.cutoff = v;
    }
    if let Some(v) = args.offset {
        cfg.offset = v;
    }
    if let Some(v) = args.span_product {
        cfg.span_product = v;
    }
    if let Some(v) = args.rtol {
        cfg.rtol = v;
    }
    if let Some(v) = args.atol {
        cfg.atol = v;
    }
    if let Some(v) = args.samples {
        cfg.samples = v;
    }
    if let Some(v) = args.scan_points {
        cfg.scan_points = v;
    }
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    if let Some(v) = &args.out {
        cfg.out = v.clone();
    }
    for (key, value) in [
        ("velocity_grid", &args.velocity_grid),
        ("temperature_list", &args.temperature_list),
        ("alpha_x_grid", &args.alpha_x_grid),
        ("alpha_z_grid", &args.alpha_z_grid),
        ("alpha_x_list", &args.alpha_x_list),
        ("max_step", &args.max_step),
        ("mode", &args.mode),
        ("target", &args.target),
        ("scan_range", &args.scan_range),
        ("format", &args.format),
    ] {
        if let Some(v) = value {
            cfg.apply_kv(key, v)?;
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> lzcool::Result<()> {
    let (kind, args) = match &cli.command {
        Command::Trace(a) => (ExperimentKind::Trace, a),
        Command::Vsweep(a) => (ExperimentKind::VelocitySweep, a),
        Command::Grid(a) => (ExperimentKind::CouplingGrid, a),
        Command::Azcurve(a) => (ExperimentKind::AlphaZCurve, a),
        Command::Optimize(a) => (ExperimentKind::Optimize, a),
    };
    let cfg = build_config(kind, args)?;
    let out = experiments::run_and_emit(&cfg)?;
    for line in &out.summary {
        println!("{line}");
    }
    match cfg.format {
        OutputFormat::Both => println!(
            "wrote {} and {}",
            cfg.out.display(),
            cfg.out.with_extension("svg").display()
        ),
        _ => println!("wrote {}", cfg.out.display()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are not failures; anything else is a
            // validation problem and must exit 1.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
