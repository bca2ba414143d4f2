use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};
use sphere_lt::par;
use sphere_lt_cli::{run, Experiment, ExperimentConfig, Settings};

/// Laplace-transform / SRBF Galerkin experiments on the unit sphere.
#[derive(Parser)]
#[command(name = "sphere-lt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scalar inversion error |U_N(t) - u(t)| versus N.
    Scalar(Flags),
    /// Spherical-cap heat problem: errors and convergence rates versus K.
    Cap(Flags),
    /// Contour nodes z_j and derivatives z'_j for plotting.
    Contour(Flags),
}

#[derive(Args)]
struct Flags {
    /// Flat key = value file; flags given here override it.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// wendland2 or wendland3.
    #[arg(long)]
    kernel: Option<String>,
    /// Point-set sizes, comma separated.
    #[arg(long = "K", value_name = "LIST")]
    k: Option<String>,
    /// Quadrature orders: one for all K, or one per K.
    #[arg(long = "R", value_name = "LIST")]
    r_order: Option<String>,
    /// Contour sizes N (2N + 1 nodes), comma separated.
    #[arg(long = "N", value_name = "LIST")]
    n: Option<String>,
    /// Contour time scale.
    #[arg(long = "T")]
    t_scale: Option<String>,
    /// Evaluation times, comma separated.
    #[arg(long = "t", value_name = "LIST")]
    t: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long = "r")]
    r: Option<String>,
    #[arg(long)]
    omega: Option<String>,
    /// Sector half-angle of the operator.
    #[arg(long)]
    beta: Option<String>,
    /// Cap threshold: initial data is 1 where x3 > a.
    #[arg(long)]
    a: Option<String>,
    /// Output CSV path; stdout when absent or "-".
    #[arg(long)]
    out: Option<String>,
    /// Worker threads for assembly and node solves.
    #[arg(long)]
    workers: Option<String>,
    /// Run the full grid (K up to 1001, N in {10, 20, 30, 35}).
    #[arg(long)]
    full: bool,
    /// Emit floating-point values at full precision.
    #[arg(long)]
    precise: bool,
}

impl Flags {
    fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Settings::parse(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => Settings::default(),
        };
        let mut flags = Settings::default();
        let pairs = [
            ("kernel", &self.kernel),
            ("K", &self.k),
            ("R", &self.r_order),
            ("N", &self.n),
            ("T", &self.t_scale),
            ("t", &self.t),
            ("theta", &self.theta),
            ("delta", &self.delta),
            ("r", &self.r),
            ("omega", &self.omega),
            ("beta", &self.beta),
            ("a", &self.a),
            ("out", &self.out),
            ("workers", &self.workers),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                flags.set(key, v.clone());
            }
        }
        if self.full {
            flags.set("full", "true");
        }
        if self.precise {
            flags.set("precise", "true");
        }
        s.overlay(&flags);
        Ok(s)
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    let (experiment, flags) = match cli.command {
        Command::Scalar(f) => (Experiment::Scalar, f),
        Command::Cap(f) => (Experiment::Cap, f),
        Command::Contour(f) => (Experiment::Contour, f),
    };
    let config = ExperimentConfig::from_settings(experiment, &flags.settings()?)?;
    if let Some(n) = config.workers {
        if !par::configure_workers(n) {
            warn!(
                "could not resize the worker pool to {n}; using {}",
                par::current_workers()
            );
        }
    }
    info!("{experiment}: {} worker(s)", par::current_workers());

    let out: Box<dyn Write> = match &config.out {
        Some(path) => {
            Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?)
        }
        None => Box::new(io::stdout().lock()),
    };
    let summary = run(&config, BufWriter::new(out))?;
    if summary.failed_rows > 0 {
        error!(
            "{} of {} rows failed",
            summary.failed_rows,
            summary.rows + summary.failed_rows
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}
