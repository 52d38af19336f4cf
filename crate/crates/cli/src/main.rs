use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use radial_mfg::config::ScenarioConfig;
use radial_mfg::format::{csv_number, exact};
use radial_mfg::scenario::first_order_options;
use radial_mfg::{run_scenario, RunError, EXIT_CONFIG, EXIT_NUMERICAL};
use radial_mfg_core::check_admissibility;
use radial_mfg_core::first_order::phi_curve;

#[derive(Parser)]
#[command(name = "radial-mfg", version, about = "Radial stationary mean-field games with congestion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write CSV, SVG and report artifacts.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output.directory`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_svg: bool,
        /// Override the number of grid nodes.
        #[arg(long)]
        grid_n: Option<usize>,
        /// Override the truncation radius.
        #[arg(long)]
        rmax: Option<f64>,
    },
    /// Print phi(H) at evenly spaced H as CSV.
    Phi {
        config: PathBuf,
        #[arg(long)]
        h_min: f64,
        #[arg(long)]
        h_max: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Print the admissibility report of every swept alpha as JSON.
    Check { config: PathBuf },
}

enum Failure {
    Config(String),
    Numerical(String),
    Other(anyhow::Error),
}

fn load(path: &PathBuf, grid_n: Option<usize>, rmax: Option<f64>) -> Result<ScenarioConfig, Failure> {
    let mut cfg = ScenarioConfig::load(path).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(n) = grid_n {
        cfg.grid.n = n;
    }
    if let Some(r) = rmax {
        cfg.grid.r_max = r;
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Run {
            config,
            out,
            no_svg,
            grid_n,
            rmax,
        } => {
            let cfg = load(&config, grid_n, rmax)?;
            let dir = out.unwrap_or_else(|| cfg.output.directory.clone());
            let (run, files) = run_scenario(&cfg, &dir, !no_svg).map_err(|e| match e {
                RunError::Config(e) => Failure::Config(e.to_string()),
                RunError::Io(e) => Failure::Other(anyhow::Error::new(e).context("writing artifacts")),
            })?;
            print!("{}", radial_mfg::export::summary(&run));
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(run.exit_code())
        }
        Command::Phi {
            config,
            h_min,
            h_max,
            samples,
        } => {
            let cfg = load(&config, None, None)?;
            if !(h_min > 0.0 && h_max > h_min) || samples < 2 {
                return Err(Failure::Config("need 0 < h-min < h-max and at least 2 samples".into()));
            }
            if cfg.problem.current == 0.0 {
                return Err(Failure::Config("phi is defined for nonzero current only".into()));
            }
            let grid = cfg.grid().map_err(|e| Failure::Config(e.to_string()))?;
            let hs: Vec<f64> = (0..samples)
                .map(|k| h_min + (h_max - h_min) * k as f64 / (samples - 1) as f64)
                .collect();
            println!("alpha,h,phi");
            for alpha in cfg.alphas() {
                let spec = cfg.spec(alpha).map_err(|e| Failure::Config(e.to_string()))?;
                let curve = phi_curve(&spec, &grid, &first_order_options(&cfg), &hs)
                    .map_err(|e| Failure::Numerical(e.to_string()))?;
                for (h, phi) in curve {
                    println!("{},{},{}", csv_number(alpha), csv_number(h), csv_number(phi));
                }
            }
            Ok(0)
        }
        Command::Check { config } => {
            let cfg = load(&config, None, None)?;
            let mut reports = serde_json::Map::new();
            for alpha in cfg.alphas() {
                let spec = cfg.spec(alpha).map_err(|e| Failure::Config(e.to_string()))?;
                let value = serde_json::to_value(check_admissibility(&spec))
                    .context("serializing report")
                    .map_err(Failure::Other)?;
                reports.insert(exact(alpha), value);
            }
            println!("{}", serde_json::to_string_pretty(&reports).expect("json"));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            EXIT_NUMERICAL
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    ExitCode::from(code as u8)
}
