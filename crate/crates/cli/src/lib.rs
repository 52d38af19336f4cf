//! Config-driven runs of the radial solvers with CSV, SVG and report output.

pub mod config;
pub mod export;
pub mod format;
pub mod scenario;
pub mod svg;

use std::path::{Path, PathBuf};

pub use config::{ConfigError, ScenarioConfig};
pub use scenario::{solve_scenario, ScenarioRun, EXIT_CONFIG, EXIT_NONEXISTENCE, EXIT_NUMERICAL, EXIT_OK};

/// Tables and reports, then (optionally) the four plot panels.
/// Panels with nothing to draw are skipped.
pub fn write_artifacts(run: &ScenarioRun, dir: &Path, svg: bool) -> std::io::Result<Vec<PathBuf>> {
    let mut written = export::write_tables(run, dir)?;
    if svg && run.config.output.emit_svg {
        for kind in svg::PanelKind::ALL {
            let path = dir.join(format!("{}_{}.svg", run.config.name, kind.name()));
            match svg::emit_svg(run, kind, &path) {
                Ok(()) => written.push(path),
                Err(svg::SvgError::Empty(_)) => {}
                Err(svg::SvgError::Io(e)) => return Err(e),
            }
        }
    }
    Ok(written)
}

/// Solves a scenario and writes its artifacts; returns the run for inspection.
pub fn run_scenario(cfg: &ScenarioConfig, dir: &Path, svg: bool) -> Result<(ScenarioRun, Vec<PathBuf>), RunError> {
    let run = solve_scenario(cfg).map_err(RunError::Config)?;
    let files = write_artifacts(&run, dir, svg).map_err(RunError::Io)?;
    Ok((run, files))
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}
