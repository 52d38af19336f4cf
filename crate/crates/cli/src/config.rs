//! Scenario documents (JSON).

use std::path::{Path, PathBuf};

use radial_mfg_core::first_order::ZeroCurrentMode;
use radial_mfg_core::second_order::{BoundaryCondition, CouplingSpec};
use radial_mfg_core::{Domain, Grading, PotentialSpec, ProblemSpec, RadialGrid};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub problem: ProblemConfig,
    pub potential: PotentialSpec,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Values of `alpha` to solve; `problem.alpha` alone when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<f64>>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub current: f64,
    #[serde(default = "punctured")]
    pub domain: Domain,
}

fn punctured() -> Domain {
    Domain::PuncturedSpace
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    #[serde(default = "composite")]
    pub grading: Grading,
}

fn composite() -> Grading {
    Grading::Composite
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    #[default]
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SecondOrderMethod {
    /// Minimizer where a variational form exists, polished by Newton; Newton alone otherwise.
    #[default]
    Auto,
    Minimize,
    Newton,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "h_tol")]
    pub h: f64,
    #[serde(default = "inversion_tol")]
    pub inversion: f64,
    #[serde(default = "gradient_tol")]
    pub gradient: f64,
    #[serde(default = "residual_tol")]
    pub residual: f64,
}

fn h_tol() -> f64 {
    1e-8
}
fn inversion_tol() -> f64 {
    1e-13
}
fn gradient_tol() -> f64 {
    1e-10
}
fn residual_tol() -> f64 {
    1e-10
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            h: h_tol(),
            inversion: inversion_tol(),
            gradient: gradient_tol(),
            residual: residual_tol(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub order: Order,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "max_expansions")]
    pub max_expansions: usize,
    #[serde(default)]
    pub boundary: BoundaryCondition,
    #[serde(default)]
    pub method: SecondOrderMethod,
    /// Second order only; `g(m) = m^beta` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingSpec>,
    #[serde(default)]
    pub zero_current: ZeroCurrentMode,
    #[serde(default = "yes")]
    pub truncation_check: bool,
}

fn max_iterations() -> usize {
    200
}
fn max_expansions() -> usize {
    60
}
fn yes() -> bool {
    true
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            order: Order::First,
            tolerances: Tolerances::default(),
            max_iterations: max_iterations(),
            max_expansions: max_expansions(),
            boundary: BoundaryCondition::default(),
            method: SecondOrderMethod::default(),
            coupling: None,
            zero_current: ZeroCurrentMode::default(),
            truncation_check: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "out_dir")]
    pub directory: PathBuf,
    #[serde(default = "yes")]
    pub emit_csv: bool,
    #[serde(default = "yes")]
    pub emit_svg: bool,
    #[serde(default = "yes")]
    pub emit_report: bool,
    /// `H` range of the phi curve, sampled geometrically.
    #[serde(default = "phi_range")]
    pub phi_range: [f64; 2],
    #[serde(default = "phi_samples")]
    pub phi_samples: usize,
    /// Radial window of the plots; the whole grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_range: Option<[f64; 2]>,
}

fn out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn phi_range() -> [f64; 2] {
    [0.01, 200.0]
}
fn phi_samples() -> usize {
    50
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: out_dir(),
            emit_csv: true,
            emit_svg: true,
            emit_report: true,
            phi_range: phi_range(),
            phi_samples: phi_samples(),
            plot_range: None,
        }
    }
}

/// Unreadable, malformed or inconsistent scenario document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.sweep.clone().unwrap_or_else(|| vec![self.problem.alpha])
    }

    pub fn spec(&self, alpha: f64) -> Result<ProblemSpec, ConfigError> {
        let p = &self.problem;
        ProblemSpec::new(p.dim, alpha, p.beta, p.current, p.domain, self.potential.clone())
            .map_err(|e| invalid(e.to_string()))
    }

    pub fn grid(&self) -> Result<RadialGrid, ConfigError> {
        let g = &self.grid;
        RadialGrid::new(g.r_min, g.r_max, g.n, g.grading).map_err(|e| invalid(e.to_string()))
    }

    /// Everything a solve relies on, checked before any solve starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(invalid("name must be a non-empty file stem"));
        }
        if matches!(&self.sweep, Some(s) if s.is_empty()) {
            return Err(invalid("sweep must list at least one alpha"));
        }
        for a in self.alphas() {
            self.spec(a)?;
        }
        self.grid()?;
        let t = &self.solver.tolerances;
        if [t.h, t.inversion, t.gradient, t.residual].iter().any(|x| !(*x > 0.0)) {
            return Err(invalid("tolerances must be positive"));
        }
        if self.solver.order == Order::Second {
            if !(self.grid.r_min > 0.0) {
                return Err(invalid("second-order solves need r_min > 0"));
            }
            if self.grid.n < 3 {
                return Err(invalid("second-order solves need at least 3 nodes"));
            }
            if let Some(c) = &self.solver.coupling {
                c.validate().map_err(|e| invalid(e.to_string()))?;
            }
        }
        let [lo, hi] = self.output.phi_range;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(invalid("phi_range must satisfy 0 < lo < hi"));
        }
        if self.output.phi_samples < 2 {
            return Err(invalid("phi_samples must be at least 2"));
        }
        if let Some([lo, hi]) = self.output.plot_range {
            if !(hi > lo) {
                return Err(invalid("plot_range must be increasing"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "tiny",
        "problem": {"dim": 2, "alpha": 1.3, "beta": 1.0, "current": 1.0},
        "potential": {"kind": "gaussian_sine", "frequency": 2.0},
        "grid": {"r_min": 0.5, "r_max": 4.0, "n": 40}
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = ScenarioConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.solver.order, Order::First);
        assert_eq!(c.grid.grading, Grading::Composite);
        assert_eq!(c.alphas(), vec![1.3]);
        assert!(c.output.emit_svg);
    }

    #[test]
    fn round_trip() {
        let c = ScenarioConfig::from_json(MINIMAL).unwrap();
        assert_eq!(ScenarioConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = MINIMAL.replace(r#""n": 40"#, r#""n": 40, "nodes": 3"#);
        assert!(ScenarioConfig::from_json(&bad).is_err());
    }

    #[test]
    fn inconsistent_values_rejected() {
        for (from, to) in [
            (r#""dim": 2"#, r#""dim": 1"#),
            (r#""r_max": 4.0"#, r#""r_max": 0.1"#),
            (r#""name": "tiny""#, r#""name": """#),
        ] {
            assert!(ScenarioConfig::from_json(&MINIMAL.replace(from, to)).is_err(), "{to}");
        }
        let second = MINIMAL.replace(r#""r_min": 0.5"#, r#""r_min": 0.0"#).replace(
            r#""n": 40}"#,
            r#""n": 40}, "solver": {"order": "second"}"#,
        );
        assert!(ScenarioConfig::from_json(&second).is_err());
    }
}
