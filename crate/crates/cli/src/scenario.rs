//! Solving a scenario: one independent solve per swept `alpha`.

use radial_mfg_core::first_order::{phi_curve, FirstOrderOptions, Nonexistence, RadialSolution};
use radial_mfg_core::second_order::{
    minimize_constrained, reconstruct_u, residual_vector, solve_bvp_newton, MinimizeOptions,
    NewtonOptions, SecondOrderProblem, SecondOrderState,
};
use radial_mfg_core::{solve_first_order, unit_sphere_area, Error, FirstOrderOutcome, RadialGrid};
use rayon::prelude::*;

use crate::config::{ConfigError, Order, ScenarioConfig, SecondOrderMethod};

/// Reconstructed second-order solution with its per-node residual.
#[derive(Clone, Debug)]
pub struct SecondOrderSolution {
    pub state: SecondOrderState,
    pub m: Vec<f64>,
    pub u: Vec<f64>,
    pub residual: Vec<f64>,
    pub mass_error: f64,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    First(RadialSolution),
    Second(SecondOrderSolution),
    NoSolution(Nonexistence),
    Failed(String),
}

#[derive(Clone, Debug)]
pub struct AlphaRun {
    pub alpha: f64,
    pub outcome: Outcome,
    /// `(H, phi(H))` samples; empty for second-order runs.
    pub phi: Vec<(f64, f64)>,
}

impl AlphaRun {
    pub fn h(&self) -> Option<f64> {
        match &self.outcome {
            Outcome::First(s) => Some(s.h),
            Outcome::Second(s) => Some(s.state.h),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub grid: RadialGrid,
    pub runs: Vec<AlphaRun>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONEXISTENCE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

impl ScenarioRun {
    /// Numerical failure outranks nonexistence.
    pub fn exit_code(&self) -> i32 {
        if self.runs.iter().any(|r| matches!(r.outcome, Outcome::Failed(_))) {
            EXIT_NUMERICAL
        } else if self.runs.iter().any(|r| matches!(r.outcome, Outcome::NoSolution(_))) {
            EXIT_NONEXISTENCE
        } else {
            EXIT_OK
        }
    }
}

pub fn first_order_options(cfg: &ScenarioConfig) -> FirstOrderOptions {
    let s = &cfg.solver;
    FirstOrderOptions {
        invert_tol: s.tolerances.inversion,
        h_tol: s.tolerances.h,
        max_expansions: s.max_expansions,
        truncation_check: s.truncation_check,
        zero_current: s.zero_current,
        ..Default::default()
    }
}

/// Geometric samples spanning `output.phi_range`.
pub fn phi_samples(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| lo * (hi / lo).powf(i as f64 / (k - 1) as f64))
        .collect()
}

fn solve_first(cfg: &ScenarioConfig, grid: &RadialGrid, alpha: f64) -> Result<AlphaRun, ConfigError> {
    let spec = cfg.spec(alpha)?;
    let opts = first_order_options(cfg);
    let (outcome, phi) = match solve_first_order(&spec, grid, &opts) {
        Ok(FirstOrderOutcome::Solved(sol)) => {
            let [lo, hi] = cfg.output.phi_range;
            let hs = phi_samples(lo, hi, cfg.output.phi_samples);
            let phi = if spec.current != 0.0 {
                phi_curve(&spec, grid, &opts, &hs).unwrap_or_default()
            } else {
                Vec::new()
            };
            (Outcome::First(sol), phi)
        }
        Ok(FirstOrderOutcome::NoSolution(none)) => {
            let phi = none.curve.clone();
            (Outcome::NoSolution(none), phi)
        }
        Err(e) => (Outcome::Failed(e.to_string()), Vec::new()),
    };
    Ok(AlphaRun { alpha, outcome, phi })
}

fn solve_second(cfg: &ScenarioConfig, grid: &RadialGrid, alpha: f64) -> Result<AlphaRun, ConfigError> {
    let spec = cfg.spec(alpha)?;
    let mut problem = SecondOrderProblem::new(spec).with_boundary(cfg.solver.boundary);
    if let Some(c) = &cfg.solver.coupling {
        problem = problem.with_coupling(c.clone());
    }
    let outcome = match second_order_pipeline(cfg, &problem, grid) {
        Ok(s) => Outcome::Second(s),
        Err(e) => Outcome::Failed(e.to_string()),
    };
    Ok(AlphaRun {
        alpha,
        outcome,
        phi: Vec::new(),
    })
}

fn second_order_pipeline(
    cfg: &ScenarioConfig,
    problem: &SecondOrderProblem,
    grid: &RadialGrid,
) -> Result<SecondOrderSolution, Error> {
    let s = &cfg.solver;
    let minimize = MinimizeOptions {
        gtol: s.tolerances.gradient,
        max_iterations: s.max_iterations,
        ..Default::default()
    };
    let newton = NewtonOptions {
        rtol: s.tolerances.residual,
        max_iterations: s.max_iterations,
        ..Default::default()
    };
    let variational = problem.spec.alpha == 0.0 || problem.spec.current == 0.0;
    let init = SecondOrderState::initial(problem, grid)?;
    let state = match (s.method, variational) {
        (SecondOrderMethod::Minimize, _) => minimize_constrained(problem, grid, &init, &minimize)?,
        (SecondOrderMethod::Newton, _) | (SecondOrderMethod::Auto, false) => {
            solve_bvp_newton(problem, grid, &init, &newton)?
        }
        (SecondOrderMethod::Auto, true) => {
            let warm = minimize_constrained(problem, grid, &init, &minimize)?;
            match solve_bvp_newton(problem, grid, &warm, &newton) {
                Ok(polished) => polished,
                Err(_) => warm,
            }
        }
    };
    let u = reconstruct_u(problem, &state)?;
    let residual = residual_vector(problem, &state)?;
    let mass_error = (state.mass(problem.spec.dim) - problem.mass_target()).abs();
    Ok(SecondOrderSolution {
        m: state.m(),
        u,
        residual,
        mass_error,
        state,
    })
}

/// Sizes the pool from `RADIAL_MFG_THREADS` when set.
fn pool() -> rayon::ThreadPool {
    let threads = std::env::var("RADIAL_MFG_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

/// Solves every swept `alpha`; results keep the sweep order regardless of scheduling.
pub fn solve_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun, ConfigError> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let alphas = cfg.alphas();
    let runs: Result<Vec<AlphaRun>, ConfigError> = pool().install(|| {
        alphas
            .par_iter()
            .map(|&a| match cfg.solver.order {
                Order::First => solve_first(cfg, &grid, a),
                Order::Second => solve_second(cfg, &grid, a),
            })
            .collect()
    });
    Ok(ScenarioRun {
        config: cfg.clone(),
        grid,
        runs: runs?,
    })
}

/// `1/|dB_1|`, the line every phi curve must cross.
pub fn mass_target(cfg: &ScenarioConfig) -> f64 {
    1.0 / unit_sphere_area(cfg.problem.dim)
}
