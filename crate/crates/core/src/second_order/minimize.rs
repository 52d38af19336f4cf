//! Minimization of the discrete functionals.
//!
//! For `alpha = 0` the functional is minimized on the mass-constraint surface
//! by a feasible Newton method: each step solves the KKT system of the
//! Lagrangian Hessian (tridiagonal, bordered by the constraint gradient), is
//! damped until it is a descent direction, and is followed by a rescaling back
//! onto the constraint. `H` is recovered from the multiplier, `H = -2 mu`.
//!
//! For `j = 0` with `alpha != 0` the `H` term is not a multiple of the mass,
//! so `H` is found by an outer monotone root solve on the mass of the
//! unconstrained minimizer at fixed `H`.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::numerics::{MonotoneRootProblem, RadialGrid, SearchRegion};
use crate::potentials::Potential;

use super::functionals::{gradient, hessian, value, FunctionalKind};
use super::linalg::{solve_bordered, Tridiagonal};
use super::residuals::interior_residual_norm;
use super::{
    project_mass, BoundaryCondition, Diagnostics, Discretization, SecondOrderProblem, SecondOrderState,
};

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeOptions {
    /// Stop when `max |grad L| / (2 W)` falls below this.
    pub gtol: f64,
    pub max_iterations: usize,
    /// Positivity floor for `rho`.
    pub floor: f64,
    pub armijo: f64,
    pub max_halvings: usize,
    /// Tolerance on `H` in the outer solve of the zero-current regime.
    pub h_tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            gtol: 1e-10,
            max_iterations: 200,
            floor: 1e-8,
            armijo: 1e-4,
            max_halvings: 60,
            h_tol: 1e-11,
        }
    }
}

/// Minimizes the variational form that matches the problem's regime.
pub fn minimize_constrained<P: Potential>(
    problem: &SecondOrderProblem<P>,
    grid: &RadialGrid,
    init: &SecondOrderState,
    options: &MinimizeOptions,
) -> Result<SecondOrderState> {
    problem.validate()?;
    grid.check_len(&init.rho)?;
    if init.rho.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidProblem("initial rho must be positive".into()));
    }
    if problem.spec.alpha == 0.0 {
        constrained_alpha0(problem, grid, init, options)
    } else if problem.spec.current == 0.0 {
        nested_zero_current(problem, grid, init, options)
    } else {
        Err(Error::UnsupportedRegime(format!(
            "alpha = {} with j = {} has no variational form; use the Newton solver",
            problem.spec.alpha, problem.spec.current
        )))
    }
}

fn set_boundary(rho: &mut [f64], boundary: BoundaryCondition) {
    if let BoundaryCondition::Dirichlet { left, right } = boundary {
        rho[0] = left;
        *rho.last_mut().unwrap() = right;
    }
}

/// Fixed-node rows become identity rows.
fn pin_fixed(disc: &Discretization, boundary: BoundaryCondition, diag: &mut [f64], off: &mut [f64]) {
    let n = disc.n;
    for i in [0, n - 1] {
        if disc.fixed(boundary, i) {
            diag[i] = 1.0;
            if i > 0 {
                off[i - 1] = 0.0;
            }
            if i + 1 < n {
                off[i] = 0.0;
            }
        }
    }
}

fn weighted_max(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).fold(0.0, |a, (x, w)| a.max((x / (2.0 * w)).abs()))
}

fn constrained_alpha0<P: Potential>(
    pb: &SecondOrderProblem<P>,
    grid: &RadialGrid,
    init: &SecondOrderState,
    opts: &MinimizeOptions,
) -> Result<SecondOrderState> {
    let kind = FunctionalKind::Alpha0;
    let disc = Discretization::new(pb, grid)?;
    let p = pb.exponents().p;
    let target = pb.mass_target();
    let bc = pb.boundary;
    let n = disc.n;

    let mut rho = init.rho.clone();
    set_boundary(&mut rho, bc);
    project_mass(&disc, &mut rho, target, p, bc)?;
    let mut f = value(pb, &disc, kind, &rho, 0.0);
    let mut history = vec![f];
    let mut mu = 0.0;
    let mut norm = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut warnings = Vec::new();

    while iterations <= opts.max_iterations {
        let g = gradient(pb, &disc, kind, &rho, 0.0);
        let a: Vec<f64> = (0..n)
            .map(|i| {
                if disc.fixed(bc, i) {
                    0.0
                } else {
                    disc.weight[i] * p * rho[i].powf(p - 1.0)
                }
            })
            .collect();
        let (num, den) = (0..n).fold((0.0, 0.0), |(s, t), i| {
            (s + g[i] * a[i] / disc.weight[i], t + a[i] * a[i] / disc.weight[i])
        });
        mu = num / den;
        let kkt: Vec<f64> = (0..n)
            .map(|i| if disc.fixed(bc, i) { 0.0 } else { g[i] - mu * a[i] })
            .collect();
        norm = weighted_max(&kkt, &disc.weight);
        if norm <= opts.gtol {
            converged = true;
            break;
        }
        if iterations == opts.max_iterations {
            break;
        }
        iterations += 1;

        let (mut diag, mut off) = hessian(pb, &disc, kind, &rho, 0.0);
        for i in 0..n {
            diag[i] -= mu * disc.weight[i] * p * (p - 1.0) * rho[i].powf(p - 2.0);
        }
        pin_fixed(&disc, bc, &mut diag, &mut off);
        let scale = (0..n).fold(0.0f64, |s, i| s.max(diag[i].abs() / disc.weight[i]));
        let rhs: Vec<f64> = kkt.iter().map(|x| -x).collect();
        let violation = disc.mass(&rho, p) - target;

        let mut tau = 0.0;
        let mut step = None;
        for _ in 0..40 {
            let shifted: Vec<f64> = (0..n)
                .map(|i| if disc.fixed(bc, i) { 1.0 } else { diag[i] + tau * disc.weight[i] })
                .collect();
            let mut lower = vec![0.0; n];
            lower[1..].copy_from_slice(&off);
            let mut upper = vec![0.0; n];
            upper[..n - 1].copy_from_slice(&off);
            let solved = Tridiagonal::factor(&lower, &shifted, &upper)
                .and_then(|t| solve_bordered(&t, &a, &a, &rhs, -violation));
            if let Ok((delta, _)) = solved {
                let slope: f64 = kkt.iter().zip(&delta).map(|(k, d)| k * d).sum();
                if slope < 0.0 && delta.iter().all(|d| d.is_finite()) {
                    step = Some((delta, slope));
                    break;
                }
            }
            tau = if tau == 0.0 { 1e-6 * scale.max(1.0) } else { 10.0 * tau };
        }
        let Some((delta, slope)) = step else {
            warnings.push("no descent direction found".into());
            break;
        };

        let mut t = 1.0;
        let mut accepted = false;
        let mut blocked = false;
        for _ in 0..opts.max_halvings {
            let mut trial: Vec<f64> = rho.iter().zip(&delta).map(|(r, d)| r + t * d).collect();
            set_boundary(&mut trial, bc);
            if trial.iter().any(|&x| !(x >= opts.floor)) {
                blocked = true;
                t *= 0.5;
                continue;
            }
            blocked = false;
            project_mass(&disc, &mut trial, target, p, bc)?;
            let ft = value(pb, &disc, kind, &trial, 0.0);
            if ft <= f + opts.armijo * t * slope + 8.0 * f64::EPSILON * f.abs() {
                rho = trial;
                f = ft;
                history.push(f);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            if blocked {
                return Err(Error::PositivityBreakdown { iteration: iterations });
            }
            warnings.push(format!("line search stalled at gradient norm {norm:.3e}"));
            break;
        }
    }
    if !converged {
        warnings.push(format!(
            "stopped after {iterations} iterations with gradient norm {norm:.3e}"
        ));
    }
    finish(
        pb,
        grid,
        rho,
        -2.0 * mu,
        Diagnostics {
            method: "projected-newton".into(),
            functional: Some(f),
            gradient_norm: norm,
            iterations,
            converged,
            history,
            warnings,
            ..Diagnostics::default()
        },
    )
}

fn finish<P: Potential>(
    pb: &SecondOrderProblem<P>,
    grid: &RadialGrid,
    rho: Vec<f64>,
    h: f64,
    mut diagnostics: Diagnostics,
) -> Result<SecondOrderState> {
    let mut state = SecondOrderState::new(grid.clone(), rho, h, pb.spec.current, pb.spec.alpha)?;
    state.boundary = pb.boundary;
    diagnostics.residual_norm = interior_residual_norm(pb, &state)?;
    diagnostics.mass_error = (state.mass(pb.spec.dim) - pb.mass_target()).abs();
    state.diagnostics = diagnostics;
    Ok(state)
}

struct InnerOutcome {
    iterations: usize,
    norm: f64,
    converged: bool,
    value: f64,
}

/// Unconstrained Newton minimization of the zero-current functional at fixed `H`.
fn minimize_at_h<P: Potential>(
    pb: &SecondOrderProblem<P>,
    disc: &Discretization,
    rho: &mut Vec<f64>,
    h: f64,
    opts: &MinimizeOptions,
    history: Option<&mut Vec<f64>>,
) -> Result<InnerOutcome> {
    let kind = FunctionalKind::ZeroCurrent;
    let bc = pb.boundary;
    let n = disc.n;
    set_boundary(rho, bc);
    let mut f = value(pb, disc, kind, rho, h);
    let mut local_history = Vec::new();
    let mut norm = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations <= opts.max_iterations {
        let mut g = gradient(pb, disc, kind, rho, h);
        for i in 0..n {
            if disc.fixed(bc, i) {
                g[i] = 0.0;
            }
        }
        norm = weighted_max(&g, &disc.weight);
        if norm <= opts.gtol {
            converged = true;
            break;
        }
        if iterations == opts.max_iterations {
            break;
        }
        iterations += 1;
        let (mut diag, mut off) = hessian(pb, disc, kind, rho, h);
        pin_fixed(disc, bc, &mut diag, &mut off);
        let scale = (0..n).fold(0.0f64, |s, i| s.max(diag[i].abs() / disc.weight[i]));
        let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut lower = vec![0.0; n];
        lower[1..].copy_from_slice(&off);
        let mut upper = vec![0.0; n];
        upper[..n - 1].copy_from_slice(&off);

        let mut tau = 0.0;
        let mut step = None;
        for _ in 0..40 {
            let shifted: Vec<f64> = (0..n)
                .map(|i| if disc.fixed(bc, i) { 1.0 } else { diag[i] + tau * disc.weight[i] })
                .collect();
            if let Ok(t) = Tridiagonal::factor(&lower, &shifted, &upper) {
                let delta = t.solve(&rhs);
                let slope: f64 = g.iter().zip(&delta).map(|(a, b)| a * b).sum();
                if slope < 0.0 && delta.iter().all(|d| d.is_finite()) {
                    step = Some((delta, slope));
                    break;
                }
            }
            tau = if tau == 0.0 { 1e-6 * scale.max(1.0) } else { 10.0 * tau };
        }
        let Some((delta, slope)) = step else { break };
        let mut t = 1.0;
        let mut accepted = false;
        let mut blocked = false;
        for _ in 0..opts.max_halvings {
            let trial: Vec<f64> = rho.iter().zip(&delta).map(|(r, d)| r + t * d).collect();
            if trial.iter().any(|&x| !(x >= opts.floor)) {
                blocked = true;
                t *= 0.5;
                continue;
            }
            blocked = false;
            let ft = value(pb, disc, kind, &trial, h);
            if ft <= f + opts.armijo * t * slope + 8.0 * f64::EPSILON * f.abs() {
                *rho = trial;
                f = ft;
                local_history.push(f);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            if blocked {
                return Err(Error::PositivityBreakdown { iteration: iterations });
            }
            break;
        }
    }
    if let Some(hist) = history {
        hist.extend(local_history);
    }
    Ok(InnerOutcome {
        iterations,
        norm,
        converged,
        value: f,
    })
}

fn nested_zero_current<P: Potential>(
    pb: &SecondOrderProblem<P>,
    grid: &RadialGrid,
    init: &SecondOrderState,
    opts: &MinimizeOptions,
) -> Result<SecondOrderState> {
    let disc = Discretization::new(pb, grid)?;
    let p = pb.exponents().p;
    let target = pb.mass_target();
    let warm = RefCell::new(init.rho.clone());
    let total_iterations = RefCell::new(0usize);

    let mass_at = |h: f64| -> Result<f64> {
        let mut rho = warm.borrow().clone();
        match minimize_at_h(pb, &disc, &mut rho, h, opts, None) {
            Ok(out) => {
                *total_iterations.borrow_mut() += out.iterations;
                let m = disc.mass(&rho, p);
                *warm.borrow_mut() = rho;
                Ok(m)
            }
            // The minimizer collapses onto the floor: the mass is numerically zero.
            Err(Error::PositivityBreakdown { .. }) => Ok(0.0),
            Err(e) => Err(e),
        }
    };
    let spread = init.h.abs().max(1.0);
    let root = MonotoneRootProblem::new(
        mass_at,
        target,
        SearchRegion::Line {
            initial: (init.h - 0.25 * spread, init.h + 0.25 * spread),
        },
    )
    .with_tolerances(0.0, opts.h_tol)
    .solve()?;

    let mut rho = warm.into_inner();
    let mut history = Vec::new();
    let out = minimize_at_h(pb, &disc, &mut rho, root.x, opts, Some(&mut history))?;
    let mut warnings = Vec::new();
    if !out.converged {
        warnings.push(format!("inner solve stopped at gradient norm {:.3e}", out.norm));
    }
    finish(
        pb,
        grid,
        rho,
        root.x,
        Diagnostics {
            method: "nested-newton".into(),
            functional: Some(out.value),
            gradient_norm: out.norm,
            iterations: total_iterations.into_inner() + out.iterations,
            converged: out.converged,
            history,
            warnings,
            ..Diagnostics::default()
        },
    )
}
