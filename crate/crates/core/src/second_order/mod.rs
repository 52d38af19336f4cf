//! Second-order radial system through the substitution `rho = m^(alpha + 1/2)`.
//!
//! The reduced equation is
//!
//! ```text
//! rho'' + rho' ((d-1)/r - alpha j r^(1-d) / rho^p)
//!     = (alpha + 1/2) (g(rho^p) + H - V) rho^(1/(2 alpha + 1))
//!       - (2 alpha + 1) j^2 r^(2-2d) rho^((2 alpha - 3)/(2 alpha + 1)) / 4
//! ```
//!
//! with `p = 2/(2 alpha + 1)` so that `m = rho^p`. On a truncated grid the
//! principal part `rho'' + (d-1) rho'/r = r^(1-d) (r^(d-1) rho')'` is
//! discretized in conservative form. That choice makes the discrete equation
//! exactly the stationarity condition of the discrete functionals, so the
//! variational solver and the Newton solver share one discrete problem.

use serde::{Deserialize, Serialize};

use crate::congestion::{unit_sphere_area, ProblemSpec};
use crate::error::{Error, Result};
use crate::numerics::RadialGrid;
use crate::potentials::{Potential, PotentialSpec};

pub mod coupling;
pub mod functionals;
mod linalg;
pub mod minimize;
pub mod newton;
pub mod reconstruct;
pub mod residuals;

pub use coupling::CouplingSpec;
pub use functionals::{
    discrete_gradient, functional_alpha0, functional_alpha0_m_form, functional_j0, FunctionalKind,
};
pub use minimize::{minimize_constrained, MinimizeOptions};
pub use newton::{solve_bvp_newton, NewtonOptions};
pub use reconstruct::{reconstruct_u, second_order_current};
pub use residuals::{
    m_equation_residual, ode_residual_alpha0, ode_residual_general, residual_vector,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryCondition {
    /// `rho' = 0` at both truncation ends (natural boundary condition).
    #[default]
    NeumannZero,
    /// Prescribed `rho` at `r_min` and `r_max`.
    Dirichlet { left: f64, right: f64 },
}

/// A second-order problem: the physical data plus coupling and boundary treatment.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondOrderProblem<P = PotentialSpec> {
    pub spec: ProblemSpec<P>,
    pub coupling: CouplingSpec,
    pub boundary: BoundaryCondition,
    /// Defaults to `1/|dB_1|`.
    pub mass_target: Option<f64>,
}

impl<P> SecondOrderProblem<P> {
    /// Power coupling `g(m) = m^beta` with the problem's `beta`, Neumann ends.
    pub fn new(spec: ProblemSpec<P>) -> Self {
        let coupling = CouplingSpec::Power {
            exponent: spec.beta,
        };
        SecondOrderProblem {
            spec,
            coupling,
            boundary: BoundaryCondition::NeumannZero,
            mass_target: None,
        }
    }

    pub fn with_coupling(mut self, coupling: CouplingSpec) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryCondition) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_mass_target(mut self, target: f64) -> Self {
        self.mass_target = Some(target);
        self
    }

    pub fn mass_target(&self) -> f64 {
        self.mass_target
            .unwrap_or_else(|| 1.0 / unit_sphere_area(self.spec.dim))
    }

    pub fn exponents(&self) -> Exponents {
        Exponents::new(self.spec.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.coupling.validate()?;
        if let BoundaryCondition::Dirichlet { left, right } = self.boundary {
            if !(left > 0.0 && right > 0.0 && left.is_finite() && right.is_finite()) {
                return Err(Error::InvalidProblem(format!(
                    "Dirichlet values must be positive, got ({left}, {right})"
                )));
            }
        }
        if let Some(t) = self.mass_target {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidProblem(format!("mass target must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

/// Powers attached to `alpha` in the `rho` formulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponents {
    pub alpha: f64,
    /// `m = rho^p`, `p = 2/(2 alpha + 1)`.
    pub p: f64,
    /// `1/(2 alpha + 1)`
    pub kappa: f64,
    /// `(2 alpha - 3)/(2 alpha + 1)`
    pub theta: f64,
}

impl Exponents {
    pub fn new(alpha: f64) -> Self {
        let q = 2.0 * alpha + 1.0;
        Exponents {
            alpha,
            p: 2.0 / q,
            kappa: 1.0 / q,
            theta: (2.0 * alpha - 3.0) / q,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    pub method: String,
    /// Value of the minimized functional, when there is one.
    pub functional: Option<f64>,
    /// Max-norm of the weighted gradient of the Lagrangian (zero at a discrete critical point).
    pub gradient_norm: f64,
    /// Max-norm of the discrete ODE residual over interior nodes.
    pub residual_norm: f64,
    /// `|mass - target|`
    pub mass_error: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted step.
    pub history: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecondOrderState {
    pub grid: RadialGrid,
    pub rho: Vec<f64>,
    pub h: f64,
    pub j: f64,
    pub alpha: f64,
    pub boundary: BoundaryCondition,
    pub diagnostics: Diagnostics,
}

impl SecondOrderState {
    pub fn new(grid: RadialGrid, rho: Vec<f64>, h: f64, j: f64, alpha: f64) -> Result<Self> {
        grid.check_len(&rho)?;
        if let Some(i) = rho.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(SecondOrderState {
            grid,
            rho,
            h,
            j,
            alpha,
            boundary: BoundaryCondition::NeumannZero,
            diagnostics: Diagnostics::default(),
        })
    }

    /// Constant `rho` meeting the mass constraint (Dirichlet ends are set to their values).
    pub fn initial<P: Potential>(problem: &SecondOrderProblem<P>, grid: &RadialGrid) -> Result<Self> {
        problem.validate()?;
        let disc = Discretization::new(problem, grid)?;
        let e = problem.exponents();
        let total: f64 = disc.weight.iter().sum();
        let rho0 = (problem.mass_target() / total).powf(1.0 / e.p);
        let mut rho = vec![rho0; grid.len()];
        if let BoundaryCondition::Dirichlet { left, right } = problem.boundary {
            rho[0] = left;
            *rho.last_mut().unwrap() = right;
            project_mass(&disc, &mut rho, problem.mass_target(), e.p, problem.boundary)?;
        }
        // H from the averaged equation at constant rho.
        let g = problem.coupling.g(rho0.powf(e.p));
        let h = disc
            .weight
            .iter()
            .zip(&disc.v)
            .map(|(w, v)| w * (v - g))
            .sum::<f64>()
            / total;
        let mut state = SecondOrderState::new(grid.clone(), rho, h, problem.spec.current, problem.spec.alpha)?;
        state.boundary = problem.boundary;
        Ok(state)
    }

    pub fn m(&self) -> Vec<f64> {
        let p = Exponents::new(self.alpha).p;
        self.rho.iter().map(|r| r.powf(p)).collect()
    }

    /// Trapezoid value of `int rho^p r^(d-1) dr`.
    pub fn mass(&self, dim: usize) -> f64 {
        let p = Exponents::new(self.alpha).p;
        self.grid
            .nodes()
            .iter()
            .zip(self.grid.weights())
            .zip(&self.rho)
            .map(|((r, w), x)| w * r.powi(dim as i32 - 1) * x.powf(p))
            .sum()
    }
}

/// Per-node data shared by residuals, functionals and solvers.
pub(crate) struct Discretization {
    pub n: usize,
    /// cell widths
    pub h: Vec<f64>,
    /// `r_mid^(d-1)` per cell
    pub omega: Vec<f64>,
    /// trapezoid weight times `r^(d-1)`
    pub weight: Vec<f64>,
    pub v: Vec<f64>,
    /// `r^(1-d)`
    pub s1: Vec<f64>,
    /// `r^(2-2d)`
    pub s2: Vec<f64>,
    /// central first-derivative weights at interior nodes
    pub dstencil: Vec<[f64; 3]>,
}

impl Discretization {
    pub fn new<P: Potential>(problem: &SecondOrderProblem<P>, grid: &RadialGrid) -> Result<Self> {
        if grid.len() < 3 {
            return Err(Error::InvalidGrid("second-order solves need at least 3 nodes".into()));
        }
        if !(grid.r_min() > 0.0) {
            return Err(Error::InvalidGrid("second-order solves need r_min > 0".into()));
        }
        let d = problem.spec.dim as i32;
        let r = grid.nodes().to_vec();
        let h = grid.spacings();
        let omega = r
            .windows(2)
            .map(|w| (0.5 * (w[0] + w[1])).powi(d - 1))
            .collect();
        let weight = r
            .iter()
            .zip(grid.weights())
            .map(|(r, w)| w * r.powi(d - 1))
            .collect();
        let dstencil = (0..r.len())
            .map(|i| {
                if i == 0 || i + 1 == r.len() {
                    [0.0; 3]
                } else {
                    grid.first_derivative_stencil(i).1
                }
            })
            .collect();
        Ok(Discretization {
            n: r.len(),
            v: r.iter().map(|&x| problem.spec.potential.value(x)).collect(),
            s1: r.iter().map(|x| x.powi(1 - d)).collect(),
            s2: r.iter().map(|x| x.powi(2 - 2 * d)).collect(),
            h,
            omega,
            weight,
            dstencil,
        })
    }

    /// `(r^(d-1) rho')' / r^(d-1)` in conservative form; the ends use a half cell with zero outer flux.
    pub fn diffusion(&self, rho: &[f64], i: usize) -> f64 {
        let left = if i > 0 {
            self.omega[i - 1] * (rho[i] - rho[i - 1]) / self.h[i - 1]
        } else {
            0.0
        };
        let right = if i + 1 < self.n {
            self.omega[i] * (rho[i + 1] - rho[i]) / self.h[i]
        } else {
            0.0
        };
        (right - left) / self.weight[i]
    }

    /// Coefficients of `rho[i-1]` and `rho[i+1]` in [`Discretization::diffusion`].
    pub fn diffusion_coefficients(&self, i: usize) -> (f64, f64) {
        let lower = if i > 0 {
            self.omega[i - 1] / (self.h[i - 1] * self.weight[i])
        } else {
            0.0
        };
        let upper = if i + 1 < self.n {
            self.omega[i] / (self.h[i] * self.weight[i])
        } else {
            0.0
        };
        (lower, upper)
    }

    /// Central `rho'` at interior nodes; zero at the ends.
    pub fn slope(&self, rho: &[f64], i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            return 0.0;
        }
        let c = self.dstencil[i];
        c[0] * rho[i - 1] + c[1] * rho[i] + c[2] * rho[i + 1]
    }

    pub fn mass(&self, rho: &[f64], p: f64) -> f64 {
        self.weight.iter().zip(rho).map(|(w, x)| w * x.powf(p)).sum()
    }

    pub fn fixed(&self, boundary: BoundaryCondition, i: usize) -> bool {
        matches!(boundary, BoundaryCondition::Dirichlet { .. }) && (i == 0 || i + 1 == self.n)
    }
}

/// Rescales the non-fixed nodes so that the mass equals `target`.
pub(crate) fn project_mass(
    disc: &Discretization,
    rho: &mut [f64],
    target: f64,
    p: f64,
    boundary: BoundaryCondition,
) -> Result<()> {
    let (mut fixed, mut free) = (0.0, 0.0);
    for i in 0..disc.n {
        let c = disc.weight[i] * rho[i].powf(p);
        if disc.fixed(boundary, i) {
            fixed += c;
        } else {
            free += c;
        }
    }
    if !(target > fixed) || !(free > 0.0) {
        return Err(Error::InvalidProblem(format!(
            "mass target {target} cannot be met with the boundary values (their mass is {fixed})"
        )));
    }
    let s = ((target - fixed) / free).powf(1.0 / p);
    for i in 0..disc.n {
        if !disc.fixed(boundary, i) {
            rho[i] *= s;
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::congestion::Domain;
    use crate::numerics::Grading;

    pub fn problem(alpha: f64, j: f64, v: PotentialSpec) -> SecondOrderProblem {
        SecondOrderProblem::new(
            ProblemSpec::new(2, alpha, 1.0, j, Domain::PuncturedSpace, v).unwrap(),
        )
    }

    pub fn uniform(a: f64, b: f64, n: usize) -> RadialGrid {
        RadialGrid::new(a, b, n, Grading::Uniform).unwrap()
    }

    /// Potential that makes `1 + exp(-r)` an exact solution with `H = 0`.
    pub fn manufactured(alpha: f64, j: f64, dim: usize) -> impl Fn(f64) -> f64 + Clone {
        move |r: f64| {
            let e = Exponents::new(alpha);
            let rho = 1.0 + (-r).exp();
            let d1 = -(-r).exp();
            let d2 = (-r).exp();
            let d = dim as i32;
            let lhs = d2 + d1 * ((d as f64 - 1.0) / r - alpha * j * r.powi(1 - d) / rho.powf(e.p))
                + (2.0 * alpha + 1.0) * j * j * r.powi(2 - 2 * d) * rho.powf(e.theta) / 4.0;
            // lhs = (alpha + 1/2)(g + H - V) rho^kappa with g(m) = m, H = 0
            rho.powf(e.p) - lhs / ((alpha + 0.5) * rho.powf(e.kappa))
        }
    }

    /// Smooth positive state `1 + 0.3 sin(2r) + 0.2 cos(5r)`.
    pub fn wavy(grid: &RadialGrid) -> Vec<f64> {
        grid.nodes()
            .iter()
            .map(|r| 1.0 + 0.3 * (2.0 * r).sin() + 0.2 * (5.0 * r).cos())
            .collect()
    }
}
