use crate::error::{Error, Result};
use crate::numerics::RadialGrid;
use crate::potentials::Potential;

use super::{BoundaryCondition, Discretization, Exponents, SecondOrderProblem, SecondOrderState};

/// One row of the discrete system and its Jacobian entries.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Row {
    pub value: f64,
    pub lower: f64,
    pub diag: f64,
    pub upper: f64,
    /// derivative with respect to `H`
    pub dh: f64,
}

/// Pointwise part of the residual: `-(alpha+1/2)(g + H - V) rho^kappa + (2alpha+1) j^2 r^(2-2d) rho^theta / 4`.
fn source<P>(
    pb: &SecondOrderProblem<P>,
    e: &Exponents,
    disc: &Discretization,
    i: usize,
    rho: f64,
    h: f64,
) -> (f64, f64, f64) {
    let sigma = e.alpha + 0.5;
    let j = pb.spec.current;
    let m = rho.powf(e.p);
    let gap = pb.coupling.g(m) + h - disc.v[i];
    let rk = rho.powf(e.kappa);
    let current = (2.0 * e.alpha + 1.0) * j * j * disc.s2[i] / 4.0;
    let value = -sigma * gap * rk + current * rho.powf(e.theta);
    let d = -sigma * (pb.coupling.g_prime(m) * e.p * m / rho * rk + gap * e.kappa * rk / rho)
        + current * e.theta * rho.powf(e.theta - 1.0);
    (value, d, -sigma * rk)
}

pub(crate) fn row<P>(
    pb: &SecondOrderProblem<P>,
    disc: &Discretization,
    e: &Exponents,
    rho: &[f64],
    h: f64,
    i: usize,
) -> Row {
    if let BoundaryCondition::Dirichlet { left, right } = pb.boundary {
        if i == 0 || i + 1 == disc.n {
            let target = if i == 0 { left } else { right };
            return Row {
                value: rho[i] - target,
                diag: 1.0,
                ..Row::default()
            };
        }
    }
    let (lo, up) = disc.diffusion_coefficients(i);
    let (s, ds, dh) = source(pb, e, disc, i, rho[i], h);
    let mut r = Row {
        value: disc.diffusion(rho, i) + s,
        lower: lo,
        diag: -(lo + up) + ds,
        upper: up,
        dh,
    };
    let aj = e.alpha * pb.spec.current;
    if aj != 0.0 && i > 0 && i + 1 < disc.n {
        let c = disc.dstencil[i];
        let slope = disc.slope(rho, i);
        let k = -aj * disc.s1[i] / rho[i].powf(e.p);
        r.value += k * slope;
        r.lower += k * c[0];
        r.upper += k * c[2];
        r.diag += k * (c[1] - e.p * slope / rho[i]);
    }
    r
}

/// Discrete residual at every node: the ODE at interior nodes, the half-cell
/// balance at Neumann ends, `rho - value` at Dirichlet ends.
pub fn residual_vector<P: Potential>(
    problem: &SecondOrderProblem<P>,
    state: &SecondOrderState,
) -> Result<Vec<f64>> {
    let disc = Discretization::new(problem, &state.grid)?;
    state.grid.check_len(&state.rho)?;
    let e = problem.exponents();
    Ok((0..disc.n)
        .map(|i| row(problem, &disc, &e, &state.rho, state.h, i).value)
        .collect())
}

/// Max-norm of the residual over interior nodes.
pub fn interior_residual_norm<P: Potential>(
    problem: &SecondOrderProblem<P>,
    state: &SecondOrderState,
) -> Result<f64> {
    let r = residual_vector(problem, state)?;
    Ok(r[1..r.len() - 1].iter().fold(0.0, |a, x| a.max(x.abs())))
}

fn check_interior(grid: &RadialGrid, i: usize) -> Result<()> {
    if i == 0 || i + 1 >= grid.len() {
        return Err(Error::BoundaryIndex {
            index: i,
            len: grid.len(),
        });
    }
    Ok(())
}

/// Left minus right side of the reduced `rho` equation at interior node `i`.
pub fn ode_residual_general<P: Potential>(
    problem: &SecondOrderProblem<P>,
    state: &SecondOrderState,
    i: usize,
) -> Result<f64> {
    check_interior(&state.grid, i)?;
    Ok(residual_vector(problem, state)?[i])
}

/// Same residual written out for `alpha = 0`:
/// `rho'' + (d-1) rho'/r - (g(rho^2) + H - V) rho / 2 + j^2 r^(2-2d) / (4 rho^3)`.
pub fn ode_residual_alpha0<P: Potential>(
    problem: &SecondOrderProblem<P>,
    state: &SecondOrderState,
    i: usize,
) -> Result<f64> {
    if problem.spec.alpha != 0.0 {
        return Err(Error::InvalidProblem("the alpha = 0 residual needs alpha = 0".into()));
    }
    check_interior(&state.grid, i)?;
    let disc = Discretization::new(problem, &state.grid)?;
    let rho = state.rho[i];
    let j = problem.spec.current;
    Ok(disc.diffusion(&state.rho, i)
        - 0.5 * (problem.coupling.g(rho * rho) + state.h - disc.v[i]) * rho
        + j * j * disc.s2[i] / (4.0 * rho.powi(3)))
}

/// Residual of the equation written for `m` itself,
/// `m''/m + (alpha - 1/2) m'^2/m^2 + (m'/m)((d-1)/r - alpha j r^(1-d)/m) + j^2 r^(2-2d)/(2m^2) - (g(m) + H - V) m^(-alpha)`,
/// with three-point Lagrange stencils at interior node `i`.
pub fn m_equation_residual<P: Potential>(
    problem: &SecondOrderProblem<P>,
    grid: &RadialGrid,
    m: &[f64],
    h: f64,
    i: usize,
) -> Result<f64> {
    check_interior(grid, i)?;
    grid.check_len(m)?;
    let (idx, w1) = grid.first_derivative_stencil(i);
    let (_, w2) = grid.second_derivative_stencil(i);
    let dm: f64 = (0..3).map(|k| w1[k] * m[idx[k]]).sum();
    let d2m: f64 = (0..3).map(|k| w2[k] * m[idx[k]]).sum();
    let r = grid.nodes()[i];
    let d = problem.spec.dim as i32;
    let (a, j) = (problem.spec.alpha, problem.spec.current);
    let mi = m[i];
    let v = problem.spec.potential.value(r);
    Ok(d2m / mi + (a - 0.5) * (dm / mi).powi(2)
        + dm / mi * ((d as f64 - 1.0) / r - a * j * r.powi(1 - d) / mi)
        + j * j * r.powi(2 - 2 * d) / (2.0 * mi * mi)
        - (problem.coupling.g(mi) + h - v) * mi.powf(-a))
}
