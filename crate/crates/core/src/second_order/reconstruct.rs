use crate::error::Result;
use crate::numerics::cumulative_integral;
use crate::potentials::Potential;

use super::{SecondOrderProblem, SecondOrderState};

/// Value function from the conserved current `j = u' m^(1-alpha) r^(d-1) + m' r^(d-1)`,
/// that is `u' = (j r^(1-d) - m') m^(alpha-1)`, integrated with `u = 0` at the node nearest `r = 1`.
pub fn reconstruct_u<P: Potential>(
    problem: &SecondOrderProblem<P>,
    state: &SecondOrderState,
) -> Result<Vec<f64>> {
    let grid = &state.grid;
    let m = state.m();
    let dm = grid.derivative(&m)?;
    let (a, j, d) = (state.alpha, state.j, problem.spec.dim as i32);
    let du: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(&m)
        .zip(&dm)
        .map(|((&r, &m), &dm)| (j * r.powi(1 - d) - dm) * m.powf(a - 1.0))
        .collect();
    cumulative_integral(grid, &du, grid.nearest_index(1.0))
}

/// `u' m^(1-alpha) r^(d-1) + m' r^(d-1) - j` per node, with finite-difference derivatives.
pub fn second_order_current<P: Potential>(
    problem: &SecondOrderProblem<P>,
    state: &SecondOrderState,
    u: &[f64],
) -> Result<Vec<f64>> {
    let grid = &state.grid;
    let m = state.m();
    let du = grid.derivative(u)?;
    let dm = grid.derivative(&m)?;
    let d = problem.spec.dim as i32;
    Ok((0..grid.len())
        .map(|i| {
            let rd = grid.nodes()[i].powi(d - 1);
            du[i] * m[i].powf(1.0 - state.alpha) * rd + dm[i] * rd - state.j
        })
        .collect())
}
