use crate::error::{Error, Result};
use crate::numerics::RadialGrid;
use crate::potentials::Potential;

use super::linalg::{solve_bordered, Tridiagonal};
use super::residuals::{interior_residual_norm, row};
use super::{BoundaryCondition, Diagnostics, Discretization, SecondOrderProblem, SecondOrderState};

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Max-norm tolerance on the full residual, mass row included.
    pub rtol: f64,
    pub max_iterations: usize,
    pub floor: f64,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            rtol: 1e-10,
            max_iterations: 50,
            floor: 1e-8,
            max_halvings: 40,
        }
    }
}

struct System {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    dh: Vec<f64>,
    f: Vec<f64>,
    mass_gap: f64,
}

impl System {
    fn max_norm(&self) -> f64 {
        self.f.iter().fold(self.mass_gap.abs(), |a, x| a.max(x.abs()))
    }

    fn sq_norm(&self) -> f64 {
        self.f.iter().map(|x| x * x).sum::<f64>() + self.mass_gap * self.mass_gap
    }
}

fn assemble<P>(pb: &SecondOrderProblem<P>, disc: &Discretization, rho: &[f64], h: f64) -> System {
    let e = pb.exponents();
    let n = disc.n;
    let mut s = System {
        lower: vec![0.0; n],
        diag: vec![0.0; n],
        upper: vec![0.0; n],
        dh: vec![0.0; n],
        f: vec![0.0; n],
        mass_gap: disc.mass(rho, e.p) - pb.mass_target(),
    };
    for i in 0..n {
        let r = row(pb, disc, &e, rho, h, i);
        s.lower[i] = r.lower;
        s.diag[i] = r.diag;
        s.upper[i] = r.upper;
        s.dh[i] = r.dh;
        s.f[i] = r.value;
    }
    s
}

/// Damped Newton on the discrete equation at every node plus the mass constraint,
/// with `H` as the extra unknown.
pub fn solve_bvp_newton<P: Potential>(
    problem: &SecondOrderProblem<P>,
    grid: &RadialGrid,
    init: &SecondOrderState,
    options: &NewtonOptions,
) -> Result<SecondOrderState> {
    problem.validate()?;
    grid.check_len(&init.rho)?;
    let disc = Discretization::new(problem, grid)?;
    let p = problem.exponents().p;
    let mut rho = init.rho.clone();
    if let BoundaryCondition::Dirichlet { left, right } = problem.boundary {
        rho[0] = left;
        *rho.last_mut().unwrap() = right;
    }
    if rho.iter().any(|&x| !(x >= options.floor)) {
        return Err(Error::InvalidProblem("initial rho must be positive".into()));
    }
    let mut h = init.h;
    let mut sys = assemble(problem, &disc, &rho, h);
    let mut history = vec![sys.max_norm()];
    let mut iterations = 0;
    loop {
        let norm = sys.max_norm();
        if norm <= options.rtol {
            break;
        }
        if iterations >= options.max_iterations {
            return Err(Error::Divergence {
                iterations,
                residual: norm,
            });
        }
        iterations += 1;
        let t = Tridiagonal::factor(&sys.lower, &sys.diag, &sys.upper)?;
        let grad_mass: Vec<f64> = (0..disc.n)
            .map(|i| disc.weight[i] * p * rho[i].powf(p - 1.0))
            .collect();
        let rhs: Vec<f64> = sys.f.iter().map(|x| -x).collect();
        let (delta, eta) = solve_bordered(&t, &sys.dh, &grad_mass, &rhs, -sys.mass_gap)?;

        let merit = sys.sq_norm();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..options.max_halvings {
            let trial: Vec<f64> = rho.iter().zip(&delta).map(|(r, d)| r + step * d).collect();
            if trial.iter().all(|&x| x >= options.floor) {
                let trial_h = h + step * eta;
                let next = assemble(problem, &disc, &trial, trial_h);
                let m = next.sq_norm();
                if m.is_finite() && m <= (1.0 - 1e-4 * step) * merit {
                    accepted = Some((trial, trial_h, next));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((trial, trial_h, next)) = accepted else {
            return Err(Error::Divergence {
                iterations,
                residual: norm,
            });
        };
        rho = trial;
        h = trial_h;
        sys = next;
        history.push(sys.max_norm());
    }
    let mut state = SecondOrderState::new(grid.clone(), rho, h, problem.spec.current, problem.spec.alpha)?;
    state.boundary = problem.boundary;
    let residual_norm = interior_residual_norm(problem, &state)?;
    state.diagnostics = Diagnostics {
        method: "newton".into(),
        functional: None,
        gradient_norm: sys.max_norm(),
        residual_norm,
        mass_error: (state.mass(problem.spec.dim) - problem.mass_target()).abs(),
        iterations,
        converged: true,
        history,
        warnings: Vec::new(),
    };
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::{minimize_constrained, MinimizeOptions};
    use super::*;
    use crate::congestion::{Domain, ProblemSpec};
    use crate::potentials::PotentialSpec;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn warm_start_from_minimizer() {
        for pb in [
            problem(0.0, 1.0, PotentialSpec::gaussian_sine(2.0)),
            problem(0.7, 0.0, PotentialSpec::power_sine(1.5, 2.0)),
        ] {
            let grid = uniform(0.1, 5.0, 400);
            let init = SecondOrderState::initial(&pb, &grid).unwrap();
            let var = minimize_constrained(&pb, &grid, &init, &MinimizeOptions::default()).unwrap();
            let bvp = solve_bvp_newton(&pb, &grid, &var, &NewtonOptions::default()).unwrap();
            assert!(bvp.diagnostics.iterations <= 5);
            assert!(max_diff(&var.rho, &bvp.rho) <= 1e-6);
            assert!((var.h - bvp.h).abs() <= 1e-6);
        }
    }

    #[test]
    fn constant_data_exact() {
        let pb = problem(0.0, 0.0, PotentialSpec::constant(0.0));
        for n in [5, 17, 60] {
            let grid = uniform(1.0, 2.0, n);
            let mut init = SecondOrderState::initial(&pb, &grid).unwrap();
            init.h = 0.0;
            let s = solve_bvp_newton(&pb, &grid, &init, &NewtonOptions::default()).unwrap();
            let rho0 = ((1.0 / (2.0 * std::f64::consts::PI)) / 1.5).sqrt();
            assert!(max_diff(&s.rho, &vec![rho0; n]) < 1e-13);
            assert!((s.h + rho0 * rho0).abs() < 1e-12);
        }
    }

    fn manufactured_error(alpha: f64, j: f64, n: usize) -> f64 {
        let (a, b) = (0.5f64, 3.0f64);
        let exact = |r: f64| 1.0 + (-r).exp();
        let spec = ProblemSpec::new(2, alpha, 1.0, j, Domain::PuncturedSpace, manufactured(alpha, j, 2)).unwrap();
        // alpha = 1/2 gives m = rho and int (1 + e^-r) r dr in closed form.
        let mass = (b * b - a * a) / 2.0 + (a + 1.0) * (-a).exp() - (b + 1.0) * (-b).exp();
        let pb = SecondOrderProblem::new(spec)
            .with_boundary(BoundaryCondition::Dirichlet {
                left: exact(a),
                right: exact(b),
            })
            .with_mass_target(mass);
        let grid = uniform(a, b, n);
        let init = SecondOrderState::initial(&pb, &grid).unwrap();
        let s = solve_bvp_newton(&pb, &grid, &init, &NewtonOptions::default()).unwrap();
        let truth: Vec<f64> = grid.nodes().iter().map(|&r| exact(r)).collect();
        max_diff(&s.rho, &truth).max(s.h.abs())
    }

    #[test]
    fn manufactured_solution_converges_at_second_order() {
        let e1 = manufactured_error(0.5, 0.7, 101);
        let e2 = manufactured_error(0.5, 0.7, 201);
        let order = (e1 / e2).log2();
        assert!((1.8..=2.2).contains(&order), "{e1} {e2} {order}");
    }

    #[test]
    fn iteration_cap_reports_divergence() {
        let pb = problem(0.5, 1.0, PotentialSpec::gaussian_sine(2.0));
        let grid = uniform(0.2, 4.0, 100);
        let init = SecondOrderState::initial(&pb, &grid).unwrap();
        let opts = NewtonOptions {
            max_iterations: 0,
            ..Default::default()
        };
        let err = solve_bvp_newton(&pb, &grid, &init, &opts).unwrap_err();
        assert!(matches!(err, Error::Divergence { iterations: 0, .. }));
    }
}
