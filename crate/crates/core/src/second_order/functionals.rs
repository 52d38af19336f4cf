//! Discrete variational functionals.
//!
//! Both functionals are `sum_c omega_c h_c ((rho_{c+1} - rho_c)/h_c)^2 + sum_i W_i f(rho_i)`
//! with `omega_c = r_mid^(d-1)` and `W_i` the trapezoid weight times `r_i^(d-1)`.
//! For `alpha = 0`
//! `f = G(rho^2)/2 - V rho^2/2 + j^2 r^(2-2d)/(4 rho^2)`, minimized under the mass constraint.
//! For `j = 0`
//! `f = (2 alpha + 1) G_1(rho) + (2 alpha + 1)^2/(2 alpha + 2) rho^((2alpha+2)/(2alpha+1)) (H - V)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RadialGrid;
use crate::potentials::Potential;

use super::{Discretization, Exponents, SecondOrderProblem, SecondOrderState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    Alpha0,
    ZeroCurrent,
}

pub(crate) fn check_kind<P>(pb: &SecondOrderProblem<P>, kind: FunctionalKind) -> Result<()> {
    match kind {
        FunctionalKind::Alpha0 if pb.spec.alpha != 0.0 => Err(Error::UnsupportedRegime(format!(
            "the alpha = 0 functional was requested with alpha = {}",
            pb.spec.alpha
        ))),
        FunctionalKind::ZeroCurrent if pb.spec.current != 0.0 => Err(Error::UnsupportedRegime(format!(
            "the zero-current functional was requested with j = {}",
            pb.spec.current
        ))),
        _ => Ok(()),
    }
}

/// `(f, f', f'')` of the pointwise density at node `i`.
pub(crate) fn pointwise<P>(
    pb: &SecondOrderProblem<P>,
    e: &Exponents,
    disc: &Discretization,
    kind: FunctionalKind,
    i: usize,
    rho: f64,
    h: f64,
) -> (f64, f64, f64) {
    let c = &pb.coupling;
    let v = disc.v[i];
    match kind {
        FunctionalKind::Alpha0 => {
            let m = rho * rho;
            let jj = pb.spec.current.powi(2) * disc.s2[i];
            let g = c.g(m);
            (
                0.5 * c.big_g(m) - 0.5 * v * m + jj / (4.0 * m),
                (g - v) * rho - jj / (2.0 * m * rho),
                2.0 * c.g_prime(m) * m + g - v + 1.5 * jj / (m * m),
            )
        }
        FunctionalKind::ZeroCurrent => {
            let k = 2.0 * e.alpha + 1.0;
            let coef = k * k / (2.0 * (e.alpha + 1.0));
            let q = (2.0 * e.alpha + 2.0) / k;
            let m = rho.powf(e.p);
            let gap = c.g(m) + h - v;
            let rk = rho.powf(e.kappa);
            (
                k * c.g1(e.alpha, rho) + coef * rho.powf(q) * (h - v),
                k * rk * gap,
                k * (e.kappa * rk / rho * gap + rk * c.g_prime(m) * e.p * m / rho),
            )
        }
    }
}

pub(crate) fn value<P>(
    pb: &SecondOrderProblem<P>,
    disc: &Discretization,
    kind: FunctionalKind,
    rho: &[f64],
    h: f64,
) -> f64 {
    let e = pb.exponents();
    let dirichlet: f64 = (0..disc.n - 1)
        .map(|c| disc.omega[c] * (rho[c + 1] - rho[c]).powi(2) / disc.h[c])
        .sum();
    let local: f64 = (0..disc.n)
        .map(|i| disc.weight[i] * pointwise(pb, &e, disc, kind, i, rho[i], h).0)
        .sum();
    dirichlet + local
}

pub(crate) fn gradient<P>(
    pb: &SecondOrderProblem<P>,
    disc: &Discretization,
    kind: FunctionalKind,
    rho: &[f64],
    h: f64,
) -> Vec<f64> {
    let e = pb.exponents();
    let mut g: Vec<f64> = (0..disc.n)
        .map(|i| disc.weight[i] * pointwise(pb, &e, disc, kind, i, rho[i], h).1)
        .collect();
    for c in 0..disc.n - 1 {
        let flux = 2.0 * disc.omega[c] * (rho[c + 1] - rho[c]) / disc.h[c];
        g[c] -= flux;
        g[c + 1] += flux;
    }
    g
}

/// Symmetric tridiagonal Hessian as `(diagonal, off-diagonal)`.
pub(crate) fn hessian<P>(
    pb: &SecondOrderProblem<P>,
    disc: &Discretization,
    kind: FunctionalKind,
    rho: &[f64],
    h: f64,
) -> (Vec<f64>, Vec<f64>) {
    let e = pb.exponents();
    let mut diag: Vec<f64> = (0..disc.n)
        .map(|i| disc.weight[i] * pointwise(pb, &e, disc, kind, i, rho[i], h).2)
        .collect();
    let off: Vec<f64> = (0..disc.n - 1)
        .map(|c| -2.0 * disc.omega[c] / disc.h[c])
        .collect();
    for c in 0..disc.n - 1 {
        diag[c] -= off[c];
        diag[c + 1] -= off[c];
    }
    (diag, off)
}

pub fn functional_alpha0<P: Potential>(
    problem: &SecondOrderProblem<P>,
    state: &SecondOrderState,
) -> Result<f64> {
    check_kind(problem, FunctionalKind::Alpha0)?;
    let disc = Discretization::new(problem, &state.grid)?;
    state.grid.check_len(&state.rho)?;
    Ok(value(problem, &disc, FunctionalKind::Alpha0, &state.rho, state.h))
}

/// The `alpha = 0` functional written in `m = rho^2`:
/// `sum_c omega_c h_c m'^2/(4 m_c) + sum_i W_i (G(m)/2 - V m/2 + j^2 r^(2-2d)/(4m))`,
/// with `m_c = ((sqrt(m_c) + sqrt(m_{c+1}))/2)^2` on each cell.
pub fn functional_alpha0_m_form<P: Potential>(
    problem: &SecondOrderProblem<P>,
    grid: &RadialGrid,
    m: &[f64],
) -> Result<f64> {
    check_kind(problem, FunctionalKind::Alpha0)?;
    let disc = Discretization::new(problem, grid)?;
    grid.check_len(m)?;
    let j2 = problem.spec.current.powi(2);
    let mut total = 0.0;
    for c in 0..disc.n - 1 {
        let dm = (m[c + 1] - m[c]) / disc.h[c];
        let cell = (0.5 * (m[c].sqrt() + m[c + 1].sqrt())).powi(2);
        total += disc.omega[c] * disc.h[c] * dm * dm / (4.0 * cell);
    }
    for i in 0..disc.n {
        total += disc.weight[i]
            * (0.5 * problem.coupling.big_g(m[i]) - 0.5 * disc.v[i] * m[i]
                + j2 * disc.s2[i] / (4.0 * m[i]));
    }
    Ok(total)
}

pub fn functional_j0<P: Potential>(
    problem: &SecondOrderProblem<P>,
    state: &SecondOrderState,
) -> Result<f64> {
    check_kind(problem, FunctionalKind::ZeroCurrent)?;
    let disc = Discretization::new(problem, &state.grid)?;
    state.grid.check_len(&state.rho)?;
    Ok(value(problem, &disc, FunctionalKind::ZeroCurrent, &state.rho, state.h))
}

/// Exact gradient of the discrete functional with respect to the nodal values of `rho`.
pub fn discrete_gradient<P: Potential>(
    problem: &SecondOrderProblem<P>,
    state: &SecondOrderState,
    kind: FunctionalKind,
) -> Result<Vec<f64>> {
    check_kind(problem, kind)?;
    let disc = Discretization::new(problem, &state.grid)?;
    state.grid.check_len(&state.rho)?;
    Ok(gradient(problem, &disc, kind, &state.rho, state.h))
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::CouplingSpec;
    use super::*;
    use crate::potentials::PotentialSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn state(grid: &RadialGrid, rho: Vec<f64>, h: f64, pb: &SecondOrderProblem) -> SecondOrderState {
        SecondOrderState::new(grid.clone(), rho, h, pb.spec.current, pb.spec.alpha).unwrap()
    }

    #[test]
    fn unit_density_closed_forms() {
        let grid = uniform(1.0, 2.0, 2001);
        let pb = problem(0.0, 0.0, PotentialSpec::constant(0.0));
        let s = state(&grid, vec![1.0; 2001], 0.0, &pb);
        let f = functional_alpha0(&pb, &s).unwrap();
        assert!((f - 0.375).abs() < 1e-12, "{f}");
        let pb1 = problem(0.0, 1.0, PotentialSpec::constant(0.0));
        let f1 = functional_alpha0(&pb1, &s).unwrap();
        assert!((f1 - f - std::f64::consts::LN_2 / 4.0).abs() < 1e-8, "{}", f1 - f);
    }

    #[test]
    fn m_form_agrees() {
        let pb = problem(0.0, 0.9, PotentialSpec::gaussian_sine(2.0));
        let grid = crate::numerics::RadialGrid::new(0.05, 5.0, 300, crate::numerics::Grading::Composite).unwrap();
        let rho = wavy(&grid);
        let m: Vec<f64> = rho.iter().map(|x| x * x).collect();
        let a = functional_alpha0(&pb, &state(&grid, rho, 0.0, &pb)).unwrap();
        let b = functional_alpha0_m_form(&pb, &grid, &m).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} {b}");
    }

    #[test]
    fn zero_current_functional_at_zero_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pb = problem(0.0, 0.0, PotentialSpec::gaussian_sine(2.0));
        let grid = uniform(0.3, 4.0, 60);
        for _ in 0..10 {
            let rho: Vec<f64> = (0..60).map(|_| rng.gen_range(0.2..2.0)).collect();
            let h = rng.gen_range(-2.0..2.0);
            let s = state(&grid, rho, h, &pb);
            let j0 = functional_j0(&pb, &s).unwrap();
            let a0 = functional_alpha0(&pb, &s).unwrap();
            let mass = s.mass(2);
            assert!((j0 - a0 - 0.5 * h * mass).abs() <= 1e-10 * j0.abs().max(1.0));
        }
    }

    #[test]
    fn zero_current_functional_with_matched_potential() {
        let alpha = 0.6;
        let pb = problem(alpha, 0.0, PotentialSpec::constant(1.5));
        let grid = uniform(1.0, 2.0, 11);
        let s = state(&grid, vec![1.0; 11], 1.5, &pb);
        let expect = 1.5 * (2.0 * alpha + 1.0) * pb.coupling.g1(alpha, 1.0);
        assert!((functional_j0(&pb, &s).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cases = [
            (problem(0.0, 1.0, PotentialSpec::gaussian_sine(2.0)), FunctionalKind::Alpha0),
            (problem(0.0, 0.0, PotentialSpec::power_sine(1.5, 2.0)), FunctionalKind::ZeroCurrent),
            (problem(0.9, 0.0, PotentialSpec::gaussian_sine(1.0)), FunctionalKind::ZeroCurrent),
        ];
        let grid = crate::numerics::RadialGrid::new(0.1, 5.0, 80, crate::numerics::Grading::Composite).unwrap();
        for (pb, kind) in &cases {
            for _ in 0..5 {
                let rho: Vec<f64> = (0..80).map(|_| rng.gen_range(0.3..1.5)).collect();
                let dir: Vec<f64> = (0..80).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let s = state(&grid, rho.clone(), 0.37, pb);
                let g = discrete_gradient(pb, &s, *kind).unwrap();
                let analytic: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
                let eps = 1e-5;
                let shifted = |t: f64| {
                    let r: Vec<f64> = rho.iter().zip(&dir).map(|(x, v)| x + t * v).collect();
                    let disc = Discretization::new(pb, &grid).unwrap();
                    value(pb, &disc, *kind, &r, 0.37)
                };
                let fd = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
                assert!((fd - analytic).abs() <= 1e-6 * analytic.abs(), "{fd} {analytic}");
            }
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let pb = problem(0.7, 0.0, PotentialSpec::gaussian_sine(2.0));
        let grid = uniform(0.2, 3.0, 30);
        let disc = Discretization::new(&pb, &grid).unwrap();
        let rho = wavy(&grid);
        let (diag, off) = hessian(&pb, &disc, FunctionalKind::ZeroCurrent, &rho, 0.2);
        let k = 12;
        let eps = 1e-6;
        let mut up = rho.clone();
        up[k] += eps;
        let mut dn = rho.clone();
        dn[k] -= eps;
        let gu = gradient(&pb, &disc, FunctionalKind::ZeroCurrent, &up, 0.2);
        let gd = gradient(&pb, &disc, FunctionalKind::ZeroCurrent, &dn, 0.2);
        let col: Vec<f64> = gu.iter().zip(&gd).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        assert!((col[k] - diag[k]).abs() < 1e-5 * diag[k].abs());
        assert!((col[k - 1] - off[k - 1]).abs() < 1e-5 * off[k - 1].abs());
        assert!((col[k + 1] - off[k]).abs() < 1e-5 * off[k].abs());
        assert!(col[k + 3].abs() < 1e-8);
    }

    #[test]
    fn constant_is_critical_for_matched_data() {
        let alpha = 0.4;
        let e = Exponents::new(alpha);
        let (rho0, h) = (0.9f64, -0.2);
        let pb = problem(alpha, 0.0, PotentialSpec::constant(rho0.powf(e.p) + h));
        let grid = uniform(0.5, 2.0, 25);
        let g = discrete_gradient(&pb, &state(&grid, vec![rho0; 25], h, &pb), FunctionalKind::ZeroCurrent)
            .unwrap();
        assert!(g.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn stiffness_by_hand() {
        // nodes 1..4, omega = r_mid: 1.5, 2.5, 3.5; rho = r so every difference is 1.
        let pb = problem(0.0, 0.0, PotentialSpec::constant(0.0)).with_coupling(CouplingSpec::Tabulated {
            knots: vec![(0.0, 0.0), (1.0, 0.0)],
        });
        let grid = uniform(1.0, 4.0, 4);
        let s = state(&grid, vec![1.0, 2.0, 3.0, 4.0], 0.0, &pb);
        let g = discrete_gradient(&pb, &s, FunctionalKind::Alpha0).unwrap();
        assert_eq!(g, vec![-3.0, -2.0, -2.0, 7.0]);
    }

    #[test]
    fn regime_is_checked() {
        let pb = problem(0.5, 1.0, PotentialSpec::constant(0.0));
        let grid = uniform(1.0, 2.0, 5);
        let s = state(&grid, vec![1.0; 5], 0.0, &pb);
        assert!(functional_alpha0(&pb, &s).is_err());
        assert!(functional_j0(&pb, &s).is_err());
    }
}
