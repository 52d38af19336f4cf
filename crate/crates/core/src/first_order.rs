//! Explicit solutions of the first-order radial system.
//!
//! With a nonzero current the density is given pointwise by
//!
//! ```text
//! m(r) = r^(-2(d-1)/(2+beta-alpha)) * [F_j^{-1}((H - V(r)) r^sigma)]^(1/beta)
//! u'(r) = j m(r)^(alpha-1) r^(1-d)
//! ```
//!
//! and `H` is the unique root of `phi(H) = 1/|dB_1|`, where `phi(H)` is the mass
//! `int_0^inf r^(d-1) m(r; H) dr`. `phi` is strictly decreasing, so the root is
//! found by bracket expansion on `(0, inf)`.
//!
//! Without current (`j = 0`, the only option on the full space) `u` is constant
//! and `m = (V - H)^(1/beta)`; the mass constraint then frequently has no
//! admissible `H`, which is reported as [`FirstOrderOutcome::NoSolution`].

use serde::{Deserialize, Serialize};

use crate::congestion::{check_admissibility, unit_sphere_area, CongestionCurve, ProblemSpec};
use crate::error::{Error, Result};
use crate::numerics::{
    cumulative_integral, integrate, integrate_from_origin, MonotoneRootProblem, RadialGrid,
    SearchRegion,
};
use crate::potentials::Potential;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ZeroCurrentMode {
    /// The grid stands for `(0, inf)`: the mass is finite only if `H` equals
    /// the infimum of `V`, reached at the far end of the grid.
    #[default]
    Unbounded,
    /// Diagnostic mode: the grid is the whole domain and any `H <= min V` is allowed.
    Truncated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderOptions {
    pub invert_tol: f64,
    /// Absolute tolerance on `H`.
    pub h_tol: f64,
    pub initial_bracket: (f64, f64),
    pub max_expansions: usize,
    /// Add the `[0, r_min]` contribution of the mass integral from its power-law behaviour.
    pub origin_head: bool,
    /// Re-solve on a grid extended to `2 r_max` and warn when `H` moves.
    pub truncation_check: bool,
    pub zero_current: ZeroCurrentMode,
    /// Relative tolerance on the normalized mass.
    pub mass_tol: f64,
    /// Points in the mass-vs-`H` curve attached to nonexistence reports.
    pub diagnostic_samples: usize,
}

impl Default for FirstOrderOptions {
    fn default() -> Self {
        FirstOrderOptions {
            invert_tol: 1e-13,
            h_tol: 1e-8,
            initial_bracket: (1e-6, 1.0),
            max_expansions: 60,
            origin_head: true,
            truncation_check: true,
            zero_current: ZeroCurrentMode::Unbounded,
            mass_tol: 1e-6,
            diagnostic_samples: 25,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialSolution {
    pub grid: RadialGrid,
    pub m: Vec<f64>,
    /// Value function with `u(r_base) = 0`, `r_base` the node closest to 1.
    pub u: Vec<f64>,
    pub h: f64,
    pub j: f64,
    pub alpha: f64,
    pub beta: f64,
    pub dim: usize,
    pub base_index: usize,
    pub hj_residual: Vec<f64>,
    /// `u' m^(1-alpha) r^(d-1) - j` with a finite-difference `u'`.
    pub current_deviation: Vec<f64>,
    /// `|dB_1| int r^(d-1) m dr`, normalized to 1.
    pub mass: f64,
    pub truncation: Option<TruncationCheck>,
    pub warnings: Vec<String>,
}

impl RadialSolution {
    pub fn max_hj_residual(&self) -> f64 {
        self.hj_residual.iter().fold(0.0, |a, r| a.max(r.abs()))
    }

    /// Max-norm of the current deviation over interior nodes.
    pub fn max_current_deviation(&self) -> f64 {
        let n = self.current_deviation.len();
        self.current_deviation[1..n - 1]
            .iter()
            .fold(0.0, |a, r| a.max(r.abs()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationCheck {
    pub r_max: f64,
    pub h: f64,
    pub shift: f64,
    pub warn: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Nonexistence {
    pub reason: String,
    /// Mass target `1/|dB_1|` (unnormalized).
    pub target: f64,
    /// For `j = 0`: largest `H` keeping `m > 0` and the mass there.
    pub critical_h: Option<f64>,
    pub critical_mass: Option<f64>,
    /// `(H, unnormalized mass)` samples.
    pub curve: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum FirstOrderOutcome {
    Solved(RadialSolution),
    NoSolution(Nonexistence),
}

impl FirstOrderOutcome {
    pub fn solution(&self) -> Option<&RadialSolution> {
        match self {
            FirstOrderOutcome::Solved(s) => Some(s),
            FirstOrderOutcome::NoSolution(_) => None,
        }
    }

    pub fn into_solution(self) -> Option<RadialSolution> {
        match self {
            FirstOrderOutcome::Solved(s) => Some(s),
            FirstOrderOutcome::NoSolution(_) => None,
        }
    }
}

/// Per-node quantities that do not depend on `H`.
struct Kernel {
    curve: CongestionCurve,
    v: Vec<f64>,
    r_sigma: Vec<f64>,
    /// `r^(-2(d-1)/(2+beta-alpha))`
    r_density: Vec<f64>,
    inv_beta: f64,
    tol: f64,
}

impl Kernel {
    fn new<P: Potential>(spec: &ProblemSpec<P>, grid: &RadialGrid, tol: f64) -> Self {
        let curve = spec.curve();
        let k = density_exponent(spec);
        Kernel {
            curve,
            v: grid.nodes().iter().map(|&r| spec.potential.value(r)).collect(),
            r_sigma: grid.nodes().iter().map(|r| r.powf(curve.sigma)).collect(),
            r_density: grid.nodes().iter().map(|r| r.powf(k)).collect(),
            inv_beta: 1.0 / spec.beta,
            tol,
        }
    }

    fn density(&self, h: f64) -> Result<Vec<f64>> {
        (0..self.v.len())
            .map(|i| {
                let t = self.curve.invert_with(
                    (h - self.v[i]) * self.r_sigma[i],
                    self.tol,
                    crate::congestion::DEFAULT_EXPANSION_CAP,
                )?;
                Ok(self.r_density[i] * t.powf(self.inv_beta))
            })
            .collect()
    }
}

fn density_exponent<P>(spec: &ProblemSpec<P>) -> f64 {
    -2.0 * (spec.dim as f64 - 1.0) / (2.0 + spec.beta - spec.alpha)
}

fn require_current<P>(spec: &ProblemSpec<P>) -> Result<()> {
    spec.validate()?;
    if spec.current == 0.0 {
        return Err(Error::InvalidProblem(
            "the explicit density formula needs a nonzero current".into(),
        ));
    }
    Ok(())
}

/// `m(r)` for a nonzero current at a given `H`.
pub fn density_at<P: Potential>(spec: &ProblemSpec<P>, h: f64, r: f64, tol: f64) -> Result<f64> {
    require_current(spec)?;
    if !(r > 0.0) {
        return Err(Error::OutsideDomain(r));
    }
    let curve = spec.curve();
    let y = (h - spec.potential.value(r)) * r.powf(curve.sigma);
    let t = curve.invert_with(y, tol, crate::congestion::DEFAULT_EXPANSION_CAP)?;
    Ok(r.powf(density_exponent(spec)) * t.powf(1.0 / spec.beta))
}

/// The integrand `r^((d-1)(beta-alpha)/(2+beta-alpha)) [F_j^{-1}((H-V) r^sigma)]^(1/beta)` of `phi`.
pub fn mass_integrand<P: Potential>(spec: &ProblemSpec<P>, h: f64, r: f64, tol: f64) -> Result<f64> {
    require_current(spec)?;
    let curve = spec.curve();
    let y = (h - spec.potential.value(r)) * r.powf(curve.sigma);
    let t = curve.invert_with(y, tol, crate::congestion::DEFAULT_EXPANSION_CAP)?;
    Ok(r.powf(spec.origin_exponent()) * t.powf(1.0 / spec.beta))
}

fn radial_mass(
    grid: &RadialGrid,
    dim: usize,
    m: &[f64],
    origin_exponent: Option<f64>,
) -> Result<f64> {
    let samples: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(m)
        .map(|(r, m)| r.powi(dim as i32 - 1) * m)
        .collect();
    match origin_exponent {
        Some(e) => integrate_from_origin(grid, &samples, e),
        None => integrate(grid, &samples),
    }
}

fn phi_with(kernel: &Kernel, spec_dim: usize, grid: &RadialGrid, head: Option<f64>, h: f64) -> Result<f64> {
    let m = kernel.density(h)?;
    radial_mass(grid, spec_dim, &m, head)
}

fn origin_head<P>(spec: &ProblemSpec<P>, opts: &FirstOrderOptions) -> Option<f64> {
    opts.origin_head.then(|| spec.origin_exponent())
}

/// `phi(H)`: truncated-grid quadrature of the mass of `m(.; H)`.
pub fn mass_functional<P: Potential>(
    spec: &ProblemSpec<P>,
    h: f64,
    grid: &RadialGrid,
    opts: &FirstOrderOptions,
) -> Result<f64> {
    require_current(spec)?;
    let kernel = Kernel::new(spec, grid, opts.invert_tol);
    phi_with(&kernel, spec.dim, grid, origin_head(spec, opts), h)
}

/// `phi` at several values of `H`.
pub fn phi_curve<P: Potential>(
    spec: &ProblemSpec<P>,
    grid: &RadialGrid,
    opts: &FirstOrderOptions,
    hs: &[f64],
) -> Result<Vec<(f64, f64)>> {
    require_current(spec)?;
    let kernel = Kernel::new(spec, grid, opts.invert_tol);
    let head = origin_head(spec, opts);
    hs.iter()
        .map(|&h| Ok((h, phi_with(&kernel, spec.dim, grid, head, h)?)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct HSolve {
    pub h: f64,
    pub evaluations: usize,
    pub truncation: Option<TruncationCheck>,
}

fn solve_h_on<P: Potential>(
    spec: &ProblemSpec<P>,
    grid: &RadialGrid,
    opts: &FirstOrderOptions,
) -> Result<(f64, usize)> {
    let kernel = Kernel::new(spec, grid, opts.invert_tol);
    let head = origin_head(spec, opts);
    let target = 1.0 / unit_sphere_area(spec.dim);
    let root = MonotoneRootProblem::new(
        |h| phi_with(&kernel, spec.dim, grid, head, h),
        target,
        SearchRegion::UpperHalfLine {
            lower: 0.0,
            initial: opts.initial_bracket,
        },
    )
    .with_tolerances(0.0, opts.h_tol)
    .with_max_expansions(opts.max_expansions)
    .solve()?;
    Ok((root.x, root.evaluations))
}

/// The unique `H > 0` with `phi(H) = 1/|dB_1|`.
pub fn solve_h<P: Potential>(
    spec: &ProblemSpec<P>,
    grid: &RadialGrid,
    opts: &FirstOrderOptions,
) -> Result<HSolve> {
    require_current(spec)?;
    let (h, evaluations) = solve_h_on(spec, grid, opts)?;
    let truncation = if opts.truncation_check {
        let extended = grid.extended_to(2.0 * grid.r_max())?;
        let (h2, _) = solve_h_on(spec, &extended, opts)?;
        let shift = h2 - h;
        Some(TruncationCheck {
            r_max: extended.r_max(),
            h: h2,
            shift,
            warn: shift.abs() > 10.0 * opts.h_tol,
        })
    } else {
        None
    };
    Ok(HSolve {
        h,
        evaluations,
        truncation,
    })
}

/// Per-node Hamilton-Jacobi residual of a solution.
pub fn hj_residual<P: Potential>(spec: &ProblemSpec<P>, solution: &RadialSolution) -> Vec<f64> {
    let d = spec.dim as i32;
    let (a, b, j, h) = (spec.alpha, spec.beta, solution.j, solution.h);
    solution
        .grid
        .nodes()
        .iter()
        .zip(&solution.m)
        .map(|(&r, &m)| {
            let v = spec.potential.value(r);
            if j == 0.0 {
                m.powf(b) - (v - h)
            } else {
                0.5 * j * j * r.powi(2 - 2 * d) * m.powf(a - 2.0) - m.powf(b) - (h - v)
            }
        })
        .collect()
}

/// `u'(r) m^(1-alpha) r^(d-1) - j` with `u'` from three-point finite differences.
pub fn current_deviation(solution: &RadialSolution) -> Result<Vec<f64>> {
    let du = solution.grid.derivative(&solution.u)?;
    Ok(solution
        .grid
        .nodes()
        .iter()
        .zip(&solution.m)
        .zip(&du)
        .map(|((&r, &m), &du)| {
            du * m.powf(1.0 - solution.alpha) * r.powi(solution.dim as i32 - 1) - solution.j
        })
        .collect())
}

fn mass_target(dim: usize) -> f64 {
    1.0 / unit_sphere_area(dim)
}

pub fn solve_first_order<P: Potential>(
    spec: &ProblemSpec<P>,
    grid: &RadialGrid,
    opts: &FirstOrderOptions,
) -> Result<FirstOrderOutcome> {
    spec.validate()?;
    if spec.current == 0.0 {
        return solve_zero_current(spec, grid, opts);
    }
    let hs = match solve_h(spec, grid, opts) {
        Ok(hs) => hs,
        Err(Error::TargetUnattainable { reached, .. }) => {
            let target = mass_target(spec.dim);
            let hs: Vec<f64> = (0..opts.diagnostic_samples.max(2))
                .map(|k| {
                    let s = k as f64 / (opts.diagnostic_samples.max(2) - 1) as f64;
                    1e-6 * (1e12f64).powf(s)
                })
                .collect();
            let curve = phi_curve(spec, grid, opts, &hs)
                .unwrap_or_default();
            return Ok(FirstOrderOutcome::NoSolution(Nonexistence {
                reason: format!(
                    "phi never reaches 1/|dB_1| = {target} on the truncated grid (search stopped at H = {reached})"
                ),
                target,
                critical_h: None,
                critical_mass: None,
                curve,
            }));
        }
        Err(e) => return Err(e),
    };
    let h = hs.h;
    let kernel = Kernel::new(spec, grid, opts.invert_tol);
    let m = kernel.density(h)?;
    let (j, r) = (spec.current, grid.nodes());
    let flux: Vec<f64> = r
        .iter()
        .zip(&m)
        .map(|(&r, &m)| j * m.powf(spec.alpha - 1.0) * r.powi(1 - spec.dim as i32))
        .collect();
    let base_index = grid.nearest_index(1.0);
    let u = cumulative_integral(grid, &flux, base_index)?;
    let mass = unit_sphere_area(spec.dim) * radial_mass(grid, spec.dim, &m, origin_head(spec, opts))?;

    let mut warnings = check_admissibility(spec).warnings;
    if let Some(t) = hs.truncation.as_ref().filter(|t| t.warn) {
        warnings.push(format!(
            "H moves by {:.3e} when the grid is extended to r = {}",
            t.shift, t.r_max
        ));
    }
    if (mass - 1.0).abs() > opts.mass_tol {
        warnings.push(format!("normalized mass {mass} differs from 1"));
    }
    finish(
        spec,
        RadialSolution {
            grid: grid.clone(),
            m,
            u,
            h,
            j,
            alpha: spec.alpha,
            beta: spec.beta,
            dim: spec.dim,
            base_index,
            hj_residual: Vec::new(),
            current_deviation: Vec::new(),
            mass,
            truncation: hs.truncation,
            warnings,
        },
    )
}

fn finish<P: Potential>(spec: &ProblemSpec<P>, mut sol: RadialSolution) -> Result<FirstOrderOutcome> {
    sol.hj_residual = hj_residual(spec, &sol);
    sol.current_deviation = if sol.grid.len() >= 3 {
        current_deviation(&sol)?
    } else {
        vec![0.0; sol.grid.len()]
    };
    if let Some(i) = sol.m.iter().position(|&m| !(m > 0.0)) {
        sol.warnings
            .push(format!("density is not positive at r = {}", sol.grid.nodes()[i]));
    }
    Ok(FirstOrderOutcome::Solved(sol))
}

/// `(V - H)^(1/beta)` at every node, or `None` when it is not strictly positive everywhere.
pub fn zero_current_density<P: Potential>(
    spec: &ProblemSpec<P>,
    grid: &RadialGrid,
    h: f64,
) -> Option<Vec<f64>> {
    grid.nodes()
        .iter()
        .map(|&r| {
            let gap = spec.potential.value(r) - h;
            (gap > 0.0).then(|| gap.powf(1.0 / spec.beta))
        })
        .collect()
}

/// The `j = 0` branch: `u` constant, `m = (V - H)^(1/beta)`.
pub fn solve_zero_current<P: Potential>(
    spec: &ProblemSpec<P>,
    grid: &RadialGrid,
    opts: &FirstOrderOptions,
) -> Result<FirstOrderOutcome> {
    spec.validate()?;
    if spec.current != 0.0 {
        return Err(Error::InvalidProblem("zero-current branch needs j = 0".into()));
    }
    let v: Vec<f64> = grid.nodes().iter().map(|&r| spec.potential.value(r)).collect();
    let (argmin, h_crit) = v
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, x)| if x <= acc.1 { (i, x) } else { acc });
    let head = opts.origin_head.then_some(spec.dim as f64 - 1.0);
    let inv_beta = 1.0 / spec.beta;
    let mass_at = |h: f64| -> Result<f64> {
        let m: Vec<f64> = v.iter().map(|&x| (x - h).max(0.0).powf(inv_beta)).collect();
        radial_mass(grid, spec.dim, &m, head)
    };
    let target = mass_target(spec.dim);
    let critical_mass = mass_at(h_crit)?;

    let span = h_crit.abs().max(1.0);
    let samples = opts.diagnostic_samples.max(2);
    let mut curve = Vec::with_capacity(samples);
    for k in 0..samples {
        let offset = if k == 0 {
            0.0
        } else {
            span * 1e-3 * (1e6f64).powf((k - 1) as f64 / (samples - 2).max(1) as f64)
        };
        curve.push((h_crit - offset, mass_at(h_crit - offset)?));
    }
    let no_solution = |reason: String| {
        Ok(FirstOrderOutcome::NoSolution(Nonexistence {
            reason,
            target,
            critical_h: Some(h_crit),
            critical_mass: Some(critical_mass),
            curve: curve.clone(),
        }))
    };

    let h = match opts.zero_current {
        ZeroCurrentMode::Unbounded => {
            let far = v[v.len() - 1];
            if argmin != v.len() - 1 && far - h_crit > opts.mass_tol * (1.0 + h_crit.abs()) {
                return no_solution(format!(
                    "V attains its infimum {h_crit} at r = {} before the end of the grid; \
                     the mass diverges for every admissible H",
                    grid.nodes()[argmin]
                ));
            }
            if (critical_mass - target).abs() > opts.mass_tol * target {
                return no_solution(format!(
                    "the only H with finite mass is {h_crit}, where the mass is {critical_mass} != {target}"
                ));
            }
            h_crit
        }
        ZeroCurrentMode::Truncated => {
            if critical_mass > target * (1.0 + opts.mass_tol) {
                return no_solution(format!(
                    "mass {critical_mass} at H = {h_crit} already exceeds {target}; \
                     larger H makes m vanish"
                ));
            }
            if (critical_mass - target).abs() <= opts.mass_tol * target {
                h_crit
            } else {
                MonotoneRootProblem::new(
                    mass_at,
                    target,
                    SearchRegion::LowerHalfLine {
                        upper: h_crit,
                        initial: (h_crit - span, h_crit - 0.5 * span),
                    },
                )
                .with_tolerances(0.0, opts.h_tol)
                .with_max_expansions(opts.max_expansions)
                .solve()?
                .x
            }
        }
    };
    let m: Vec<f64> = v.iter().map(|&x| (x - h).max(0.0).powf(inv_beta)).collect();
    let mass = unit_sphere_area(spec.dim) * radial_mass(grid, spec.dim, &m, head)?;
    let mut warnings = Vec::new();
    if opts.zero_current == ZeroCurrentMode::Truncated {
        warnings.push("truncated-domain diagnostic: mass is computed on the grid only".into());
    }
    finish(
        spec,
        RadialSolution {
            grid: grid.clone(),
            u: vec![0.0; m.len()],
            m,
            h,
            j: 0.0,
            alpha: spec.alpha,
            beta: spec.beta,
            dim: spec.dim,
            base_index: grid.nearest_index(1.0),
            hj_residual: Vec::new(),
            current_deviation: Vec::new(),
            mass,
            truncation: None,
            warnings,
        },
    )
}
