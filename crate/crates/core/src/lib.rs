//! Stationary radial mean-field games with congestion.
//!
//! The Fokker-Planck equation of a radially symmetric stationary MFG
//! integrates to a conserved current `j`. Substituting that current into the
//! Hamilton-Jacobi equation leaves a single scalar equation per radius in the
//! first-order case, and a single second-order ODE in the elliptic case.
//!
//! * [`congestion`] holds the dimension-independent algebra (`F_j`, its
//!   inverse, exponents, admissibility).
//! * [`potentials`] is the catalog of radial potentials.
//! * [`numerics`] provides graded grids, trapezoid quadrature and monotone
//!   root finding.
//! * [`first_order`] builds the explicit first-order solutions and the
//!   effective Hamiltonian.
//! * [`second_order`] solves the reduced ODE for `rho = m^(alpha + 1/2)`
//!   by constrained minimization or by a Newton boundary-value solve.

pub mod congestion;
pub mod error;
pub mod first_order;
pub mod numerics;
pub mod potentials;
pub mod second_order;

pub use congestion::{
    check_admissibility, sigma_exponent, unit_sphere_area, AdmissibilityReport, CongestionCurve,
    DecayCheck, Domain, ProblemSpec,
};
pub use error::{Error, Result};
pub use first_order::{
    solve_first_order, FirstOrderOptions, FirstOrderOutcome, Nonexistence, RadialSolution,
};
pub use numerics::{Grading, RadialGrid};
pub use potentials::{Potential, PotentialSpec};
