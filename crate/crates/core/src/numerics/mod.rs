//! Grids on truncated `(0, inf)`, trapezoid quadrature and monotone root finding.

mod grid;
mod quadrature;
mod roots;

pub use grid::{Grading, RadialGrid};
pub use quadrature::{cumulative_integral, integrate, integrate_from_origin};
pub use roots::{solve_monotone, MonotoneRootProblem, Root, SearchRegion};
