use crate::error::{Error, Result};
use crate::numerics::RadialGrid;

fn check(grid: &RadialGrid, samples: &[f64]) -> Result<()> {
    grid.check_len(samples)?;
    if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

/// Composite trapezoid rule over the grid.
pub fn integrate(grid: &RadialGrid, samples: &[f64]) -> Result<f64> {
    check(grid, samples)?;
    Ok(grid
        .weights()
        .iter()
        .zip(samples)
        .map(|(w, f)| w * f)
        .sum())
}

/// Trapezoid integral plus the head `[0, r_min]`, assuming the integrand
/// behaves like `C r^exponent` below the first node (`exponent > -1`).
pub fn integrate_from_origin(grid: &RadialGrid, samples: &[f64], exponent: f64) -> Result<f64> {
    let body = integrate(grid, samples)?;
    if !(exponent > -1.0) {
        return Err(Error::NonFinite { index: 0 });
    }
    Ok(body + samples[0] * grid.r_min() / (exponent + 1.0))
}

/// Signed trapezoid partial sums anchored at `base_index`, so that
/// `U[i]` approximates the integral from `r[base]` to `r[i]`.
pub fn cumulative_integral(grid: &RadialGrid, samples: &[f64], base_index: usize) -> Result<Vec<f64>> {
    grid.check_len(samples)?;
    let n = samples.len();
    if base_index >= n {
        return Err(Error::BoundaryIndex {
            index: base_index,
            len: n,
        });
    }
    let r = grid.nodes();
    let mut out = vec![0.0; n];
    for i in base_index + 1..n {
        out[i] = out[i - 1] + 0.5 * (r[i] - r[i - 1]) * (samples[i] + samples[i - 1]);
    }
    for i in (0..base_index).rev() {
        out[i] = out[i + 1] - 0.5 * (r[i + 1] - r[i]) * (samples[i] + samples[i + 1]);
    }
    Ok(out)
}
