use crate::error::{Error, Result};

/// LU factors of a tridiagonal matrix (Thomas algorithm, no pivoting).
pub(crate) struct Tridiagonal {
    lower: Vec<f64>,
    pivots: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    /// `lower[i]` multiplies `x[i-1]` in row `i`, `upper[i]` multiplies `x[i+1]`.
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut pivots = vec![0.0; n];
        let mut l = vec![0.0; n];
        for i in 0..n {
            let scale = diag[i].abs() + lower[i].abs() + upper[i].abs();
            let p = if i == 0 {
                diag[0]
            } else {
                l[i] = lower[i] / pivots[i - 1];
                diag[i] - l[i] * upper[i - 1]
            };
            if !p.is_finite() || p.abs() <= 1e-14 * scale || p == 0.0 {
                return Err(Error::SingularJacobian { node: i });
            }
            pivots[i] = p;
        }
        Ok(Tridiagonal {
            lower: l,
            pivots,
            upper: upper.to_vec(),
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for i in 1..n {
            y[i] -= self.lower[i] * y[i - 1];
        }
        y[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = (y[i] - self.upper[i] * y[i + 1]) / self.pivots[i];
        }
        y
    }
}

/// Solves `[T b; a^T 0] [x; eta] = [f; f_last]` given the factors of `T`.
pub(crate) fn solve_bordered(t: &Tridiagonal, b: &[f64], a: &[f64], f: &[f64], f_last: f64) -> Result<(Vec<f64>, f64)> {
    let x1 = t.solve(f);
    let x2 = t.solve(b);
    let den: f64 = a.iter().zip(&x2).map(|(a, x)| a * x).sum();
    let num: f64 = a.iter().zip(&x1).map(|(a, x)| a * x).sum::<f64>() - f_last;
    if !(den.is_finite() && den != 0.0) {
        return Err(Error::SingularJacobian { node: f.len() });
    }
    let eta = num / den;
    Ok((x1.iter().zip(&x2).map(|(p, q)| p - eta * q).collect(), eta))
}
