use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grading {
    Uniform,
    Geometric,
    /// Geometric head on `[r_min, 1]` holding a third of the nodes, uniform tail on `[1, r_max]`.
    /// Falls back to uniform when `1` is not strictly inside the interval.
    Composite,
}

/// Strictly increasing nodes on a truncated half-line with composite-trapezoid weights.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    grading: Option<Grading>,
}

const COMPOSITE_KNEE: f64 = 1.0;
const COMPOSITE_HEAD_FRACTION: f64 = 1.0 / 3.0;

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, n: usize, grading: Grading) -> Result<Self> {
        if !(r_min.is_finite() && r_max.is_finite()) || !(r_max > r_min) || r_min < 0.0 {
            return Err(Error::InvalidGrid(format!(
                "need 0 <= r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes, got {n}")));
        }
        let nodes = match grading {
            Grading::Uniform => uniform(r_min, r_max, n),
            Grading::Geometric => {
                if r_min <= 0.0 {
                    return Err(Error::InvalidGrid("geometric grading needs r_min > 0".into()));
                }
                geometric(r_min, r_max, n)
            }
            Grading::Composite => {
                if r_min > 0.0 && r_min < COMPOSITE_KNEE && COMPOSITE_KNEE < r_max && n >= 4 {
                    let head = ((n as f64 * COMPOSITE_HEAD_FRACTION).round() as usize).clamp(1, n - 2);
                    let mut nodes = geometric(r_min, COMPOSITE_KNEE, head + 1);
                    nodes.pop();
                    nodes.extend(uniform(COMPOSITE_KNEE, r_max, n - head));
                    nodes
                } else {
                    uniform(r_min, r_max, n)
                }
            }
        };
        let mut grid = Self::from_nodes(nodes)?;
        grid.grading = Some(grading);
        Ok(grid)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid("need at least 2 nodes".into()));
        }
        if nodes.iter().any(|r| !r.is_finite()) || nodes[0] < 0.0 {
            return Err(Error::InvalidGrid("nodes must be finite and nonnegative".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(format!(
                "nodes not strictly increasing at index {i}"
            )));
        }
        let n = nodes.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let h = nodes[i + 1] - nodes[i];
            weights[i] += 0.5 * h;
            weights[i + 1] += 0.5 * h;
        }
        Ok(RadialGrid {
            nodes,
            weights,
            grading: None,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `None` for grids built from an explicit node list.
    pub fn grading(&self) -> Option<Grading> {
        self.grading
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Cell widths `r[i+1] - r[i]`.
    pub fn spacings(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn nearest_index(&self, r: f64) -> usize {
        match self.nodes.binary_search_by(|x| x.total_cmp(&r)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == self.nodes.len() => i - 1,
            Err(i) => {
                if r - self.nodes[i - 1] <= self.nodes[i] - r {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// Appends uniform nodes at the last cell width until `r_new` is reached.
    pub fn extended_to(&self, r_new: f64) -> Result<Self> {
        if !(r_new > self.r_max()) {
            return Err(Error::InvalidGrid(format!(
                "extension target {r_new} must exceed r_max = {}",
                self.r_max()
            )));
        }
        let n = self.nodes.len();
        let h = self.nodes[n - 1] - self.nodes[n - 2];
        let extra = ((r_new - self.r_max()) / h).ceil().max(1.0) as usize;
        let mut nodes = self.nodes.clone();
        nodes.extend(uniform(self.r_max(), r_new, extra + 1).into_iter().skip(1));
        let mut grid = Self::from_nodes(nodes)?;
        grid.grading = self.grading;
        Ok(grid)
    }

    /// Three-point Lagrange weights for the first derivative at node `i`
    /// (central in the interior, one-sided at the ends).
    pub fn first_derivative_stencil(&self, i: usize) -> ([usize; 3], [f64; 3]) {
        let n = self.nodes.len();
        assert!(n >= 3, "derivative stencils need at least 3 nodes");
        let c = i.clamp(1, n - 2);
        let idx = [c - 1, c, c + 1];
        let x = [self.nodes[c - 1], self.nodes[c], self.nodes[c + 1]];
        (idx, lagrange_first(x, self.nodes[i]))
    }

    /// Three-point Lagrange weights for the second derivative at interior node `i`.
    pub fn second_derivative_stencil(&self, i: usize) -> ([usize; 3], [f64; 3]) {
        let n = self.nodes.len();
        assert!(i >= 1 && i + 1 < n, "second derivative needs an interior node");
        let (x0, x1, x2) = (self.nodes[i - 1], self.nodes[i], self.nodes[i + 1]);
        let h0 = x1 - x0;
        let h1 = x2 - x1;
        (
            [i - 1, i, i + 1],
            [
                2.0 / (h0 * (h0 + h1)),
                -2.0 / (h0 * h1),
                2.0 / (h1 * (h0 + h1)),
            ],
        )
    }

    /// Finite-difference first derivative of nodal samples.
    pub fn derivative(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.check_len(samples)?;
        Ok((0..self.nodes.len())
            .map(|i| {
                let (idx, w) = self.first_derivative_stencil(i);
                w[0] * samples[idx[0]] + w[1] * samples[idx[1]] + w[2] * samples[idx[2]]
            })
            .collect())
    }

    pub(crate) fn check_len(&self, samples: &[f64]) -> Result<()> {
        if samples.len() != self.nodes.len() {
            return Err(Error::LengthMismatch {
                expected: self.nodes.len(),
                got: samples.len(),
            });
        }
        Ok(())
    }
}

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| a + i as f64 * h).collect();
    v[n - 1] = b;
    v
}

fn geometric(a: f64, b: f64, n: usize) -> Vec<f64> {
    let ratio = (b / a).ln() / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| a * (i as f64 * ratio).exp()).collect();
    v[0] = a;
    v[n - 1] = b;
    v
}

/// Derivative at `t` of the quadratic through `(x[k], f[k])`, as weights on `f`.
fn lagrange_first(x: [f64; 3], t: f64) -> [f64; 3] {
    let [x0, x1, x2] = x;
    [
        ((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2)),
        ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2)),
        ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1)),
    ]
}
