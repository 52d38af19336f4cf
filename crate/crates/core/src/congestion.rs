//! Congestion algebra shared by every solver.
//!
//! With `g(m) = m^beta` and the constant current `j`, the first-order
//! Hamilton-Jacobi equation becomes `F_j(r^sigma m^beta) = (H - V(r)) r^sigma` where
//!
//! ```text
//! F_j(t) = (j^2 / 2) t^((alpha - 2) / beta) - t,      sigma = 2 beta (d - 1) / (2 + beta - alpha).
//! ```
//!
//! Since `alpha < 2`, `F_j` is strictly decreasing and convex on `(0, inf)` and
//! onto `R` whenever `j != 0`; it has the closed-form zero
//! `t* = (j^2 / 2)^(beta / (2 + beta - alpha))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{potential_decay_profile, Potential, PotentialSpec};

pub const DEFAULT_INVERT_TOL: f64 = 1e-10;
pub const DEFAULT_EXPANSION_CAP: usize = 2200;
const NEWTON_CAP: usize = 300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `R^d`; smooth radial solutions need `u'(0) = 0`, hence `j = 0`.
    FullSpace,
    /// `R^d \ {0}`; the origin may act as a source or sink.
    PuncturedSpace,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec<P = PotentialSpec> {
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub current: f64,
    pub domain: Domain,
    pub potential: P,
}

impl<P> ProblemSpec<P> {
    pub fn new(
        dim: usize,
        alpha: f64,
        beta: f64,
        current: f64,
        domain: Domain,
        potential: P,
    ) -> Result<Self> {
        let spec = ProblemSpec {
            dim,
            alpha,
            beta,
            current,
            domain,
            potential,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidProblem(format!(
                "dimension must be at least 2, got {}",
                self.dim
            )));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if !(0.0..2.0).contains(&self.alpha) {
            return Err(Error::InvalidProblem(format!(
                "alpha must lie in [0, 2), got {}",
                self.alpha
            )));
        }
        if !self.current.is_finite() {
            return Err(Error::InvalidProblem("current must be finite".into()));
        }
        if self.domain == Domain::FullSpace && self.current != 0.0 {
            return Err(Error::InvalidProblem(format!(
                "a smooth solution on the full space carries no current, got j = {}",
                self.current
            )));
        }
        Ok(())
    }

    pub fn curve(&self) -> CongestionCurve {
        CongestionCurve::new(self.dim, self.alpha, self.beta, self.current)
    }

    pub fn sigma(&self) -> f64 {
        sigma_exponent(self.dim, self.alpha, self.beta)
    }

    /// Exponent `(d-1)(beta-alpha)/(2+beta-alpha)` of the mass integrand
    /// `r^(d-1) m(r)` as `r -> 0` for a nonzero current.
    pub fn origin_exponent(&self) -> f64 {
        let d1 = (self.dim - 1) as f64;
        d1 * (self.beta - self.alpha) / (2.0 + self.beta - self.alpha)
    }

    pub fn with_alpha(&self, alpha: f64) -> Self
    where
        P: Clone,
    {
        ProblemSpec {
            alpha,
            ..self.clone()
        }
    }

    pub fn with_current(&self, current: f64) -> Self
    where
        P: Clone,
    {
        ProblemSpec {
            current,
            ..self.clone()
        }
    }

    pub fn map_potential<Q>(self, f: impl FnOnce(P) -> Q) -> ProblemSpec<Q> {
        ProblemSpec {
            dim: self.dim,
            alpha: self.alpha,
            beta: self.beta,
            current: self.current,
            domain: self.domain,
            potential: f(self.potential),
        }
    }
}

/// `F_j` for fixed `(d, alpha, beta, j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CongestionCurve {
    pub alpha: f64,
    pub beta: f64,
    pub j: f64,
    pub sigma: f64,
}

impl CongestionCurve {
    pub fn new(dim: usize, alpha: f64, beta: f64, j: f64) -> Self {
        CongestionCurve {
            alpha,
            beta,
            j,
            sigma: sigma_exponent(dim, alpha, beta),
        }
    }

    #[inline]
    fn coefficient(&self) -> f64 {
        0.5 * self.j * self.j
    }

    #[inline]
    fn power(&self) -> f64 {
        (self.alpha - 2.0) / self.beta
    }

    /// The closed-form zero `t*` of `F_j` (zero for `j = 0`).
    pub fn zero(&self) -> f64 {
        self.coefficient()
            .powf(self.beta / (2.0 + self.beta - self.alpha))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::OutsideDomain(t));
        }
        Ok(self.eval_unchecked(t))
    }

    #[inline]
    fn eval_unchecked(&self, t: f64) -> f64 {
        if self.j == 0.0 {
            return -t;
        }
        self.coefficient() * t.powf(self.power()) - t
    }

    #[inline]
    fn derivative_unchecked(&self, t: f64) -> f64 {
        let p = self.power();
        self.coefficient() * p * t.powf(p - 1.0) - 1.0
    }

    pub fn invert(&self, y: f64) -> Result<f64> {
        self.invert_with(y, DEFAULT_INVERT_TOL, DEFAULT_EXPANSION_CAP)
    }

    /// Solves `F_j(t) = y` for `t > 0`.
    ///
    /// The bracket is grown geometrically from `t*`; inside it a Newton
    /// iteration is kept in bounds by bisection (geometric while the bracket
    /// spans more than a factor two).
    pub fn invert_with(&self, y: f64, tol: f64, expansion_cap: usize) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        if self.j == 0.0 {
            return if y < 0.0 {
                Ok(-y)
            } else {
                Err(Error::NoPositiveRoot(y))
            };
        }
        let goal = tol * (1.0 + y.abs());
        let g = |t: f64| self.eval_unchecked(t) - y;
        let t0 = self.zero();
        if y == 0.0 {
            return Ok(t0);
        }
        // g is decreasing: g(lo) >= 0 >= g(hi).
        let (mut lo, mut hi);
        let mut steps = 0;
        if y > 0.0 {
            hi = t0;
            lo = 0.5 * t0;
            while g(lo) < 0.0 {
                hi = lo;
                lo *= 0.5;
                steps += 1;
                if steps > expansion_cap || lo == 0.0 {
                    return Err(Error::BracketExpansion { iterations: steps });
                }
            }
        } else {
            lo = t0;
            hi = 2.0 * t0;
            while g(hi) > 0.0 {
                lo = hi;
                hi *= 2.0;
                steps += 1;
                if steps > expansion_cap || !hi.is_finite() {
                    return Err(Error::BracketExpansion { iterations: steps });
                }
            }
        }

        // g is convex, so Newton started from the left end stays left of the root.
        let mut t = lo;
        let mut last_step = hi - lo;
        for _ in 0..NEWTON_CAP {
            let gt = g(t);
            if gt.abs() <= goal {
                return Ok(t);
            }
            if gt > 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(t);
            }
            let newton = t - gt / self.derivative_unchecked(t);
            let in_bracket = newton > lo && newton < hi;
            let shrinking = (newton - t).abs() < 0.5 * last_step;
            let next = if in_bracket && shrinking {
                newton
            } else if hi > 2.0 * lo {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
            last_step = (next - t).abs();
            t = next;
        }
        Err(Error::NoConvergence {
            iterations: NEWTON_CAP,
            lo,
            hi,
        })
    }
}

/// `sigma = 2 beta (d - 1) / (2 + beta - alpha)`.
pub fn sigma_exponent(dim: usize, alpha: f64, beta: f64) -> f64 {
    2.0 * beta * (dim as f64 - 1.0) / (2.0 + beta - alpha)
}

/// Hypersurface area of the unit sphere in `R^d`, `2 pi^(d/2) / Gamma(d/2)`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    assert!(dim >= 1, "dimension must be at least 1");
    // Gamma(d/2) by recurrence from Gamma(1) = 1 or Gamma(1/2) = sqrt(pi).
    let mut gamma = if dim % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if dim % 2 == 0 { 1.0 } else { 0.5 };
    let half = dim as f64 / 2.0;
    while x < half {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(half) / gamma
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityOptions {
    /// Length scale multiplying the ladder `2^k`.
    pub length_scale: f64,
    /// Ladder exponents run over `-ladder_span..=ladder_span`.
    pub ladder_span: i32,
    /// Products below this magnitude at the extreme rung count as vanished.
    pub threshold: f64,
}

impl Default for AdmissibilityOptions {
    fn default() -> Self {
        AdmissibilityOptions {
            length_scale: 1.0,
            ladder_span: 20,
            threshold: 1e-8,
        }
    }
}

/// Sampled behaviour of `V(r) r^sigma` along a geometric ladder approaching 0 or infinity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayCheck {
    /// `(r, V(r) r^sigma)` ordered from the inside of the ladder toward its limit.
    pub samples: Vec<(f64, f64)>,
    /// Least-squares slope of `log|V r^sigma|` against `|log r|` over the outer rungs.
    pub slope: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub sigma: f64,
    /// `(2/d, min(2, 2/d + beta))`.
    pub window: (f64, f64),
    pub exponent_window: bool,
    pub decay_origin: DecayCheck,
    pub decay_infinity: DecayCheck,
    pub warnings: Vec<String>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.exponent_window && self.decay_origin.passes && self.decay_infinity.passes
    }
}

pub fn check_admissibility<P: Potential>(spec: &ProblemSpec<P>) -> AdmissibilityReport {
    check_admissibility_with(spec, &AdmissibilityOptions::default())
}

pub fn check_admissibility_with<P: Potential>(
    spec: &ProblemSpec<P>,
    opts: &AdmissibilityOptions,
) -> AdmissibilityReport {
    let d = spec.dim as f64;
    let sigma = spec.sigma();
    let lower = 2.0 / d;
    let upper = (2.0f64).min(2.0 / d + spec.beta);
    let exponent_window = lower < spec.alpha && spec.alpha < upper;

    let rung = |k: i32| opts.length_scale * 2f64.powi(k);
    let toward_origin: Vec<f64> = (0..=opts.ladder_span).map(|k| rung(-k)).collect();
    let toward_infinity: Vec<f64> = (0..=opts.ladder_span).map(rung).collect();
    let decay_origin = decay_check(
        potential_decay_profile(&spec.potential, sigma, &toward_origin),
        opts.threshold,
    );
    let decay_infinity = decay_check(
        potential_decay_profile(&spec.potential, sigma, &toward_infinity),
        opts.threshold,
    );

    let mut warnings = Vec::new();
    if !exponent_window {
        warnings.push(format!(
            "alpha = {} lies outside the exponent window ({lower}, {upper})",
            spec.alpha
        ));
    }
    if !decay_origin.passes {
        warnings.push(format!(
            "V(r) r^{sigma:.6} does not appear to vanish as r -> 0 (slope {:.3})",
            decay_origin.slope
        ));
    }
    if !decay_infinity.passes {
        warnings.push(format!(
            "V(r) r^{sigma:.6} does not appear to vanish as r -> inf (slope {:.3})",
            decay_infinity.slope
        ));
    }
    AdmissibilityReport {
        sigma,
        window: (lower, upper),
        exponent_window,
        decay_origin,
        decay_infinity,
        warnings,
    }
}

/// Passes when the outermost product is below `threshold`, or when the
/// log-log envelope of the outer half of the ladder has a negative slope.
fn decay_check(samples: Vec<(f64, f64)>, threshold: f64) -> DecayCheck {
    let outer = &samples[samples.len() / 2..];
    let points: Vec<(f64, f64)> = outer
        .iter()
        .filter(|(_, p)| *p != 0.0 && p.is_finite())
        .map(|(r, p)| (r.ln().abs(), p.abs().ln()))
        .collect();
    let slope = if points.len() >= 2 {
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NEG_INFINITY
    };
    let last = samples.last().map(|s| s.1.abs()).unwrap_or(0.0);
    let passes = last <= threshold || slope < -1e-3;
    DecayCheck {
        samples,
        slope,
        passes,
    }
}
