use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The coupling `g` together with the antiderivatives the functionals need.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingSpec {
    /// `g(m) = m^exponent`
    Power { exponent: f64 },
    /// Piecewise-linear `g` through `(m, g)` knots, extended linearly past both ends.
    Tabulated { knots: Vec<(f64, f64)> },
}

impl CouplingSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            CouplingSpec::Power { exponent } => {
                if !(*exponent > 0.0 && exponent.is_finite()) {
                    return Err(Error::InvalidProblem(format!(
                        "coupling exponent must be positive, got {exponent}"
                    )));
                }
            }
            CouplingSpec::Tabulated { knots } => {
                if knots.len() < 2 {
                    return Err(Error::InvalidProblem("tabulated coupling needs two knots".into()));
                }
                if knots.iter().any(|(m, g)| !(m.is_finite() && g.is_finite())) || knots[0].0 < 0.0 {
                    return Err(Error::InvalidProblem("knots must be finite with m >= 0".into()));
                }
                for w in knots.windows(2) {
                    if !(w[1].0 > w[0].0) || w[1].1 < w[0].1 {
                        return Err(Error::InvalidProblem(
                            "tabulated coupling must be nondecreasing on increasing knots".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn g(&self, m: f64) -> f64 {
        match self {
            CouplingSpec::Power { exponent } => m.powf(*exponent),
            CouplingSpec::Tabulated { knots } => {
                let (a, b) = line(knots, segment(knots, m));
                a + b * m
            }
        }
    }

    pub fn g_prime(&self, m: f64) -> f64 {
        match self {
            CouplingSpec::Power { exponent } => exponent * m.powf(exponent - 1.0),
            CouplingSpec::Tabulated { knots } => line(knots, segment(knots, m)).1,
        }
    }

    /// `int_0^m g(x) x^a dx` for `a >= 0`.
    pub fn moment(&self, a: f64, m: f64) -> f64 {
        match self {
            CouplingSpec::Power { exponent } => m.powf(exponent + a + 1.0) / (exponent + a + 1.0),
            CouplingSpec::Tabulated { knots } => {
                let last = segment(knots, m);
                let mut total = 0.0;
                let mut lo = 0.0f64;
                for k in 0..=last {
                    let hi = if k == last { m } else { knots[k + 1].0 };
                    let (c0, c1) = line(knots, k);
                    total += c0 * (hi.powf(a + 1.0) - lo.powf(a + 1.0)) / (a + 1.0)
                        + c1 * (hi.powf(a + 2.0) - lo.powf(a + 2.0)) / (a + 2.0);
                    lo = hi;
                }
                total
            }
        }
    }

    /// `G(t) = int_0^t g`.
    pub fn big_g(&self, t: f64) -> f64 {
        self.moment(0.0, t)
    }

    /// Antiderivative of `rho -> g(rho^p) rho^(1/(2 alpha + 1))`, vanishing at 0.
    /// Substituting `x = rho^p` gives `(alpha + 1/2) int_0^(rho^p) g(x) x^alpha dx`.
    pub fn g1(&self, alpha: f64, rho: f64) -> f64 {
        let p = 2.0 / (2.0 * alpha + 1.0);
        (alpha + 0.5) * self.moment(alpha, rho.powf(p))
    }
}

/// Index of the linear piece used at `m`; pieces join at the interior knots.
fn segment(knots: &[(f64, f64)], m: f64) -> usize {
    let last = knots.len() - 2;
    (1..=last).take_while(|&k| m >= knots[k].0).last().unwrap_or(0)
}

/// `(intercept, slope)` of piece `k`.
fn line(knots: &[(f64, f64)], k: usize) -> (f64, f64) {
    let (m0, g0) = knots[k];
    let (m1, g1) = knots[k + 1];
    let b = (g1 - g0) / (m1 - m0);
    (g0 - b * m0, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> CouplingSpec {
        CouplingSpec::Tabulated {
            knots: vec![(0.0, 0.0), (0.5, 0.2), (1.0, 1.0), (2.0, 1.5)],
        }
    }

    fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let e = 1e-6 * x.max(1e-3);
        (f(x + e) - f(x - e)) / (2.0 * e)
    }

    #[test]
    fn power_closed_forms() {
        let c = CouplingSpec::Power { exponent: 1.0 };
        assert_eq!(c.big_g(2.0), 2.0);
        // (alpha + 1/2) M^(beta+alpha+1)/(beta+alpha+1) at alpha = 0: rho^4/4
        assert!((c.g1(0.0, 1.5) - 1.5f64.powi(4) / 4.0).abs() < 1e-14);
        assert!((c.g1(0.0, 1.3) - c.big_g(1.3 * 1.3) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn antiderivatives_match_integrands() {
        for c in [CouplingSpec::Power { exponent: 1.7 }, table()] {
            for x in [0.2, 0.7, 1.3, 3.0] {
                assert!((central(|t| c.big_g(t), x) - c.g(x)).abs() < 1e-6, "{c:?} {x}");
                for alpha in [0.0, 0.6, 1.5] {
                    let p = 2.0 / (2.0 * alpha + 1.0);
                    let integrand = c.g(x.powf(p)) * x.powf(1.0 / (2.0 * alpha + 1.0));
                    let fd = central(|r| c.g1(alpha, r), x);
                    assert!((fd - integrand).abs() < 1e-6 * (1.0 + integrand), "{alpha} {x}");
                }
                assert!((central(|t| c.g(t), x) - c.g_prime(x)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn tabulated_interpolates_and_extends() {
        let c = table();
        assert!((c.g(0.25) - 0.1).abs() < 1e-15);
        assert!((c.g(0.75) - 0.6).abs() < 1e-15);
        assert!((c.g(3.0) - 2.0).abs() < 1e-15);
        assert_eq!(c.g_prime(1.5), 0.5);
        // int_0^1 g = 0.05 + 0.3
        assert!((c.big_g(1.0) - 0.35).abs() < 1e-15);
    }

    #[test]
    fn zero_table_is_zero() {
        let c = CouplingSpec::Tabulated {
            knots: vec![(0.0, 0.0), (1.0, 0.0)],
        };
        assert_eq!(c.g(3.0), 0.0);
        assert_eq!(c.big_g(3.0), 0.0);
        assert_eq!(c.g1(0.4, 2.0), 0.0);
    }

    #[test]
    fn validation() {
        assert!(table().validate().is_ok());
        assert!(CouplingSpec::Tabulated {
            knots: vec![(0.0, 1.0), (1.0, 0.5)]
        }
        .validate()
        .is_err());
        assert!(CouplingSpec::Power { exponent: 0.0 }.validate().is_err());
        let parsed: CouplingSpec =
            serde_json::from_str(r#"{"kind":"tabulated","knots":[[0,0],[1,2]]}"#).unwrap();
        assert!(parsed.validate().is_ok());
    }
}
