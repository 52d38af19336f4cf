//! Radial potentials `V(r)`.
//!
//! The two oscillating kinds share the phase convention `sin(omega * pi * (r + phase))`
//! with `phase = 1/4` by default, so `omega = 1` and `omega = 2` give the two
//! frequency readings used by the bundled scenarios.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Anything that can be evaluated as a radial potential.
pub trait Potential {
    fn value(&self, r: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Potential for F {
    fn value(&self, r: f64) -> f64 {
        self(r)
    }
}

fn one() -> f64 {
    1.0
}

fn quarter() -> f64 {
    0.25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `A * exp(-(r/s)^2 / 2) * sin(omega * pi * (r + phase))`
    GaussianSine {
        frequency: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "quarter")]
        phase: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `A * (1 + r)^(-p) * sin(omega * pi * (r + phase))`
    PowerSine {
        power: f64,
        frequency: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "quarter")]
        phase: f64,
    },
    /// `A * exp(-(r/s)^2 / 2)`
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Constant { value: f64 },
    /// `shift + sum_k weight_k * V_k(r)`
    Composite {
        terms: Vec<WeightedPotential>,
        #[serde(default)]
        shift: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedPotential {
    pub weight: f64,
    pub potential: PotentialSpec,
}

impl PotentialSpec {
    pub fn gaussian_sine(frequency: f64) -> Self {
        PotentialSpec::GaussianSine {
            frequency,
            amplitude: 1.0,
            phase: 0.25,
            scale: 1.0,
        }
    }

    pub fn power_sine(power: f64, frequency: f64) -> Self {
        PotentialSpec::PowerSine {
            power,
            frequency,
            amplitude: 1.0,
            phase: 0.25,
        }
    }

    pub fn gaussian() -> Self {
        PotentialSpec::Gaussian {
            amplitude: 1.0,
            scale: 1.0,
        }
    }

    pub fn constant(value: f64) -> Self {
        PotentialSpec::Constant { value }
    }

    /// `self + shift`.
    pub fn shifted(self, shift: f64) -> Self {
        PotentialSpec::Composite {
            terms: vec![WeightedPotential {
                weight: 1.0,
                potential: self,
            }],
            shift,
        }
    }

    /// `weight * self`.
    pub fn scaled(self, weight: f64) -> Self {
        PotentialSpec::Composite {
            terms: vec![WeightedPotential {
                weight,
                potential: self,
            }],
            shift: 0.0,
        }
    }

    /// Short human-readable label used in file metadata and plot legends.
    pub fn describe(&self) -> String {
        match self {
            PotentialSpec::GaussianSine {
                frequency,
                amplitude,
                phase,
                scale,
            } => format!(
                "{amplitude}*exp(-(r/{scale})^2/2)*sin({frequency}*pi*(r+{phase}))"
            ),
            PotentialSpec::PowerSine {
                power,
                frequency,
                amplitude,
                phase,
            } => format!("{amplitude}*(1+r)^(-{power})*sin({frequency}*pi*(r+{phase}))"),
            PotentialSpec::Gaussian { amplitude, scale } => {
                format!("{amplitude}*exp(-(r/{scale})^2/2)")
            }
            PotentialSpec::Constant { value } => format!("{value}"),
            PotentialSpec::Composite { terms, shift } => {
                let mut parts: Vec<String> = terms
                    .iter()
                    .map(|t| format!("{}*[{}]", t.weight, t.potential.describe()))
                    .collect();
                if *shift != 0.0 || parts.is_empty() {
                    parts.push(format!("{shift}"));
                }
                parts.join(" + ")
            }
        }
    }
}

impl Potential for PotentialSpec {
    fn value(&self, r: f64) -> f64 {
        eval_potential(self, r)
    }
}

pub fn eval_potential(v: &PotentialSpec, r: f64) -> f64 {
    match v {
        PotentialSpec::GaussianSine {
            frequency,
            amplitude,
            phase,
            scale,
        } => {
            let x = r / scale;
            amplitude * (-0.5 * x * x).exp() * (frequency * PI * (r + phase)).sin()
        }
        PotentialSpec::PowerSine {
            power,
            frequency,
            amplitude,
            phase,
        } => amplitude * (1.0 + r).powf(-power) * (frequency * PI * (r + phase)).sin(),
        PotentialSpec::Gaussian { amplitude, scale } => {
            let x = r / scale;
            amplitude * (-0.5 * x * x).exp()
        }
        PotentialSpec::Constant { value } => *value,
        PotentialSpec::Composite { terms, shift } => {
            shift
                + terms
                    .iter()
                    .map(|t| t.weight * eval_potential(&t.potential, r))
                    .sum::<f64>()
        }
    }
}

/// Samples `(r, V(r) * r^sigma)` along `ladder`.
pub fn potential_decay_profile<P: Potential + ?Sized>(
    v: &P,
    sigma: f64,
    ladder: &[f64],
) -> Vec<(f64, f64)> {
    ladder
        .iter()
        .map(|&r| (r, v.value(r) * r.powf(sigma)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn phase_quarter_puts_peak_at_origin() {
        assert!((PotentialSpec::gaussian_sine(2.0).value(0.0) - 1.0).abs() < 1e-15);
        assert!((PotentialSpec::power_sine(1.5, 2.0).value(0.0) - 1.0).abs() < 1e-15);
        // omega = 1 reading: sin(pi/4)
        let w1 = PotentialSpec::gaussian_sine(1.0).value(0.0);
        assert!((w1 - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constant_is_constant() {
        let v = PotentialSpec::constant(0.0);
        for r in [0.0, 0.3, 7.0, 1e6] {
            assert_eq!(v.value(r), 0.0);
        }
    }

    #[test]
    fn composite_is_affine() {
        let base = PotentialSpec::gaussian_sine(2.0);
        let v = base.clone().scaled(3.0).shifted(-1.5);
        for r in [0.0, 0.4, 2.2] {
            assert!((v.value(r) - (3.0 * base.value(r) - 1.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn decay_profile_of_unit_constant_is_the_ladder() {
        let p = potential_decay_profile(&PotentialSpec::constant(1.0), 1.0, &[0.1, 1.0, 10.0]);
        let products: Vec<f64> = p.iter().map(|x| x.1).collect();
        assert_eq!(products, vec![0.1, 1.0, 10.0]);
    }

    #[test]
    fn gaussian_decay_profile_vanishes_at_infinity() {
        let sigma = 2.0 / 1.7;
        let ladder: Vec<f64> = (1..=12).map(|k| 2.0 * k as f64).collect();
        let p = potential_decay_profile(&PotentialSpec::gaussian(), sigma, &ladder);
        for w in p.windows(2) {
            assert!(w[1].1 < w[0].1);
        }
        assert!(p.last().unwrap().1 < 1e-25);
    }

    #[test]
    fn gaussian_sine_decay_profile_small_near_origin() {
        let sigma = 2.0 / 1.7;
        let r = 1e-3;
        let p = potential_decay_profile(&PotentialSpec::gaussian_sine(2.0), sigma, &[r]);
        let direct = (-0.5 * r * r).exp() * (2.0 * PI * (r + 0.25)).sin() * r.powf(sigma);
        assert!((p[0].1 - direct).abs() < 1e-18);
        assert!(p[0].1 < 3e-4);
    }

    #[test]
    fn serde_shape() {
        let v: PotentialSpec =
            serde_json::from_str(r#"{"kind":"power_sine","power":1.5,"frequency":2}"#).unwrap();
        assert_eq!(v, PotentialSpec::power_sine(1.5, 2.0));
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"kind":"constant","value":1,"x":2}"#)
            .is_err());
    }

    proptest! {
        #[test]
        fn bounded_by_envelope(r in 0.0f64..50.0, w in 0.5f64..3.0, p in 0.5f64..3.0) {
            let gs = PotentialSpec::gaussian_sine(w).value(r);
            prop_assert!(gs.abs() <= (-0.5 * r * r).exp() + 1e-15);
            let ps = PotentialSpec::power_sine(p, w).value(r);
            prop_assert!(ps.abs() <= (1.0 + r).powf(-p) + 1e-15);
            prop_assert!(gs.is_finite() && ps.is_finite());
        }
    }
}
