//! Attack and defence efficiency families.
//!
//! Increasing families (`ExpAttack`, `Power`, increasing `Linear`) model an
//! efficiency `f` with `f(0) = 0`. Decreasing families (`InvG`, `ExpG`,
//! `QuadG`, decreasing `Linear`) model the defence inefficiency `g̃ = 1 - g`
//! with `g̃(0) = 1`.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// A parametric efficiency function with closed-form calculus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum EfficiencyFunction {
    /// `1 - e^(-x)` when `a` is absent, `1 - (1+x)^(-a)` otherwise.
    ExpAttack {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
    },
    /// `1 / (1 + θy)`
    InvG { theta: f64 },
    /// `e^(-θy)`
    ExpG { theta: f64 },
    /// `(1 - θy)^2` on `[0, 1/θ)`
    QuadG { theta: f64 },
    /// `x^a` with `0 < a <= 1`
    Power { a: f64 },
    /// `intercept + slope * z`
    Linear {
        #[serde(default)]
        intercept: f64,
        #[serde(default = "unit_slope")]
        slope: f64,
    },
}

fn unit_slope() -> f64 {
    1.0
}

/// Monotonicity of `value'(z) / value(z)`; for a defence inefficiency this is
/// the relative ineffectiveness of defence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RidClass {
    Increasing,
    Constant,
    Decreasing,
}

impl EfficiencyFunction {
    pub fn exp_attack() -> Self {
        EfficiencyFunction::ExpAttack { a: None }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            EfficiencyFunction::ExpAttack { .. } => "ExpAttack",
            EfficiencyFunction::InvG { .. } => "InvG",
            EfficiencyFunction::ExpG { .. } => "ExpG",
            EfficiencyFunction::QuadG { .. } => "QuadG",
            EfficiencyFunction::Power { .. } => "Power",
            EfficiencyFunction::Linear { .. } => "Linear",
        }
    }

    /// True for the families that model an efficiency starting at 0.
    pub fn is_increasing(&self) -> bool {
        match *self {
            EfficiencyFunction::ExpAttack { .. } | EfficiencyFunction::Power { .. } => true,
            EfficiencyFunction::Linear { slope, .. } => slope > 0.0,
            _ => false,
        }
    }

    /// True for the defence-inefficiency families.
    pub fn is_decreasing(&self) -> bool {
        match *self {
            EfficiencyFunction::InvG { .. } | EfficiencyFunction::ExpG { .. } | EfficiencyFunction::QuadG { .. } => {
                true
            }
            EfficiencyFunction::Linear { slope, .. } => slope < 0.0,
            _ => false,
        }
    }

    /// Exclusive upper bound of the valid argument range.
    pub fn domain_upper(&self) -> Option<f64> {
        match *self {
            EfficiencyFunction::QuadG { theta } => Some(1.0 / theta),
            _ => None,
        }
    }

    /// Limit of the value as the argument grows without bound.
    pub fn asymptote(&self) -> f64 {
        match *self {
            EfficiencyFunction::ExpAttack { .. } => 1.0,
            EfficiencyFunction::InvG { .. } | EfficiencyFunction::ExpG { .. } => 0.0,
            EfficiencyFunction::QuadG { .. } => 0.0,
            EfficiencyFunction::Power { .. } => f64::INFINITY,
            EfficiencyFunction::Linear { slope, .. } => {
                if slope > 0.0 {
                    f64::INFINITY
                } else if slope < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    0.0
                }
            }
        }
    }

    fn check_domain(&self, z: f64) -> Result<(), ModelError> {
        let upper = self.domain_upper().unwrap_or(f64::INFINITY);
        if !(z >= 0.0) || z >= upper || z.is_infinite() {
            return Err(ModelError::Domain {
                family: self.family_name(),
                z,
                upper,
            });
        }
        Ok(())
    }

    pub fn value(&self, z: f64) -> Result<f64, ModelError> {
        self.check_domain(z)?;
        Ok(match *self {
            EfficiencyFunction::ExpAttack { a: None } => -(-z).exp_m1(),
            EfficiencyFunction::ExpAttack { a: Some(a) } => -(-a * z.ln_1p()).exp_m1(),
            EfficiencyFunction::InvG { theta } => 1.0 / (1.0 + theta * z),
            EfficiencyFunction::ExpG { theta } => (-theta * z).exp(),
            EfficiencyFunction::QuadG { theta } => (1.0 - theta * z).powi(2),
            EfficiencyFunction::Power { a } => {
                if z == 0.0 {
                    0.0
                } else {
                    z.powf(a)
                }
            }
            EfficiencyFunction::Linear { intercept, slope } => intercept + slope * z,
        })
    }

    pub fn derivative(&self, z: f64) -> Result<f64, ModelError> {
        self.check_domain(z)?;
        Ok(match *self {
            EfficiencyFunction::ExpAttack { a: None } => (-z).exp(),
            EfficiencyFunction::ExpAttack { a: Some(a) } => a * (-(a + 1.0) * z.ln_1p()).exp(),
            EfficiencyFunction::InvG { theta } => -theta / (1.0 + theta * z).powi(2),
            EfficiencyFunction::ExpG { theta } => -theta * (-theta * z).exp(),
            EfficiencyFunction::QuadG { theta } => -2.0 * theta * (1.0 - theta * z),
            EfficiencyFunction::Power { a } => {
                if a == 1.0 {
                    1.0
                } else if z == 0.0 {
                    f64::INFINITY
                } else {
                    a * z.powf(a - 1.0)
                }
            }
            EfficiencyFunction::Linear { slope, .. } => slope,
        })
    }

    pub fn second_derivative(&self, z: f64) -> Result<f64, ModelError> {
        self.check_domain(z)?;
        Ok(match *self {
            EfficiencyFunction::ExpAttack { a: None } => -(-z).exp(),
            EfficiencyFunction::ExpAttack { a: Some(a) } => -a * (a + 1.0) * (-(a + 2.0) * z.ln_1p()).exp(),
            EfficiencyFunction::InvG { theta } => 2.0 * theta * theta / (1.0 + theta * z).powi(3),
            EfficiencyFunction::ExpG { theta } => theta * theta * (-theta * z).exp(),
            EfficiencyFunction::QuadG { theta } => 2.0 * theta * theta,
            EfficiencyFunction::Power { a } => {
                if a == 1.0 {
                    0.0
                } else if z == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    a * (a - 1.0) * z.powf(a - 2.0)
                }
            }
            EfficiencyFunction::Linear { .. } => 0.0,
        })
    }

    /// Inverse of the first derivative.
    ///
    /// Increasing families return 0 for `v >= f'(0)`; decreasing families
    /// return 0 for `v <= g̃'(0)`. Both cases are the zero-allocation branch
    /// of the first-order conditions.
    pub fn inverse_derivative(&self, v: f64) -> Result<f64, ModelError> {
        let range = || ModelError::Range {
            family: self.family_name(),
            v,
        };
        if v.is_nan() {
            return Err(range());
        }
        match *self {
            EfficiencyFunction::ExpAttack { a } => {
                let slope0 = a.unwrap_or(1.0);
                if v >= slope0 {
                    Ok(0.0)
                } else if v <= 0.0 {
                    Err(range())
                } else {
                    Ok(match a {
                        None => -v.ln(),
                        Some(a) => (v / a).powf(-1.0 / (a + 1.0)) - 1.0,
                    })
                }
            }
            EfficiencyFunction::Power { a } => {
                if a == 1.0 {
                    if v >= 1.0 {
                        Ok(0.0)
                    } else {
                        Err(range())
                    }
                } else if v <= 0.0 {
                    Err(range())
                } else {
                    Ok((v / a).powf(1.0 / (a - 1.0)))
                }
            }
            EfficiencyFunction::InvG { theta } => {
                if v <= -theta {
                    Ok(0.0)
                } else if v >= 0.0 {
                    Err(range())
                } else {
                    Ok(((theta / -v).sqrt() - 1.0) / theta)
                }
            }
            EfficiencyFunction::ExpG { theta } => {
                if v <= -theta {
                    Ok(0.0)
                } else if v >= 0.0 {
                    Err(range())
                } else {
                    Ok((theta / -v).ln() / theta)
                }
            }
            EfficiencyFunction::QuadG { theta } => {
                if v <= -2.0 * theta {
                    Ok(0.0)
                } else if v >= 0.0 {
                    Err(range())
                } else {
                    Ok((1.0 + v / (2.0 * theta)) / theta)
                }
            }
            EfficiencyFunction::Linear { slope, .. } => {
                if (slope > 0.0 && v >= slope) || (slope < 0.0 && v <= slope) {
                    Ok(0.0)
                } else {
                    Err(range())
                }
            }
        }
    }

    /// Monotonicity class of `value' / value`.
    pub fn rid_class(&self) -> RidClass {
        match *self {
            EfficiencyFunction::InvG { .. } => RidClass::Increasing,
            EfficiencyFunction::ExpG { .. } => RidClass::Constant,
            EfficiencyFunction::QuadG { .. } => RidClass::Decreasing,
            EfficiencyFunction::ExpAttack { .. } | EfficiencyFunction::Power { .. } => RidClass::Decreasing,
            // d/dz [s / (b + s z)] = -s^2 / (b + s z)^2
            EfficiencyFunction::Linear { slope, .. } => {
                if slope == 0.0 {
                    RidClass::Constant
                } else {
                    RidClass::Decreasing
                }
            }
        }
    }

    /// Parameter sanity; returns a message per violated constraint.
    pub(crate) fn parameter_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = |name: &str, v: f64, out: &mut Vec<String>| {
            if !(v > 0.0 && v.is_finite()) {
                out.push(format!(
                    "{} parameter {name} must be positive, got {v}",
                    self.family_name()
                ));
            }
        };
        match *self {
            EfficiencyFunction::ExpAttack { a: Some(a) } => positive("a", a, &mut out),
            EfficiencyFunction::ExpAttack { a: None } => {}
            EfficiencyFunction::InvG { theta }
            | EfficiencyFunction::ExpG { theta }
            | EfficiencyFunction::QuadG { theta } => positive("theta", theta, &mut out),
            EfficiencyFunction::Power { a } => {
                if !(a > 0.0 && a <= 1.0) {
                    out.push(format!("Power parameter a must lie in (0, 1], got {a}"));
                }
            }
            EfficiencyFunction::Linear { intercept, slope } => {
                if !intercept.is_finite() || !slope.is_finite() {
                    out.push("Linear coefficients must be finite".to_string());
                }
            }
        }
        out
    }
}

pub fn eval_eff(f: &EfficiencyFunction, z: f64) -> Result<f64, ModelError> {
    f.value(z)
}

pub fn eval_eff_prime(f: &EfficiencyFunction, z: f64) -> Result<f64, ModelError> {
    f.derivative(z)
}

pub fn inv_eff_prime(f: &EfficiencyFunction, v: f64) -> Result<f64, ModelError> {
    f.inverse_derivative(v)
}

pub fn rid_class(f: &EfficiencyFunction) -> RidClass {
    f.rid_class()
}
