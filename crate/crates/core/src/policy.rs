//! Threshold stopping rules: accept the first offer at or above a threshold
//! `T` drawn once before the sequence starts.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::compensated_sum;

const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdPolicy {
    Deterministic {
        t: f64,
    },
    /// `T = thresholds[j]` with probability `probs[j]`.
    FiniteRandom {
        thresholds: Vec<f64>,
        probs: Vec<f64>,
    },
    /// `T` uniform on `(lo, hi)`.
    UniformRandom {
        lo: f64,
        hi: f64,
    },
}

impl ThresholdPolicy {
    pub fn deterministic(t: f64) -> Result<Self> {
        let p = Self::Deterministic { t };
        p.validate()?;
        Ok(p)
    }

    pub fn finite_random(thresholds: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let p = Self::FiniteRandom { thresholds, probs };
        p.validate()?;
        Ok(p)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let p = Self::UniformRandom { lo, hi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Deterministic { t } => {
                if !t.is_finite() {
                    return Err(invalid(format!("threshold must be finite, got {t}")));
                }
            }
            Self::FiniteRandom { thresholds, probs } => {
                if thresholds.is_empty() || thresholds.len() != probs.len() {
                    return Err(invalid(
                        "need equally many thresholds and probabilities, at least one",
                    ));
                }
                if thresholds.iter().any(|t| !t.is_finite()) {
                    return Err(invalid("thresholds must be finite"));
                }
                if thresholds.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(invalid("thresholds must be strictly increasing"));
                }
                if probs.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
                    return Err(invalid("threshold probabilities must lie in (0, 1]"));
                }
                let total = compensated_sum(probs.iter().copied());
                if (total - 1.0).abs() > PROB_TOL {
                    return Err(invalid(format!(
                        "threshold probabilities sum to {total}, not 1"
                    )));
                }
            }
            Self::UniformRandom { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(invalid(format!(
                        "uniform threshold needs lo < hi, got ({lo}, {hi})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `P(T <= x)`.
    pub fn threshold_cdf(&self, x: f64) -> f64 {
        match self {
            Self::Deterministic { t } => {
                if x >= *t {
                    1.0
                } else {
                    0.0
                }
            }
            Self::FiniteRandom { thresholds, probs } => thresholds
                .iter()
                .zip(probs)
                .filter(|(t, _)| **t <= x)
                .map(|(_, p)| p)
                .sum::<f64>()
                .min(1.0),
            Self::UniformRandom { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// Points where the threshold law has mass or a kink.
    pub fn support_points(&self) -> Vec<f64> {
        match self {
            Self::Deterministic { t } => vec![*t],
            Self::FiniteRandom { thresholds, .. } => thresholds.clone(),
            Self::UniformRandom { lo, hi } => vec![*lo, *hi],
        }
    }

    /// Replaces a uniform threshold by `atoms` equiprobable atoms at the cell
    /// midpoints. Other kinds are returned unchanged.
    pub fn discretize(&self, atoms: usize) -> Result<Self> {
        match self {
            Self::UniformRandom { lo, hi } => {
                if atoms == 0 {
                    return Err(invalid("discretisation needs at least one atom"));
                }
                let h = (hi - lo) / atoms as f64;
                let thresholds = (0..atoms).map(|j| lo + (j as f64 + 0.5) * h).collect();
                Self::finite_random(thresholds, vec![1.0 / atoms as f64; atoms])
            }
            other => Ok(other.clone()),
        }
    }

    /// Expected payoff on a fixed tuple: the value at the first index with
    /// `v_i >= T`, or 0 if none qualifies. Exact for every policy kind.
    pub fn payoff_on_tuple(&self, values: &[f64]) -> f64 {
        match self {
            Self::Deterministic { t } => first_crossing(values, *t),
            Self::FiniteRandom { thresholds, probs } => thresholds
                .iter()
                .zip(probs)
                .map(|(&t, &p)| p * first_crossing(values, t))
                .sum(),
            Self::UniformRandom { .. } => {
                // The accepted value only changes at running-maximum records:
                // T in (previous record, v_j] stops at record v_j.
                let mut acc = 0.0;
                let mut prev = f64::NEG_INFINITY;
                for &v in values {
                    if v > prev {
                        acc += v * (self.threshold_cdf(v) - self.threshold_cdf(prev));
                        prev = v;
                    }
                }
                acc
            }
        }
    }

    pub fn to_spec(&self) -> PolicySpec {
        match self {
            Self::Deterministic { t } => PolicySpec::Deterministic { t: *t },
            Self::FiniteRandom { thresholds, probs } => PolicySpec::Finite {
                thresholds: thresholds.clone(),
                probs: probs.clone(),
            },
            Self::UniformRandom { lo, hi } => PolicySpec::Uniform { lo: *lo, hi: *hi },
        }
    }
}

fn first_crossing(values: &[f64], t: f64) -> f64 {
    values.iter().copied().find(|&v| v >= t).unwrap_or(0.0)
}

/// Random threshold on the grid `p* - (n-1)ε, …, p* - ε, p*` with equal
/// weights. `eps = 0` gives the deterministic monopoly-price rule.
pub fn epsilon_grid_policy(p_star: f64, n: usize, eps: f64) -> Result<ThresholdPolicy> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(invalid(format!(
            "grid spacing must be nonnegative, got {eps}"
        )));
    }
    if eps == 0.0 || n == 1 {
        return ThresholdPolicy::deterministic(p_star);
    }
    let lowest = p_star - (n - 1) as f64 * eps;
    if !(lowest > 0.0) {
        return Err(invalid(format!(
            "lowest grid threshold {lowest} is not positive (p* = {p_star}, n = {n}, eps = {eps})"
        )));
    }
    let thresholds = (0..n).map(|i| p_star - (n - 1 - i) as f64 * eps).collect();
    ThresholdPolicy::finite_random(thresholds, vec![1.0 / n as f64; n])
}

/// JSON form of a policy, tagged by `kind`:
/// `{"kind":"uniform","lo":0.4,"hi":0.6}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    Deterministic {
        t: f64,
    },
    #[serde(alias = "finite_random")]
    Finite {
        thresholds: Vec<f64>,
        probs: Vec<f64>,
    },
    #[serde(alias = "uniform_random")]
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl TryFrom<PolicySpec> for ThresholdPolicy {
    type Error = Error;

    fn try_from(spec: PolicySpec) -> Result<Self> {
        match spec {
            PolicySpec::Deterministic { t } => Self::deterministic(t),
            PolicySpec::Finite { thresholds, probs } => Self::finite_random(thresholds, probs),
            PolicySpec::Uniform { lo, hi } => Self::uniform(lo, hi),
        }
    }
}
