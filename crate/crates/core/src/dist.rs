//! The distribution of the maximum offer.
//!
//! A [`MaxDistribution`] supplies every evaluation the bounds need: CDF,
//! survival `P(X >= t)`, density and its first derivatives, quantile, moments
//! and partial expectations `∫ t dF(t)`. Atoms are handled exactly; the
//! continuous part is integrated with adaptive Simpson quadrature split at
//! quantiles of the distribution.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::numeric::{compensated_sum, integrate_split, QUAD_TOL};

/// Upper quantile level where infinite ranges are truncated.
pub const TAIL_LEVEL: f64 = 1.0 - 1e-12;

const PROB_TOL: f64 = 1e-12;

/// Probability levels used as quadrature split points for continuous families.
const SPLIT_LEVELS: [f64; 26] = [
    1e-10,
    1e-7,
    1e-4,
    1e-3,
    0.01,
    0.05,
    0.1,
    0.2,
    0.3,
    0.4,
    0.5,
    0.6,
    0.7,
    0.8,
    0.9,
    0.95,
    0.99,
    0.999,
    1.0 - 1e-4,
    1.0 - 1e-5,
    1.0 - 1e-6,
    1.0 - 1e-7,
    1.0 - 1e-8,
    1.0 - 1e-9,
    1.0 - 1e-10,
    1.0 - 1e-11,
];

#[derive(Debug, Clone, PartialEq)]
pub enum DistKind {
    /// `F(t) = 1 - exp(-rate t)`.
    Exponential { rate: f64 },
    /// `F(t) = exp(-(t / scale)^(-shape))`.
    Frechet { shape: f64, scale: f64 },
    /// Finitely many atoms `(value, probability)`, values strictly increasing.
    PointMasses { atoms: Vec<(f64, f64)> },
    /// Equal-revenue law: `F(t) = 1 - pi/t` on `(pi, k)` with an atom of mass
    /// `pi/k` at `k`.
    TruncatedPareto { pi: f64, k: f64 },
    /// `X = factor * Y` with `Y ~ base`.
    Scaled {
        base: Box<MaxDistribution>,
        factor: f64,
    },
}

/// Distribution `F_max` of the maximum offer.
///
/// Immutable once built; every method is a pure function of the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxDistribution {
    kind: DistKind,
    support_lo: f64,
    support_hi: f64,
}

impl MaxDistribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(invalid(format!(
                "exponential rate must be positive, got {rate}"
            )));
        }
        Ok(Self {
            kind: DistKind::Exponential { rate },
            support_lo: 0.0,
            support_hi: f64::INFINITY,
        })
    }

    pub fn frechet(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(invalid(format!(
                "Fréchet shape must be positive, got {shape}"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!(
                "Fréchet scale must be positive, got {scale}"
            )));
        }
        Ok(Self {
            kind: DistKind::Frechet { shape, scale },
            support_lo: 0.0,
            support_hi: f64::INFINITY,
        })
    }

    pub fn point_masses(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("point masses need at least one atom"));
        }
        for w in atoms.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(invalid("atom values must be strictly increasing"));
            }
        }
        if let Some(&(v, p)) = atoms
            .iter()
            .find(|(v, p)| !(v.is_finite() && *v >= 0.0 && *p > 0.0 && *p <= 1.0))
        {
            return Err(invalid(format!("bad atom ({v}, {p})")));
        }
        let total = compensated_sum(atoms.iter().map(|a| a.1));
        if (total - 1.0).abs() > PROB_TOL {
            return Err(invalid(format!("atom probabilities sum to {total}, not 1")));
        }
        let hi = atoms[atoms.len() - 1].0;
        Ok(Self {
            kind: DistKind::PointMasses { atoms },
            support_lo: 0.0,
            support_hi: hi,
        })
    }

    pub fn truncated_pareto(pi: f64, k: f64) -> Result<Self> {
        if !(pi > 0.0 && pi.is_finite() && k.is_finite() && k >= pi) {
            return Err(invalid(format!(
                "truncated Pareto needs 0 < pi <= k, got pi={pi}, k={k}"
            )));
        }
        Ok(Self {
            kind: DistKind::TruncatedPareto { pi, k },
            support_lo: 0.0,
            support_hi: k,
        })
    }

    pub fn scaled(base: MaxDistribution, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(invalid(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        let (lo, hi) = (base.support_lo * factor, base.support_hi * factor);
        Ok(Self {
            kind: DistKind::Scaled {
                base: Box::new(base),
                factor,
            },
            support_lo: lo,
            support_hi: hi,
        })
    }

    /// Overrides the lower support bound `w_0`. It must not exceed the first
    /// point carrying probability mass.
    pub fn with_support_lo(mut self, lo: f64) -> Result<Self> {
        if !(lo >= 0.0) || self.cdf_left(lo) > 0.0 {
            return Err(invalid(format!(
                "support lower bound {lo} cuts off probability mass"
            )));
        }
        self.support_lo = lo;
        Ok(self)
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    pub fn support_lo(&self) -> f64 {
        self.support_lo
    }

    pub fn support_hi(&self) -> f64 {
        self.support_hi
    }

    /// True when the law has no atoms.
    pub fn is_continuous(&self) -> bool {
        match &self.kind {
            DistKind::Exponential { .. } | DistKind::Frechet { .. } => true,
            DistKind::PointMasses { .. } | DistKind::TruncatedPareto { .. } => false,
            DistKind::Scaled { base, .. } => base.is_continuous(),
        }
    }

    /// True for purely atomic laws.
    pub fn is_discrete(&self) -> bool {
        match &self.kind {
            DistKind::PointMasses { .. } => true,
            DistKind::Scaled { base, .. } => base.is_discrete(),
            _ => false,
        }
    }

    /// Atoms `(value, mass)` in increasing order.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match &self.kind {
            DistKind::Exponential { .. } | DistKind::Frechet { .. } => Vec::new(),
            DistKind::PointMasses { atoms } => atoms.clone(),
            DistKind::TruncatedPareto { pi, k } => vec![(*k, pi / k)],
            DistKind::Scaled { base, factor } => base
                .atoms()
                .into_iter()
                .map(|(v, p)| (v * factor, p))
                .collect(),
        }
    }

    /// `P(X = t)`.
    pub fn atom_mass(&self, t: f64) -> f64 {
        match &self.kind {
            DistKind::Exponential { .. } | DistKind::Frechet { .. } => 0.0,
            DistKind::PointMasses { atoms } => atoms.iter().find(|a| a.0 == t).map_or(0.0, |a| a.1),
            DistKind::TruncatedPareto { pi, k } => {
                if t == *k {
                    pi / k
                } else {
                    0.0
                }
            }
            DistKind::Scaled { base, factor } => base.atom_mass(t / factor),
        }
    }

    /// Right-continuous CDF `P(X <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        match &self.kind {
            DistKind::Exponential { rate } => {
                if t <= 0.0 {
                    0.0
                } else {
                    -(-rate * t).exp_m1()
                }
            }
            DistKind::Frechet { shape, scale } => {
                if t <= 0.0 {
                    0.0
                } else {
                    (-(t / scale).powf(-shape)).exp()
                }
            }
            DistKind::PointMasses { atoms } => {
                let s: f64 = atoms.iter().filter(|a| a.0 <= t).map(|a| a.1).sum();
                s.min(1.0)
            }
            DistKind::TruncatedPareto { pi, k } => {
                if t <= *pi {
                    0.0
                } else if t < *k {
                    1.0 - pi / t
                } else {
                    1.0
                }
            }
            DistKind::Scaled { base, factor } => base.cdf(t / factor),
        }
    }

    /// Left limit `P(X < t)`.
    pub fn cdf_left(&self, t: f64) -> f64 {
        1.0 - self.sf(t)
    }

    /// `P(X >= t)` without argument checks; negative `t` gives 1.
    pub fn sf(&self, t: f64) -> f64 {
        match &self.kind {
            DistKind::Exponential { rate } => {
                if t <= 0.0 {
                    1.0
                } else {
                    (-rate * t).exp()
                }
            }
            DistKind::Frechet { shape, scale } => {
                if t <= 0.0 {
                    1.0
                } else {
                    -(-(t / scale).powf(-shape)).exp_m1()
                }
            }
            DistKind::PointMasses { atoms } => {
                let s: f64 = atoms.iter().filter(|a| a.0 >= t).map(|a| a.1).sum();
                s.min(1.0)
            }
            DistKind::TruncatedPareto { pi, k } => {
                if t <= *pi {
                    1.0
                } else if t <= *k {
                    pi / t
                } else {
                    0.0
                }
            }
            DistKind::Scaled { base, factor } => base.sf(t / factor),
        }
    }

    /// `P(X >= t)`, the left-limit survival function. Atoms at `t` count.
    pub fn survival(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid(format!("survival needs t >= 0, got {t}")));
        }
        Ok(self.sf(t))
    }

    /// Density of the absolutely continuous part.
    pub fn density(&self, t: f64) -> Result<f64> {
        self.derivative(t, 1)
    }

    /// Analytic `F^(order)(t)` for `order` in 1..=3.
    pub fn derivative(&self, t: f64, order: u8) -> Result<f64> {
        if !(1..=3).contains(&order) {
            return Err(invalid(format!(
                "derivative order must be 1, 2 or 3, got {order}"
            )));
        }
        let o = i32::from(order);
        match &self.kind {
            DistKind::PointMasses { .. } => Err(Error::UnsupportedForDiscrete("derivative")),
            DistKind::Exponential { rate } => {
                if t < 0.0 {
                    return Ok(0.0);
                }
                let sign = if order % 2 == 1 { 1.0 } else { -1.0 };
                Ok(sign * rate.powi(o) * (-rate * t).exp())
            }
            DistKind::Frechet { shape, scale } => {
                if t <= 0.0 {
                    return Ok(0.0);
                }
                let f = self.cdf(t);
                if f == 0.0 {
                    return Ok(0.0);
                }
                // phi = (log F)'
                let phi = shape * (t / scale).powf(-shape) / t;
                let dphi = -(shape + 1.0) * phi / t;
                let ddphi = (shape + 1.0) * (shape + 2.0) * phi / (t * t);
                Ok(match order {
                    1 => f * phi,
                    2 => f * (phi * phi + dphi),
                    _ => f * (phi * phi * phi + 3.0 * phi * dphi + ddphi),
                })
            }
            DistKind::TruncatedPareto { pi, k } => {
                if t < *pi || t > *k {
                    return Ok(0.0);
                }
                Ok(match order {
                    1 => pi / (t * t),
                    2 => -2.0 * pi / t.powi(3),
                    _ => 6.0 * pi / t.powi(4),
                })
            }
            DistKind::Scaled { base, factor } => {
                Ok(base.derivative(t / factor, order)? / factor.powi(o))
            }
        }
    }

    /// Central finite-difference estimate of `F^(order)(t)`, built on the
    /// density for orders 2 and 3 and on the CDF for order 1.
    pub fn derivative_numeric(&self, t: f64, order: u8) -> Result<f64> {
        if self.is_discrete() {
            return Err(Error::UnsupportedForDiscrete("derivative"));
        }
        let h = (1e-5 * t.abs()).max(1e-5);
        match order {
            1 => Ok((self.cdf(t + h) - self.cdf(t - h)) / (2.0 * h)),
            2 => Ok((self.density(t + h)? - self.density(t - h)?) / (2.0 * h)),
            3 => Ok(
                (self.density(t + h)? - 2.0 * self.density(t)? + self.density(t - h)?) / (h * h),
            ),
            _ => Err(invalid(format!(
                "derivative order must be 1, 2 or 3, got {order}"
            ))),
        }
    }

    /// Generalised inverse `inf{t : F(t) >= q}`. Levels outside `(0, 1)` map
    /// to the support bounds.
    pub fn quantile(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return self.support_lo;
        }
        if q >= 1.0 {
            return self.support_hi;
        }
        match &self.kind {
            DistKind::Exponential { rate } => -(-q).ln_1p() / rate,
            DistKind::Frechet { shape, scale } => scale * (-q.ln()).powf(-1.0 / shape),
            DistKind::PointMasses { atoms } => {
                let mut acc = 0.0;
                for &(v, p) in atoms {
                    acc += p;
                    if acc >= q - 1e-15 {
                        return v;
                    }
                }
                atoms[atoms.len() - 1].0
            }
            DistKind::TruncatedPareto { pi, k } => (pi / (1.0 - q)).min(*k),
            DistKind::Scaled { base, factor } => factor * base.quantile(q),
        }
    }

    pub fn mean(&self) -> Result<f64> {
        match &self.kind {
            DistKind::Exponential { rate } => Ok(1.0 / rate),
            DistKind::Frechet { shape, scale } => {
                if *shape <= 1.0 {
                    Err(Error::DivergentMean)
                } else {
                    Ok(scale * gamma(1.0 - 1.0 / shape))
                }
            }
            DistKind::PointMasses { atoms } => Ok(atoms.iter().map(|(v, p)| v * p).sum()),
            DistKind::TruncatedPareto { pi, k } => Ok(pi * (1.0 + (k / pi).ln())),
            DistKind::Scaled { base, factor } => Ok(factor * base.mean()?),
        }
    }

    /// Variance; `+inf` when the second moment diverges.
    pub fn variance(&self) -> Result<f64> {
        match &self.kind {
            DistKind::Exponential { rate } => Ok(1.0 / (rate * rate)),
            DistKind::Frechet { shape, scale } => {
                if *shape <= 1.0 {
                    Err(Error::DivergentMean)
                } else if *shape <= 2.0 {
                    Ok(f64::INFINITY)
                } else {
                    let g1 = gamma(1.0 - 1.0 / shape);
                    Ok(scale * scale * (gamma(1.0 - 2.0 / shape) - g1 * g1))
                }
            }
            DistKind::PointMasses { atoms } => {
                let m: f64 = atoms.iter().map(|(v, p)| v * p).sum();
                Ok(atoms.iter().map(|(v, p)| p * (v - m) * (v - m)).sum())
            }
            DistKind::TruncatedPareto { pi, k } => {
                let m = pi * (1.0 + (k / pi).ln());
                Ok(2.0 * pi * k - pi * pi - m * m)
            }
            DistKind::Scaled { base, factor } => Ok(factor * factor * base.variance()?),
        }
    }

    /// `∫_[a, b) f(t) dF(t)`, atoms at `a` included and at `b` excluded.
    /// An infinite `b` is truncated at the `1 - 1e-12` quantile.
    pub fn integrate_against<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        self.integrate_dyn(&f, a, b)
    }

    fn integrate_dyn(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        match &self.kind {
            DistKind::PointMasses { atoms } => atoms
                .iter()
                .filter(|x| x.0 >= a && x.0 < b)
                .map(|&(v, p)| p * f(v))
                .sum(),
            DistKind::TruncatedPareto { pi, k } => {
                let lo = a.max(*pi);
                let hi = b.min(*k);
                let mut acc = 0.0;
                if hi > lo {
                    let breaks = geometric_breaks(lo, hi);
                    acc += integrate_split(|t| f(t) * pi / (t * t), lo, hi, &breaks, QUAD_TOL);
                }
                if *k >= a && *k < b {
                    acc += f(*k) * pi / k;
                }
                acc
            }
            DistKind::Scaled { base, factor } => {
                let c = *factor;
                base.integrate_dyn(&|u| f(c * u), a / c, b / c)
            }
            DistKind::Exponential { .. } | DistKind::Frechet { .. } => {
                let hi = if b.is_finite() {
                    b
                } else {
                    self.quantile(TAIL_LEVEL)
                };
                let lo = a.max(0.0);
                if !(hi > lo) {
                    return 0.0;
                }
                let breaks: Vec<f64> = SPLIT_LEVELS.iter().map(|&q| self.quantile(q)).collect();
                integrate_split(
                    |t| {
                        let d = self.derivative(t, 1).unwrap_or(0.0);
                        if d == 0.0 {
                            0.0
                        } else {
                            f(t) * d
                        }
                    },
                    lo,
                    hi,
                    &breaks,
                    QUAD_TOL,
                )
            }
        }
    }

    /// `∫_[a, b] t dF(t)` with atoms at both ends included. Infinite `b` is
    /// handled by quadrature up to the `1 - 1e-12` quantile plus a closed-form
    /// tail.
    pub fn partial_expectation(&self, a: f64, b: f64) -> Result<f64> {
        if !(a <= b) {
            return Err(invalid(format!(
                "partial expectation needs a <= b, got [{a}, {b}]"
            )));
        }
        if b.is_finite() {
            return Ok(self.integrate_against(|t| t, a, b) + b * self.atom_mass(b));
        }
        self.mean()?;
        let cut = self.quantile(TAIL_LEVEL);
        if a >= cut {
            return Ok(self.tail_beyond(a));
        }
        Ok(self.integrate_against(|t| t, a, cut) + self.tail_beyond(cut))
    }

    /// `∫_[s, ∞) t dF(t)`.
    pub fn tail_expectation(&self, s: f64) -> Result<f64> {
        self.partial_expectation(s, f64::INFINITY)
    }

    /// Closed-form `∫_[q, ∞) t dF(t)` for `q` at or beyond the truncation level.
    fn tail_beyond(&self, q: f64) -> f64 {
        match &self.kind {
            DistKind::Exponential { rate } => (q + 1.0 / rate) * (-rate * q).exp(),
            DistKind::Frechet { shape, scale } => {
                // scale * lower_gamma(1 - 1/shape, z) with z = (q/scale)^-shape,
                // expanded as a series in the small argument z.
                let a = 1.0 - 1.0 / shape;
                let z = (q / scale).powf(-shape);
                let series = 1.0 / a - z / (a + 1.0) + z * z / (2.0 * (a + 2.0));
                scale * z.powf(a) * series
            }
            DistKind::PointMasses { atoms } => {
                atoms.iter().filter(|x| x.0 >= q).map(|(v, p)| v * p).sum()
            }
            DistKind::TruncatedPareto { pi, k } => {
                let lo = q.max(*pi);
                let cont = if *k > lo { pi * (k / lo).ln() } else { 0.0 };
                if q <= *k {
                    cont + pi
                } else {
                    0.0
                }
            }
            DistKind::Scaled { base, factor } => factor * base.tail_beyond(q / factor),
        }
    }

    pub fn to_spec(&self) -> DistSpec {
        match &self.kind {
            DistKind::Exponential { rate } => DistSpec::Exponential { rate: *rate },
            DistKind::Frechet { shape, scale } => DistSpec::Frechet {
                shape: *shape,
                scale: *scale,
            },
            DistKind::PointMasses { atoms } => DistSpec::PointMasses {
                atoms: atoms.clone(),
            },
            DistKind::TruncatedPareto { pi, k } => DistSpec::TruncatedPareto { pi: *pi, k: *k },
            DistKind::Scaled { base, factor } => DistSpec::Scaled {
                base: Box::new(base.to_spec()),
                factor: *factor,
            },
        }
    }
}

fn geometric_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut x = lo * 2.0;
    while x < hi && out.len() < 200 {
        out.push(x);
        x *= 2.0;
    }
    out
}

/// JSON description of a distribution, e.g.
/// `{"family": "frechet", "shape": 2.197, "scale": 0.613}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpec {
    Exponential {
        #[serde(default = "unit_rate")]
        rate: f64,
    },
    Frechet {
        shape: f64,
        scale: f64,
    },
    #[serde(alias = "pointmasses")]
    PointMasses {
        atoms: Vec<(f64, f64)>,
    },
    #[serde(alias = "equal_revenue")]
    TruncatedPareto {
        pi: f64,
        k: f64,
    },
    Scaled {
        base: Box<DistSpec>,
        factor: f64,
    },
}

fn unit_rate() -> f64 {
    1.0
}

impl TryFrom<DistSpec> for MaxDistribution {
    type Error = Error;

    fn try_from(spec: DistSpec) -> Result<Self> {
        match spec {
            DistSpec::Exponential { rate } => Self::exponential(rate),
            DistSpec::Frechet { shape, scale } => Self::frechet(shape, scale),
            DistSpec::PointMasses { atoms } => Self::point_masses(atoms),
            DistSpec::TruncatedPareto { pi, k } => Self::truncated_pareto(pi, k),
            DistSpec::Scaled { base, factor } => Self::scaled((*base).try_into()?, factor),
        }
    }
}
