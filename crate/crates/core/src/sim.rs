//! Monte Carlo check of the closed-form worst-case payoffs.
//!
//! Each sample draws `v_max` from `F_max` by inversion, builds the
//! adversary's tuple, draws the threshold and records the first-crossing
//! payoff. Samples are split into fixed-size shards; shard `i` uses its own
//! Xoshiro256++ stream seeded with `seed + i` (SplitMix64 expansion of the
//! 64-bit seed), and shard summaries are merged in shard order. The result
//! is therefore bitwise reproducible and independent of the thread count.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::WorstCaseInstance;
use crate::dist::MaxDistribution;
use crate::error::{invalid, Result};
use crate::policy::ThresholdPolicy;

/// Samples per shard.
pub const SHARD_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub samples: u64,
    pub seed: u64,
    /// Pair every `v_max` draw `u` with `1 - u`. The sample count is rounded
    /// up to an even number and the standard error is taken over pair means.
    pub antithetic: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 0,
            antithetic: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub mean_payoff: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Welford summary of one shard.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * w,
        }
    }
}

/// Uniform draw on the open interval `(0, 1)` from the top 53 bits.
fn open_unit(rng: &mut Xoshiro256PlusPlus) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn draw_threshold(policy: &ThresholdPolicy, u: f64) -> f64 {
    match policy {
        ThresholdPolicy::Deterministic { t } => *t,
        ThresholdPolicy::FiniteRandom { thresholds, probs } => {
            let mut acc = 0.0;
            for (&t, &p) in thresholds.iter().zip(probs) {
                acc += p;
                if u <= acc {
                    return t;
                }
            }
            thresholds[thresholds.len() - 1]
        }
        ThresholdPolicy::UniformRandom { lo, hi } => lo + u * (hi - lo),
    }
}

fn one_payoff(
    d: &MaxDistribution,
    instance: &WorstCaseInstance,
    policy: &ThresholdPolicy,
    u_max: f64,
    u_t: f64,
    buf: &mut [f64],
) -> f64 {
    instance.fill_tuple(d.quantile(u_max), buf);
    let t = draw_threshold(policy, u_t);
    buf.iter().copied().find(|&v| v >= t).unwrap_or(0.0)
}

/// Estimates the expected payoff of `policy` on `instance` when the maximum
/// follows `d`.
pub fn simulate_policy_vs_instance(
    d: &MaxDistribution,
    instance: &WorstCaseInstance,
    policy: &ThresholdPolicy,
    cfg: &SimConfig,
) -> Result<SimResult> {
    if cfg.samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    policy.validate()?;
    let units = if cfg.antithetic {
        cfg.samples.div_ceil(2)
    } else {
        cfg.samples
    };
    let shards = units.div_ceil(SHARD_SIZE);
    let n = instance.n();

    let parts: Vec<Moments> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(cfg.seed.wrapping_add(shard));
            let start = shard * SHARD_SIZE;
            let len = SHARD_SIZE.min(units - start);
            let mut buf = vec![0.0; n];
            let mut m = Moments::default();
            for _ in 0..len {
                let u = open_unit(&mut rng);
                let ut = open_unit(&mut rng);
                let x = if cfg.antithetic {
                    let ut2 = open_unit(&mut rng);
                    let a = one_payoff(d, instance, policy, u, ut, &mut buf);
                    let b = one_payoff(d, instance, policy, 1.0 - u, ut2, &mut buf);
                    0.5 * (a + b)
                } else {
                    one_payoff(d, instance, policy, u, ut, &mut buf)
                };
                m.push(x);
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);

    let std_error = if total.count > 1 {
        (total.m2 / (total.count - 1) as f64).sqrt() / (total.count as f64).sqrt()
    } else {
        0.0
    };
    Ok(SimResult {
        mean_payoff: total.mean,
        std_error,
        samples: if cfg.antithetic { 2 * units } else { units },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{
        instance_against_deterministic, instance_against_finite_random, instance_against_uniform,
        min_payoff_finite_random, min_payoff_uniform,
    };
    use crate::monopoly::solve_monopoly;

    fn cfg(samples: u64, seed: u64) -> SimConfig {
        SimConfig {
            samples,
            seed,
            antithetic: false,
        }
    }

    #[test]
    fn open_unit_stays_inside() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
        for _ in 0..100_000 {
            let u = open_unit(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn welford_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert_eq!(merged.count, whole.count);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.m2 - whole.m2).abs() / whole.m2 < 1e-12);
    }

    #[test]
    fn deterministic_policy_earns_revenue() {
        let d = MaxDistribution::frechet(2.197, 0.613).unwrap();
        let m = solve_monopoly(&d).unwrap();
        let pol = ThresholdPolicy::deterministic(m.p_star).unwrap();
        let inst = instance_against_deterministic(m.p_star, 5).unwrap();
        let r = simulate_policy_vs_instance(&d, &inst, &pol, &cfg(200_000, 1)).unwrap();
        assert!(
            (r.mean_payoff - m.pi_star).abs() <= 3.0 * r.std_error,
            "{r:?}"
        );
    }

    #[test]
    fn uniform_policy_matches_closed_form() {
        let d = MaxDistribution::exponential(1.0).unwrap();
        let (t1, t2, n) = (0.7, 1.3, 10);
        let pol = ThresholdPolicy::uniform(t1, t2).unwrap();
        let inst = instance_against_uniform(t1, t2, n).unwrap();
        let r = simulate_policy_vs_instance(&d, &inst, &pol, &cfg(200_000, 2)).unwrap();
        let exact = min_payoff_uniform(&d, t1, t2, n, true).unwrap();
        assert!(
            (r.mean_payoff - exact).abs() <= 3.0 * r.std_error,
            "{r:?} vs {exact}"
        );
    }

    #[test]
    fn finite_policy_matches_closed_form() {
        let d = MaxDistribution::exponential(1.0).unwrap();
        let pol = ThresholdPolicy::finite_random(vec![0.8, 0.9, 1.0], vec![0.3, 0.3, 0.4]).unwrap();
        let inst = instance_against_finite_random(&pol, 3).unwrap();
        let r = simulate_policy_vs_instance(&d, &inst, &pol, &cfg(200_000, 3)).unwrap();
        let exact = min_payoff_finite_random(&d, &pol, 3).unwrap();
        assert!(
            (r.mean_payoff - exact).abs() <= 3.0 * r.std_error,
            "{r:?} vs {exact}"
        );
    }

    #[test]
    fn seed_determinism_and_thread_independence() {
        let d = MaxDistribution::exponential(1.0).unwrap();
        let pol = ThresholdPolicy::uniform(0.5, 1.5).unwrap();
        let inst = instance_against_uniform(0.5, 1.5, 4).unwrap();
        let c = cfg(300_000, 42);
        let a = simulate_policy_vs_instance(&d, &inst, &pol, &c).unwrap();
        let b = simulate_policy_vs_instance(&d, &inst, &pol, &c).unwrap();
        assert_eq!(a, b);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let s = single.install(|| simulate_policy_vs_instance(&d, &inst, &pol, &c).unwrap());
        assert_eq!(a, s);
        let other = simulate_policy_vs_instance(&d, &inst, &pol, &cfg(300_000, 43)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn std_error_scales_as_inverse_root() {
        let d = MaxDistribution::exponential(1.0).unwrap();
        let pol = ThresholdPolicy::deterministic(1.0).unwrap();
        let inst = instance_against_deterministic(1.0, 2).unwrap();
        let se: Vec<f64> = [10_000u64, 100_000, 1_000_000]
            .iter()
            .map(|&s| {
                simulate_policy_vs_instance(&d, &inst, &pol, &cfg(s, 9))
                    .unwrap()
                    .std_error
            })
            .collect();
        for w in se.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio / 10f64.sqrt() - 1.0).abs() < 0.2, "{se:?}");
        }
    }

    #[test]
    fn antithetic_reduces_error() {
        let d = MaxDistribution::exponential(1.0).unwrap();
        let pol = ThresholdPolicy::uniform(0.7, 1.3).unwrap();
        let inst = instance_against_uniform(0.7, 1.3, 6).unwrap();
        let plain = simulate_policy_vs_instance(&d, &inst, &pol, &cfg(200_000, 5)).unwrap();
        let anti = SimConfig {
            antithetic: true,
            ..cfg(200_000, 5)
        };
        let a = simulate_policy_vs_instance(&d, &inst, &pol, &anti).unwrap();
        assert_eq!(a.samples, 200_000);
        assert!(a.std_error < plain.std_error);
        let exact = min_payoff_uniform(&d, 0.7, 1.3, 6, true).unwrap();
        assert!((a.mean_payoff - exact).abs() <= 3.0 * a.std_error);
    }

    #[test]
    fn rejects_zero_samples() {
        let d = MaxDistribution::exponential(1.0).unwrap();
        let pol = ThresholdPolicy::deterministic(1.0).unwrap();
        let inst = instance_against_deterministic(1.0, 2).unwrap();
        assert!(simulate_policy_vs_instance(&d, &inst, &pol, &cfg(0, 1)).is_err());
    }
}
