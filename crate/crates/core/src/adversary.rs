//! Nature's best responses to threshold policies.
//!
//! For each policy class the adversary picks, for every realised maximum
//! `v_max`, a tuple of offers whose maximum is `v_max` and which minimises the
//! policy's payoff. The minimal expected payoff is then an expectation over
//! `F_max` of a known function of `v_max`, evaluated here in closed form.
//! [`brute_force_adversary`] is an exhaustive oracle for small `n`.

use rayon::prelude::*;

use crate::dist::MaxDistribution;
use crate::error::{invalid, Error, Result};
use crate::policy::{epsilon_grid_policy, ThresholdPolicy};

/// Largest number of candidate tuples the brute-force search may visit for a
/// single value of the maximum.
pub const SEARCH_LIMIT: u128 = 10_000_000;

/// Largest `n` accepted by the brute-force search.
pub const BRUTE_FORCE_MAX_N: usize = 5;

/// A correlation structure: a deterministic map from the realised maximum to
/// the offer sequence `(v_1, …, v_n)`.
#[derive(Debug, Clone, PartialEq)]
pub enum WorstCaseInstance {
    /// `(p, v, 0, …)` when `v >= p`, else `(v, 0, …)`.
    AgainstDeterministic { p: f64, n: usize },
    /// Walks through the thresholds below `v`; when every threshold is below
    /// `v` and there is no spare slot, skips the one that costs the policy
    /// least.
    AgainstFiniteRandom {
        thresholds: Vec<f64>,
        probs: Vec<f64>,
        n: usize,
    },
    /// Equally spaced climb against a threshold uniform on `(t1, t2)`.
    AgainstUniform { t1: f64, t2: f64, n: usize },
}

impl WorstCaseInstance {
    pub fn n(&self) -> usize {
        match self {
            Self::AgainstDeterministic { n, .. }
            | Self::AgainstFiniteRandom { n, .. }
            | Self::AgainstUniform { n, .. } => *n,
        }
    }

    /// The offer sequence realised when the maximum equals `v_max`.
    pub fn tuple(&self, v_max: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        self.fill_tuple(v_max, &mut out);
        out
    }

    /// Writes the tuple for `v_max` into `out`, which must have length `n`.
    pub fn fill_tuple(&self, v_max: f64, out: &mut [f64]) {
        out.fill(0.0);
        match self {
            Self::AgainstDeterministic { p, .. } => {
                if v_max >= *p {
                    out[0] = *p;
                    out[1] = v_max;
                } else {
                    out[0] = v_max;
                }
            }
            Self::AgainstFiniteRandom {
                thresholds,
                probs,
                n,
            } => {
                let below = thresholds.iter().take_while(|&&t| t <= v_max).count();
                if below < *n {
                    out[..below].copy_from_slice(&thresholds[..below]);
                    out[below] = v_max;
                } else {
                    let skip = cheapest_skip(thresholds, probs, v_max);
                    let kept = thresholds
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| Some(i) != skip)
                        .map(|(_, &t)| t);
                    for (slot, t) in out.iter_mut().zip(kept) {
                        *slot = t;
                    }
                    out[*n - 1] = v_max;
                }
            }
            Self::AgainstUniform { t1, t2, n } => uniform_tuple_into(*t1, *t2, *n, v_max, out),
        }
    }
}

/// Index of the threshold whose omission gives the smallest extra payoff, or
/// `None` when it is cheapest to leave the top threshold to collect `v_max`.
fn cheapest_skip(thresholds: &[f64], probs: &[f64], v_max: f64) -> Option<usize> {
    let m = thresholds.len();
    let mut best = probs[m - 1] * (v_max - thresholds[m - 1]);
    let mut skip = None;
    for j in 0..m - 1 {
        let extra = probs[j] * (thresholds[j + 1] - thresholds[j]);
        if extra < best {
            best = extra;
            skip = Some(j);
        }
    }
    skip
}

pub fn instance_against_deterministic(p: f64, n: usize) -> Result<WorstCaseInstance> {
    if n < 2 {
        return Err(invalid("the deterministic-threshold instance needs n >= 2"));
    }
    if !(p >= 0.0 && p.is_finite()) {
        return Err(invalid(format!(
            "threshold must be a finite nonnegative number, got {p}"
        )));
    }
    Ok(WorstCaseInstance::AgainstDeterministic { p, n })
}

/// Worst case against a finite random threshold with at most `n` atoms.
pub fn instance_against_finite_random(
    policy: &ThresholdPolicy,
    n: usize,
) -> Result<WorstCaseInstance> {
    let ThresholdPolicy::FiniteRandom { thresholds, probs } = policy else {
        return Err(invalid("expected a finite random threshold policy"));
    };
    if thresholds.len() > n {
        return Err(Error::NoWorstCaseFamily(format!(
            "{} threshold atoms but only {n} offers",
            thresholds.len()
        )));
    }
    if thresholds[0] < 0.0 {
        return Err(invalid("thresholds must be nonnegative"));
    }
    Ok(WorstCaseInstance::AgainstFiniteRandom {
        thresholds: thresholds.clone(),
        probs: probs.clone(),
        n,
    })
}

pub fn instance_against_uniform(t1: f64, t2: f64, n: usize) -> Result<WorstCaseInstance> {
    check_uniform(t1, t2, n)?;
    Ok(WorstCaseInstance::AgainstUniform { t1, t2, n })
}

impl WorstCaseInstance {
    /// The worst-case family matching the policy class.
    pub fn for_policy(policy: &ThresholdPolicy, n: usize) -> Result<Self> {
        match policy {
            ThresholdPolicy::Deterministic { t } => instance_against_deterministic(*t, n),
            ThresholdPolicy::FiniteRandom { .. } => instance_against_finite_random(policy, n),
            ThresholdPolicy::UniformRandom { lo, hi } => instance_against_uniform(*lo, *hi, n),
        }
    }
}

fn check_uniform(t1: f64, t2: f64, n: usize) -> Result<()> {
    if n < 2 {
        return Err(invalid("the uniform-threshold instance needs n >= 2"));
    }
    if !(t1 >= 0.0 && t1 < t2 && t2.is_finite()) {
        return Err(invalid(format!("need 0 <= t1 < t2, got ({t1}, {t2})")));
    }
    Ok(())
}

/// Point above which the adversary stops climbing against a uniform
/// threshold on `(t1, t2)`.
fn uniform_cap(t1: f64, t2: f64, n: usize) -> f64 {
    t2 + (t2 - t1) / (n as f64 - 1.0)
}

fn uniform_tuple_into(t1: f64, t2: f64, n: usize, v_max: f64, out: &mut [f64]) {
    let nf = n as f64;
    if v_max < t1 {
        out[0] = v_max;
    } else if v_max <= uniform_cap(t1, t2, n) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = t1 + (i + 1) as f64 / nf * (v_max - t1);
        }
        out[n - 1] = v_max;
    } else {
        for (i, slot) in out.iter_mut().enumerate().take(n - 1) {
            *slot = t1 + (i + 1) as f64 / (nf - 1.0) * (t2 - t1);
        }
        out[n - 1] = v_max;
    }
}

/// The adversary's tuple against a threshold uniform on `(t1, t2)`. The
/// boundary `v_max = t2 + (t2 - t1)/(n - 1)` uses the equal-spacing case; both
/// cases give the same payoff there.
pub fn worst_tuple_uniform(t1: f64, t2: f64, n: usize, v_max: f64) -> Result<Vec<f64>> {
    check_uniform(t1, t2, n)?;
    if !(v_max >= 0.0) {
        return Err(invalid(format!("v_max must be nonnegative, got {v_max}")));
    }
    let mut out = vec![0.0; n];
    uniform_tuple_into(t1, t2, n, v_max, &mut out);
    Ok(out)
}

/// Minimal expected payoff of an `n`-atom random threshold:
/// `Σ p_i t_i S(t_i) + γ S(u) + p_n ∫_[t_n, u) (x - t_n) dF`, with
/// `γ = min_i p_i (t_{i+1} - t_i)` and `u = t_n + γ/p_n`.
pub fn min_payoff_finite_random(
    d: &MaxDistribution,
    policy: &ThresholdPolicy,
    n: usize,
) -> Result<f64> {
    let (thresholds, probs) = match policy {
        ThresholdPolicy::FiniteRandom { thresholds, probs } => (thresholds, probs),
        ThresholdPolicy::Deterministic { .. } => {
            return Err(Error::ArityMismatch {
                expected: n,
                found: 1,
            })
        }
        ThresholdPolicy::UniformRandom { .. } => {
            return Err(invalid("expected a finite random threshold policy"))
        }
    };
    if thresholds.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: thresholds.len(),
        });
    }
    let base: f64 = thresholds
        .iter()
        .zip(probs)
        .map(|(&t, &p)| p * t * d.sf(t))
        .sum();
    let gamma = thresholds
        .windows(2)
        .zip(probs)
        .map(|(w, &p)| p * (w[1] - w[0]))
        .fold(f64::INFINITY, f64::min);
    let tn = thresholds[n - 1];
    let pn = probs[n - 1];
    let u = tn + gamma / pn;
    let ramp = if u.is_finite() {
        d.integrate_against(|x| x - tn, tn, u)
    } else {
        d.tail_expectation(tn)? - tn * d.sf(tn)
    };
    let cap = if u.is_finite() { gamma * d.sf(u) } else { 0.0 };
    Ok(base + cap + pn * ramp)
}

/// Payoff against the uniform-threshold adversary when `t1 <= v_max <= t2`.
fn f1(s: f64, t1: f64, t2: f64, n: usize) -> f64 {
    let nf = n as f64;
    (s - t1) / (t2 - t1) * (t1 + (nf + 1.0) / (2.0 * nf) * (s - t1))
}

/// Payoff against the uniform-threshold adversary when `v_max > t2`, valid
/// up to the cap where it peaks.
fn f2(s: f64, t1: f64, t2: f64, n: usize) -> f64 {
    let nf = n as f64;
    s - (nf - 1.0) / (2.0 * nf) * (s - t1) * (s - t1) / (t2 - t1)
}

/// Minimal expected payoff of a threshold uniform on `(t1, t2)`.
///
/// With `exact` the adversary's full response is integrated; otherwise the
/// payoff above `t2` is floored at its value at `t2`, which gives a smaller,
/// simpler lower bound. Atoms of `F_max` are handled exactly since the
/// per-realisation payoff is continuous in `v_max`.
pub fn min_payoff_uniform(
    d: &MaxDistribution,
    t1: f64,
    t2: f64,
    n: usize,
    exact: bool,
) -> Result<f64> {
    check_uniform(t1, t2, n)?;
    let low = d.integrate_against(|s| f1(s, t1, t2, n), t1, t2);
    if !exact {
        return Ok(low + f2(t2, t1, t2, n) * d.sf(t2));
    }
    let u = uniform_cap(t1, t2, n);
    let mid = d.integrate_against(|s| f2(s, t1, t2, n), t2, u);
    Ok(low + mid + f2(u, t1, t2, n) * d.sf(u))
}

/// Worst-case payoff of the equally weighted grid `p* - (n-1)ε, …, p*`.
/// `eps = 0` gives the monopoly revenue.
pub fn grid_policy_lower_bound(
    d: &MaxDistribution,
    p_star: f64,
    n: usize,
    eps: f64,
) -> Result<f64> {
    match epsilon_grid_policy(p_star, n, eps)? {
        ThresholdPolicy::Deterministic { t } => Ok(t * d.sf(t)),
        policy => min_payoff_finite_random(d, &policy, n),
    }
}

/// Exhaustive adversary over weakly increasing tuples with entries in
/// `value_grid ∪ {v_max}` and maximum `v_max`, averaged over `d_grid`.
///
/// On increasing tuples the payoff is additive,
/// `Σ v_i P(v_{i-1} < T <= v_i)`, so the minimum over tuples is found by
/// dynamic programming over the grid instead of explicit enumeration. The
/// search-size limit still applies to the number of tuples the search covers.
pub fn brute_force_adversary(
    d_grid: &[(f64, f64)],
    policy: &ThresholdPolicy,
    n: usize,
    value_grid: &[f64],
) -> Result<f64> {
    if n == 0 || n > BRUTE_FORCE_MAX_N {
        return Err(invalid(format!(
            "brute-force search supports 1 <= n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    let mut grid: Vec<f64> = value_grid
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.iter().any(|&v| v < 0.0) || d_grid.iter().any(|&(v, _)| !(v >= 0.0)) {
        return Err(invalid("offer values must be nonnegative"));
    }
    for &(v, _) in d_grid {
        let m = grid.partition_point(|&g| g < v) as u128 + 1;
        let count = binomial(m + n as u128 - 2, n as u128 - 1);
        if count > SEARCH_LIMIT {
            return Err(Error::SearchTooLarge {
                count,
                limit: SEARCH_LIMIT,
            });
        }
    }

    let g: Vec<f64> = grid.iter().map(|&x| policy.threshold_cdf(x)).collect();
    // best[k][j]: least payoff of a weakly increasing (k+1)-tuple ending at grid[j]
    let mut best: Vec<Vec<f64>> = Vec::with_capacity(n);
    best.push(grid.iter().zip(&g).map(|(&b, &gb)| b * gb).collect());
    for k in 1..n.saturating_sub(1) {
        let prev = &best[k - 1];
        let row: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|j| {
                (0..=j)
                    .map(|i| prev[i] + grid[j] * (g[j] - g[i]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        best.push(row);
    }

    let total = d_grid
        .par_iter()
        .map(|&(v, w)| {
            let gv = policy.threshold_cdf(v);
            let mut worst = v * gv;
            if n >= 2 {
                let last = &best[n - 2];
                let top = grid.partition_point(|&x| x <= v);
                for i in 0..top {
                    worst = worst.min(last[i] + v * (gv - g[i]));
                }
            }
            w * worst
        })
        .sum();
    Ok(total)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monopoly::revenue;

    const E_INV: f64 = 0.367_879_441_171_442_33;

    fn exp1() -> MaxDistribution {
        MaxDistribution::exponential(1.0).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn deterministic_instance_examples() {
        let i = instance_against_deterministic(1.0, 2).unwrap();
        assert_eq!(i.tuple(2.0), vec![1.0, 2.0]);
        let i = instance_against_deterministic(1.0, 3).unwrap();
        assert_eq!(i.tuple(0.5), vec![0.5, 0.0, 0.0]);
        let i = instance_against_deterministic(0.0, 2).unwrap();
        let x = 0.7;
        assert_eq!(i.tuple(x), vec![0.0, x]);
        let pol = ThresholdPolicy::deterministic(0.0).unwrap();
        assert_eq!(pol.payoff_on_tuple(&i.tuple(x)), 0.0);
        assert!(instance_against_deterministic(1.0, 1).is_err());
    }

    #[test]
    fn uniform_tuple_examples() {
        assert_eq!(
            worst_tuple_uniform(0.0, 1.0, 2, 0.5).unwrap(),
            vec![0.25, 0.5]
        );
        let t = worst_tuple_uniform(0.0, 1.0, 3, 0.1).unwrap();
        assert!(close(t[0], 0.1 / 3.0, 1e-15) && close(t[1], 0.2 / 3.0, 1e-15));
        assert_eq!(t[2], 0.1);
        assert_eq!(
            worst_tuple_uniform(0.0, 1.0, 2, 5.0).unwrap(),
            vec![1.0, 5.0]
        );
        assert_eq!(
            worst_tuple_uniform(0.5, 1.0, 3, 0.2).unwrap(),
            vec![0.2, 0.0, 0.0]
        );
    }

    #[test]
    fn uniform_case_boundary_is_continuous() {
        let (t1, t2, n) = (0.3, 0.9, 4);
        let u = uniform_cap(t1, t2, n);
        let pol = ThresholdPolicy::uniform(t1, t2).unwrap();
        let at = pol.payoff_on_tuple(&worst_tuple_uniform(t1, t2, n, u).unwrap());
        let above = pol.payoff_on_tuple(&worst_tuple_uniform(t1, t2, n, u + 1e-12).unwrap());
        assert!(close(at, above, 1e-10));
        assert!(close(at, f2(u, t1, t2, n), 1e-12));
    }

    #[test]
    fn payoff_pieces_meet() {
        for n in 2..8 {
            let (t1, t2) = (0.4, 1.1);
            let mid = t1 + (n as f64 + 1.0) * (t2 - t1) / (2.0 * n as f64);
            assert_eq!(f1(t1, t1, t2, n), 0.0);
            assert!(close(f1(t2, t1, t2, n), mid, 1e-15));
            assert!(close(f2(t2, t1, t2, n), mid, 1e-15));
        }
    }

    #[test]
    fn uniform_tuple_payoffs_match_f1_f2() {
        let (t1, t2, n) = (0.2, 0.7, 3);
        let pol = ThresholdPolicy::uniform(t1, t2).unwrap();
        for k in 0..=100 {
            let v = 1.5 * k as f64 / 100.0;
            let got = pol.payoff_on_tuple(&worst_tuple_uniform(t1, t2, n, v).unwrap());
            let u = uniform_cap(t1, t2, n);
            let want = if v < t1 {
                0.0
            } else if v <= t2 {
                f1(v, t1, t2, n)
            } else {
                f2(v.min(u), t1, t2, n)
            };
            assert!(close(got, want, 1e-12), "v={v}: {got} vs {want}");
        }
    }

    #[test]
    fn uniform_tuple_is_pointwise_optimal() {
        // Compare against every increasing tuple on a 100-point grid.
        for n in 2..=4 {
            let (t1, t2) = (0.5, 1.2);
            let pol = ThresholdPolicy::uniform(t1, t2).unwrap();
            let grid: Vec<f64> = (0..100).map(|i| 2.0 * i as f64 / 99.0).collect();
            for &v in &[0.3, 0.6, 1.0, 1.3, 1.6, 2.0] {
                let ours = pol.payoff_on_tuple(&worst_tuple_uniform(t1, t2, n, v).unwrap());
                let oracle = brute_force_adversary(&[(v, 1.0)], &pol, n, &grid).unwrap();
                assert!(ours <= oracle + 1e-12, "n={n} v={v}: {ours} > {oracle}");
            }
        }
    }

    #[test]
    fn finite_instance_realises_closed_form() {
        let d = exp1();
        let pol = ThresholdPolicy::finite_random(vec![0.5, 0.9, 1.0], vec![0.2, 0.5, 0.3]).unwrap();
        let inst = instance_against_finite_random(&pol, 3).unwrap();
        let via_tuples = d.integrate_against(|v| pol.payoff_on_tuple(&inst.tuple(v)), 0.0, 1.0)
            + d.integrate_against(|v| pol.payoff_on_tuple(&inst.tuple(v)), 1.0, 40.0);
        let closed = min_payoff_finite_random(&d, &pol, 3).unwrap();
        assert!(close(via_tuples, closed, 1e-7), "{via_tuples} vs {closed}");
    }

    #[test]
    fn uniform_instance_realises_closed_form() {
        let d = exp1();
        let (t1, t2, n) = (0.8, 1.2, 4);
        let pol = ThresholdPolicy::uniform(t1, t2).unwrap();
        let inst = instance_against_uniform(t1, t2, n).unwrap();
        let u = uniform_cap(t1, t2, n);
        let f = |v: f64| pol.payoff_on_tuple(&inst.tuple(v));
        let via_tuples = d.integrate_against(f, 0.0, t1)
            + d.integrate_against(f, t1, t2)
            + d.integrate_against(f, t2, u)
            + d.integrate_against(f, u, 40.0);
        let closed = min_payoff_uniform(&d, t1, t2, n, true).unwrap();
        assert!(close(via_tuples, closed, 1e-7), "{via_tuples} vs {closed}");
    }

    #[test]
    fn exact_dominates_simple() {
        let d = MaxDistribution::frechet(2.197, 0.613).unwrap();
        for n in [2, 3, 10, 50] {
            let e = min_payoff_uniform(&d, 0.45, 0.6, n, true).unwrap();
            let s = min_payoff_uniform(&d, 0.45, 0.6, n, false).unwrap();
            assert!(e >= s - 1e-12, "n={n}");
        }
    }

    #[test]
    fn collapsing_atoms_recover_revenue() {
        let d = exp1();
        let delta = 1e-9;
        let pol = ThresholdPolicy::finite_random(vec![1.0, 1.0 + delta], vec![0.5, 0.5]).unwrap();
        let v = min_payoff_finite_random(&d, &pol, 2).unwrap();
        assert!(close(v, E_INV, 1e-9));
        assert!(close(
            grid_policy_lower_bound(&d, 1.0, 5, 0.0).unwrap(),
            revenue(&d, 1.0),
            1e-15
        ));
    }

    #[test]
    fn arity_mismatch() {
        let pol = ThresholdPolicy::finite_random(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(
            min_payoff_finite_random(&exp1(), &pol, 3),
            Err(Error::ArityMismatch {
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn finite_random_vs_oracle_exponential() {
        let d = exp1();
        let pol = ThresholdPolicy::finite_random(vec![0.9, 1.0], vec![0.5, 0.5]).unwrap();
        let m = 2000;
        let d_grid: Vec<(f64, f64)> = (0..m)
            .map(|i| (d.quantile((i as f64 + 0.5) / m as f64), 1.0 / m as f64))
            .collect();
        let mut values: Vec<f64> = d_grid.iter().map(|a| a.0).collect();
        values.extend([0.9, 1.0]);
        let oracle = brute_force_adversary(&d_grid, &pol, 2, &values).unwrap();
        let closed = min_payoff_finite_random(&d, &pol, 2).unwrap();
        assert!(
            (oracle - closed).abs() / closed < 2e-3,
            "{oracle} vs {closed}"
        );
    }

    #[test]
    fn finite_random_vs_oracle_point_masses() {
        let d = MaxDistribution::point_masses(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let pol = ThresholdPolicy::finite_random(vec![1.0, 2.0], vec![0.5, 0.5]).unwrap();
        let closed = min_payoff_finite_random(&d, &pol, 2).unwrap();
        let oracle = brute_force_adversary(&d.atoms(), &pol, 2, &[0.0, 1.0, 2.0]).unwrap();
        assert!(close(closed, oracle, 1e-12), "{closed} vs {oracle}");
        assert!(closed <= 1.0);
    }

    fn naive(d_grid: &[(f64, f64)], pol: &ThresholdPolicy, n: usize, grid: &[f64]) -> f64 {
        fn rec(
            pol: &ThresholdPolicy,
            cands: &[f64],
            start: usize,
            cur: &mut Vec<f64>,
            left: usize,
            v: f64,
            best: &mut f64,
        ) {
            if left == 0 {
                cur.push(v);
                *best = best.min(pol.payoff_on_tuple(cur));
                cur.pop();
                return;
            }
            for i in start..cands.len() {
                cur.push(cands[i]);
                rec(pol, cands, i, cur, left - 1, v, best);
                cur.pop();
            }
        }
        d_grid
            .iter()
            .map(|&(v, w)| {
                let mut cands: Vec<f64> = grid.iter().copied().filter(|&x| x <= v).collect();
                cands.push(v);
                let mut best = f64::INFINITY;
                rec(pol, &cands, 0, &mut Vec::new(), n - 1, v, &mut best);
                w * best
            })
            .sum()
    }

    #[test]
    fn dynamic_program_matches_enumeration() {
        let d_grid = [(0.3, 0.2), (0.75, 0.3), (1.1, 0.4), (2.5, 0.1)];
        let grid: Vec<f64> = (0..15).map(|i| 0.15 * i as f64).collect();
        let policies = [
            ThresholdPolicy::deterministic(0.7).unwrap(),
            ThresholdPolicy::finite_random(vec![0.4, 0.8, 1.05], vec![0.3, 0.3, 0.4]).unwrap(),
            ThresholdPolicy::uniform(0.5, 1.3).unwrap(),
        ];
        for pol in &policies {
            for n in 1..=4 {
                let a = brute_force_adversary(&d_grid, pol, n, &grid).unwrap();
                let b = naive(&d_grid, pol, n, &grid);
                assert!(close(a, b, 1e-12), "{pol:?} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn oracle_against_deterministic_gives_revenue() {
        let d = exp1();
        let m = 500;
        let d_grid: Vec<(f64, f64)> = (0..m)
            .map(|i| (d.quantile((i as f64 + 0.5) / m as f64), 1.0 / m as f64))
            .collect();
        let values: Vec<f64> = (0..=400).map(|i| i as f64 / 100.0).collect();
        let pol = ThresholdPolicy::deterministic(1.0).unwrap();
        let oracle = brute_force_adversary(&d_grid, &pol, 3, &values).unwrap();
        let exact: f64 = d_grid.iter().filter(|a| a.0 >= 1.0).map(|a| a.1).sum();
        assert!(close(oracle, exact, 1e-12));
        assert!(close(oracle, E_INV, 2e-3));
    }

    #[test]
    fn search_limit() {
        let grid: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let pol = ThresholdPolicy::deterministic(1.0).unwrap();
        let err = brute_force_adversary(&[(999.0, 1.0)], &pol, 4, &grid).unwrap_err();
        assert!(matches!(err, Error::SearchTooLarge { .. }));
        assert!(brute_force_adversary(&[(1.0, 1.0)], &pol, 6, &grid).is_err());
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(2001, 2), 2001 * 1000);
        assert_eq!(binomial(3, 0), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn uniform_tuple_is_no_better_than_any_other(
                t1 in 0.0f64..1.0,
                w in 0.05f64..1.0,
                n in 2usize..7,
                v in 0.0f64..4.0,
                others in proptest::collection::vec(0.0f64..1.0, 6),
                pos in 0usize..7,
            ) {
                let t2 = t1 + w;
                let pol = ThresholdPolicy::uniform(t1, t2).unwrap();
                let worst = pol.payoff_on_tuple(&worst_tuple_uniform(t1, t2, n, v).unwrap());
                let mut alt: Vec<f64> = others[..n - 1].iter().map(|x| x * v).collect();
                alt.insert(pos.min(n - 1), v);
                prop_assert!(worst <= pol.payoff_on_tuple(&alt) + 1e-12);
            }

            #[test]
            fn exact_payoff_dominates_simple(
                rate in 0.3f64..3.0,
                half in 0.01f64..0.3,
                n in 2usize..60,
            ) {
                let d = MaxDistribution::exponential(rate).unwrap();
                let p = 1.0 / rate;
                let exact = min_payoff_uniform(&d, p - half * p, p + half * p, n, true).unwrap();
                let simple = min_payoff_uniform(&d, p - half * p, p + half * p, n, false).unwrap();
                prop_assert!(exact >= simple - 1e-12, "{exact} < {simple}");
            }
        }
    }
}
