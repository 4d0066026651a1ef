//! Certified lower and upper bounds on the minimax stopping value.
//!
//! * `lower_det`: the monopoly revenue `Π*`, earned by the deterministic
//!   threshold `p*` against every instance.
//! * `lower_uniform`: the exact worst-case payoff of a threshold uniform on
//!   `(p* - ε, p* + ε)` with `ε = 3 S(p*) / ((2F'(p*) + p* F''(p*)) n)`.
//! * `upper_universal`: `Π* + E[X_max]/n`.
//! * `upper_partition`: `Π* + ε*`, where `ε*` is the smallest slack for which
//!   the map `w -> (Π* + ε)/S(w)` climbs from the bottom of the support past
//!   the cutoff `β` in at most `n - 1` steps.

use serde::{Deserialize, Serialize};

use crate::adversary::min_payoff_uniform;
use crate::dist::{MaxDistribution, TAIL_LEVEL};
use crate::error::{invalid, Error, Result};
use crate::monopoly::{solve_monopoly, MonopolyResult};
use crate::numeric::bisect_predicate;

/// Step cap for the partition iteration.
pub const MAX_ITERATIONS: usize = 10_000_000;

const MIN_PROGRESS: f64 = 1e-15;
const EPS_REL_TOL: f64 = 1e-6;
const SANDWICH_TOL: f64 = 1e-9;
const MAX_DOUBLINGS: usize = 60;
const DISCRETE_TAIL_RTOL: f64 = 1e-12;

/// The slack `ε(n)` of the uniform-threshold policy.
fn uniform_epsilon(d: &MaxDistribution, m: &MonopolyResult, n: usize) -> Result<f64> {
    if d.is_discrete() {
        return Err(Error::UnsupportedForDiscrete(
            "uniform-threshold lower bound",
        ));
    }
    if n < 2 {
        return Err(invalid("the uniform-threshold lower bound needs n >= 2"));
    }
    let p = m.p_star;
    let denom = 2.0 * d.derivative(p, 1)? + p * d.derivative(p, 2)?;
    if !(denom > 1e-12) {
        return Err(Error::DegenerateCurvature(denom));
    }
    let eps = 3.0 * d.sf(p) / denom / n as f64;
    if !(eps < 1.0 && eps < p) {
        return Err(Error::PreconditionFailed(format!(
            "uniform window half-width {eps} must be below min(1, p*) = {}",
            p.min(1.0)
        )));
    }
    Ok(eps)
}

fn lower_uniform_with(d: &MaxDistribution, m: &MonopolyResult, n: usize) -> Result<(f64, f64)> {
    let eps = uniform_epsilon(d, m, n)?;
    let value = min_payoff_uniform(d, m.p_star - eps, m.p_star + eps, n, true)?;
    if value < m.pi_star - 1e-10 {
        return Err(Error::PreconditionFailed(format!(
            "uniform threshold earns {value}, below the monopoly revenue {}",
            m.pi_star
        )));
    }
    Ok((value, eps))
}

/// Exact worst-case payoff of the uniform threshold on `(p* - ε, p* + ε)`.
pub fn lower_bound_uniform(d: &MaxDistribution, n: usize) -> Result<f64> {
    let m = solve_monopoly(d)?;
    Ok(lower_uniform_with(d, &m, n)?.0)
}

/// `Π* + E[X_max]/n`.
pub fn upper_bound_universal(d: &MaxDistribution, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let m = solve_monopoly(d)?;
    Ok(m.pi_star + d.mean()? / n as f64)
}

/// `β = inf{s >= p* : ∫_[s, ∞) t dF(t) <= Π*}`.
pub fn beta_cutoff(d: &MaxDistribution) -> Result<f64> {
    let m = solve_monopoly(d)?;
    beta_with(d, &m)
}

fn beta_with(d: &MaxDistribution, m: &MonopolyResult) -> Result<f64> {
    let pi = m.pi_star;
    let tail = |s: f64| d.tail_expectation(s);
    if tail(m.p_star)? <= pi * (1.0 + DISCRETE_TAIL_RTOL) {
        return Ok(m.p_star);
    }
    if d.is_discrete() {
        // The tail is a left-continuous step function, constant on
        // (v_{j-1}, v_j]; the infimum sits at the atom below the first step
        // that drops to Π*.
        // Tail sums of atoms carry round-off; compare with a relative slack.
        let level = pi * (1.0 + DISCRETE_TAIL_RTOL);
        let atoms = d.atoms();
        let mut prev = m.p_star;
        for &(v, _) in &atoms {
            if v > m.p_star && tail(v)? <= level {
                return Ok(prev.max(m.p_star));
            }
            prev = v;
        }
        return Ok(prev);
    }
    let hi = d.quantile(TAIL_LEVEL).max(m.p_star);
    if tail(hi)? > pi {
        return Ok(if d.support_hi().is_finite() {
            d.support_hi()
        } else {
            hi
        });
    }
    let mut failure = None;
    let (_, b) = bisect_predicate(
        m.p_star,
        hi,
        |s| 1e-12 * s.max(1.0),
        |s| match tail(s) {
            Ok(t) => t <= pi,
            Err(e) => {
                failure = Some(e);
                true
            }
        },
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(b),
    }
}

/// Number of steps of `w -> (Π* + ε)/P(X >= w)` from `w0` until `w >= β`.
pub fn count_iterations(
    d: &MaxDistribution,
    pi_star: f64,
    eps: f64,
    w0: f64,
    beta: f64,
) -> Result<usize> {
    iterate(d, pi_star, eps, w0, beta, MAX_ITERATIONS)?.ok_or(Error::IterationLimit(MAX_ITERATIONS))
}

/// As [`count_iterations`], but gives up with `None` after `cap` steps.
fn iterate(
    d: &MaxDistribution,
    pi_star: f64,
    eps: f64,
    w0: f64,
    beta: f64,
    cap: usize,
) -> Result<Option<usize>> {
    if !(eps > 0.0) {
        return Err(invalid(format!("slack must be positive, got {eps}")));
    }
    if !(w0 < beta) {
        return Err(invalid(format!(
            "start {w0} must lie below the cutoff {beta}"
        )));
    }
    let level = pi_star + eps;
    let mut w = w0;
    for step in 1..=cap {
        let s = d.sf(w);
        let next = if s > 0.0 { level / s } else { f64::INFINITY };
        if next >= beta {
            return Ok(Some(step));
        }
        if !(next - w >= MIN_PROGRESS) {
            return Err(Error::NotProgressing { step, w });
        }
        w = next;
    }
    Ok(None)
}

/// Result of the partition upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionBound {
    /// `Π* + ε*`.
    pub value: f64,
    pub eps: f64,
    /// Steps needed at `ε*`.
    pub iterations: usize,
    pub beta: f64,
    /// Breakpoints `w_0 < … < w_{n-1} = β` realising the bound.
    pub breakpoints: Vec<f64>,
}

/// Upper bound certified by a partition `w_0 < … < w_{n-1}` of the support:
/// `max(max_i w_{i+1} P(X >= w_i), ∫_[w_{n-1}, ∞) t dF)`.
pub fn partition_value(d: &MaxDistribution, breakpoints: &[f64]) -> Result<f64> {
    let Some(&last) = breakpoints.last() else {
        return Err(invalid("need at least one breakpoint"));
    };
    if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("breakpoints must be strictly increasing"));
    }
    let steps = breakpoints
        .windows(2)
        .map(|w| w[1] * d.sf(w[0]))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(steps.max(d.tail_expectation(last)?))
}

/// Smallest slack (to relative tolerance 1e-6, rounded up) for which the
/// iteration reaches `β` within `n - 1` steps.
pub fn partition_bound(d: &MaxDistribution, n: usize) -> Result<PartitionBound> {
    let m = solve_monopoly(d)?;
    partition_with(d, &m, n)
}

fn partition_with(d: &MaxDistribution, m: &MonopolyResult, n: usize) -> Result<PartitionBound> {
    if n < 2 {
        return Err(invalid("the partition upper bound needs n >= 2"));
    }
    let mean = d.mean()?;
    let beta = beta_with(d, m)?;
    let w0 = d.support_lo();
    let budget = n - 1;
    let finish = |eps: f64, iterations: usize| -> PartitionBound {
        PartitionBound {
            value: m.pi_star + eps,
            eps,
            iterations,
            beta,
            breakpoints: breakpoints(d, m.pi_star + eps, w0, beta, iterations, n),
        }
    };
    if !(w0 < beta) {
        return Ok(finish(0.0, 0));
    }
    let steps = |eps: f64| iterate(d, m.pi_star, eps, w0, beta, budget);
    let fits = |eps: f64| matches!(steps(eps), Ok(Some(_)));
    let settle = |eps: f64| -> Result<PartitionBound> {
        let k = steps(eps)?.ok_or(Error::Infeasible { steps: budget })?;
        Ok(finish(eps, k))
    };

    let lo = 1e-12 * mean;
    if fits(lo) {
        return settle(lo);
    }
    // The mean is not always enough: at n = 2 the slack must reach β - Π*.
    let mut hi = mean;
    let mut doublings = 0;
    loop {
        match steps(hi)? {
            Some(_) => break,
            None if doublings >= MAX_DOUBLINGS => return Err(Error::Infeasible { steps: budget }),
            None => {}
        }
        hi *= 2.0;
        doublings += 1;
    }
    let (_, eps) = bisect_predicate(lo, hi, |hi| EPS_REL_TOL * hi, fits);
    settle(eps)
}

/// Iterates from `w0` while below `β`, then pads with evenly spaced points so
/// the last of the `n` breakpoints is `β`.
fn breakpoints(
    d: &MaxDistribution,
    level: f64,
    w0: f64,
    beta: f64,
    k: usize,
    n: usize,
) -> Vec<f64> {
    let mut w = vec![w0];
    let mut cur = w0;
    for _ in 1..k {
        let s = d.sf(cur);
        cur = if s > 0.0 { level / s } else { f64::INFINITY };
        if cur >= beta {
            break;
        }
        w.push(cur);
    }
    let below = *w.last().unwrap_or(&w0);
    let missing = n.saturating_sub(w.len());
    if missing > 0 && beta > below {
        for j in 1..=missing {
            w.push(below + (beta - below) * j as f64 / missing as f64);
        }
    }
    w
}

/// `Π* + ε*(n)`.
pub fn upper_bound_partition(d: &MaxDistribution, n: usize) -> Result<f64> {
    Ok(partition_bound(d, n)?.value)
}

/// Everything computed alongside the four bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundMeta {
    pub p_star: f64,
    pub c_const: Option<f64>,
    pub unique_monopoly: bool,
    /// Half-width of the uniform threshold window.
    pub eps_uniform: Option<f64>,
    /// Slack of the partition bound.
    pub eps_partition: Option<f64>,
    pub iterations: Option<usize>,
    pub beta: Option<f64>,
    /// How each number was obtained.
    pub provenance: Vec<String>,
    /// Skipped bounds and failed preconditions.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub lower_det: f64,
    pub lower_uniform: Option<f64>,
    pub upper_universal: f64,
    pub upper_partition: f64,
    pub meta: BoundMeta,
}

impl BoundReport {
    /// Multiplies every value by `c`, as for a distribution scaled by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.lower_det *= c;
        out.lower_uniform = out.lower_uniform.map(|v| v * c);
        out.upper_universal *= c;
        out.upper_partition *= c;
        out
    }

    /// Largest lower bound.
    pub fn best_lower(&self) -> f64 {
        self.lower_uniform
            .map_or(self.lower_det, |v| v.max(self.lower_det))
    }

    /// Smallest upper bound.
    pub fn best_upper(&self) -> f64 {
        self.upper_universal.min(self.upper_partition)
    }
}

/// Computes all four bounds and checks that they are ordered.
pub fn bound_report(d: &MaxDistribution, n: usize) -> Result<BoundReport> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let m = solve_monopoly(d)?;
    let mean = d.mean()?;
    let mut meta = BoundMeta {
        p_star: m.p_star,
        c_const: m.c_const,
        unique_monopoly: m.unique,
        eps_uniform: None,
        eps_partition: None,
        iterations: None,
        beta: None,
        provenance: vec![
            "lower_det: monopoly revenue, earned by the deterministic threshold p*".into(),
            "upper_universal: Pi* + E[X_max]/n".into(),
        ],
        notes: Vec::new(),
    };
    if !m.unique {
        meta.notes.push("monopoly price may not be unique".into());
    }
    let lower_det = m.pi_star;
    let upper_universal = m.pi_star + mean / n as f64;

    let lower_uniform = match lower_uniform_with(d, &m, n) {
        Ok((v, eps)) => {
            meta.eps_uniform = Some(eps);
            meta.provenance.push(
                "lower_uniform: exact worst-case payoff of a threshold uniform on (p*-eps, p*+eps)"
                    .into(),
            );
            Some(v)
        }
        Err(e) => {
            meta.notes.push(format!("lower_uniform skipped: {e}"));
            None
        }
    };

    let mut upper_partition = match partition_with(d, &m, n) {
        Ok(pb) => {
            meta.eps_partition = Some(pb.eps);
            meta.iterations = Some(pb.iterations);
            meta.beta = Some(pb.beta);
            meta.provenance.push(
                "upper_partition: Pi* + smallest slack whose partition reaches beta in n-1 steps"
                    .into(),
            );
            pb.value
        }
        Err(e) => {
            meta.notes
                .push(format!("upper_partition fell back to upper_universal: {e}"));
            meta.provenance
                .push("upper_partition: universal bound (fallback)".into());
            upper_universal
        }
    };

    let atoms = d.atoms();
    if d.is_discrete() && atoms.len() <= n {
        upper_partition = lower_det;
        meta.provenance
            .push("upper_partition: at most n support points, the value equals Pi*".into());
    }

    let tol = SANDWICH_TOL * upper_universal.abs().max(1.0);
    let upper = upper_universal.min(upper_partition);
    let low = lower_uniform.unwrap_or(lower_det);
    if lower_det > low + tol || low > upper + tol {
        return Err(Error::BoundInconsistent(format!(
            "lower_det {lower_det}, lower_uniform {lower_uniform:?}, upper_universal \
             {upper_universal}, upper_partition {upper_partition}"
        )));
    }
    Ok(BoundReport {
        n,
        lower_det,
        lower_uniform,
        upper_universal,
        upper_partition,
        meta,
    })
}
