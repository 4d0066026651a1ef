//! Worst-case prophet ratio over all maxima with a given mean and variance.
//!
//! The worst law is an equal-revenue distribution `F(x) = 1 - π/x` on
//! `(π, k)` with an atom at `k`. Its ratio `z = π/μ` solves
//! `2 z² e^{1/z - 1} - z² = 1 + σ²/μ²`, equivalently `g(1/z) = 1 + cv²` with
//! `g(t) = t⁻² (2 e^{t-1} - 1)`. Because `log g` is convex on `[1, ∞)`, each
//! tangent line gives an explicit bound `z >= 1/(c + β log(1 + cv²))`.

use serde::{Deserialize, Serialize};

use crate::dist::MaxDistribution;
use crate::error::{invalid, Result};
use crate::numeric::bisect_predicate;

const Z_LO: f64 = 1e-9;
const ALPHA_MAX: f64 = 40.0;
const ALPHA_GRID: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProphetSolution {
    /// Squared coefficient of variation `σ²/μ²`.
    pub cv2: f64,
    /// Worst-case ratio `Π*/μ`.
    pub z: f64,
    /// Worst-case monopoly revenue `z μ`.
    pub pi: f64,
    /// Top of the worst-case support, `π e^{μ/π - 1}`.
    pub k_top: f64,
    /// Best tangent bound `1/(c + β log(1 + cv²))` over the α grid.
    pub explicit_bound: f64,
    pub beta_used: f64,
    pub alpha_used: f64,
    pub c_used: f64,
    /// `2 z² e^{1/z - 1} - z² - 1 - cv²` at the returned `z`.
    pub residual: f64,
}

/// `g(t) = t⁻² (2 e^{t-1} - 1)`.
pub fn g(t: f64) -> f64 {
    (2.0 * (t - 1.0).exp() - 1.0) / (t * t)
}

/// `g'(t) = 2 t⁻³ ((t - 2) e^{t-1} + 1)`.
pub fn g_prime(t: f64) -> f64 {
    2.0 * ((t - 2.0) * (t - 1.0).exp() + 1.0) / (t * t * t)
}

fn residual(z: f64, cv2: f64) -> f64 {
    let e = (1.0 / z - 1.0).exp();
    2.0 * z * z * e - z * z - 1.0 - cv2
}

/// Tangent coefficients `(c, β)` of `log g` at `α > 1`: `β = g/g'` and
/// `c = α - β log g(α)`.
pub fn tangent_coefficients(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(invalid(format!("tangent point must exceed 1, got {alpha}")));
    }
    let beta = g(alpha) / g_prime(alpha);
    Ok((alpha - beta * g(alpha).ln(), beta))
}

/// The tangent point `α > 1` whose slope coefficient is `β`. `β` decreases
/// from `+∞` at `α = 1` towards 1, so any `β > 1` has exactly one `α`.
pub fn alpha_for_beta(beta: f64) -> Result<f64> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(invalid(format!(
            "beta must exceed 1 (alpha > 1), got {beta}"
        )));
    }
    let slope = |a: f64| g(a) / g_prime(a);
    let mut hi = 2.0;
    while slope(hi) > beta {
        hi *= 2.0;
        if hi > 700.0 {
            return Err(invalid(format!("beta {beta} is too close to 1")));
        }
    }
    let (lo, hi) = bisect_predicate(1.0, hi, |h| 1e-14 * h, |a| a > 1.0 && slope(a) <= beta);
    Ok(if lo > 1.0 { 0.5 * (lo + hi) } else { hi })
}

/// Tangent bound at `α`: `1/(α + β (log(1 + cv²) - log g(α)))`.
pub fn explicit_log_bound_at_alpha(cv2: f64, alpha: f64) -> Result<f64> {
    if !(cv2 >= 0.0) {
        return Err(invalid(format!("cv2 must be nonnegative, got {cv2}")));
    }
    let (c, beta) = tangent_coefficients(alpha)?;
    let denom = c + beta * cv2.ln_1p();
    // Convexity keeps the tangent above 1 wherever the root lies; the clamp
    // only guards rounding.
    Ok(1.0 / denom.max(1.0))
}

/// `(c(β) + β log(1 + cv²))⁻¹` with `c(β)` from the tangent at the matching `α`.
pub fn explicit_log_bound(cv2: f64, beta: f64) -> Result<f64> {
    explicit_log_bound_at_alpha(cv2, alpha_for_beta(beta)?)
}

/// Solves the implicit equation for the worst-case ratio and tunes the
/// explicit bound over an `α` grid on `(1, 40]`.
pub fn solve_worst_ratio(mu: f64, sigma2: f64) -> Result<ProphetSolution> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(invalid(format!("mean must be positive, got {mu}")));
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(invalid(format!(
            "variance must be nonnegative, got {sigma2}"
        )));
    }
    let cv2 = sigma2 / (mu * mu);
    let z = if cv2 == 0.0 {
        1.0
    } else {
        // residual > 0 to the left of the root, <= 0 at z = 1
        let (lo, hi) = bisect_predicate(Z_LO, 1.0, |_| 0.0, |z| residual(z, cv2) <= 0.0);
        if residual(lo, cv2).abs() < residual(hi, cv2).abs() {
            lo
        } else {
            hi
        }
    };
    let pi = z * mu;
    let k_top = pi * (mu / pi - 1.0).exp();

    let mut best = (f64::NEG_INFINITY, f64::NAN, f64::NAN, f64::NAN);
    for j in 1..=ALPHA_GRID {
        let alpha = 1.0 + (ALPHA_MAX - 1.0) * j as f64 / ALPHA_GRID as f64;
        let (c, beta) = tangent_coefficients(alpha)?;
        let b = explicit_log_bound_at_alpha(cv2, alpha)?;
        if b > best.0 {
            best = (b, beta, alpha, c);
        }
    }
    Ok(ProphetSolution {
        cv2,
        z,
        pi,
        k_top,
        explicit_bound: best.0,
        beta_used: best.1,
        alpha_used: best.2,
        c_used: best.3,
        residual: residual(z, cv2),
    })
}

/// The equal-revenue law with mean `mu` and variance `sigma2` that attains
/// the worst ratio.
pub fn worst_case_distribution(mu: f64, sigma2: f64) -> Result<MaxDistribution> {
    let s = solve_worst_ratio(mu, sigma2)?;
    MaxDistribution::truncated_pareto(s.pi, s.k_top.max(s.pi))
}
