//! Revenue curve, monopoly price and the curvature constant `C(F)`.

use serde::{Deserialize, Serialize};

use crate::dist::MaxDistribution;
use crate::error::{Error, Result};
use crate::numeric::golden_max;

const GRID_POINTS: usize = 10_000;
const GRID_TOP: f64 = 1.0 - 1e-9;
const NEAR_MAX: f64 = 1e-6;
const CLUSTER_GAP: usize = 10;
const CURVATURE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonopolyResult {
    pub p_star: f64,
    pub pi_star: f64,
    /// `C(F) = S(p*)^2 / (2F'(p*) + p* F''(p*))`; `None` when undefined.
    pub c_const: Option<f64>,
    /// Heuristic: false when the search grid showed two separate near-optimal
    /// regions or a flat top.
    pub unique: bool,
}

/// `Π(p) = p · P(X >= p)`.
pub fn revenue(d: &MaxDistribution, p: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    p * d.sf(p)
}

/// Finds the smallest global maximiser of the revenue curve.
///
/// Purely atomic laws are solved exactly over the atoms. Otherwise revenue is
/// scanned on a grid that is uniform in probability, atoms and the bottom of
/// the support are added as candidates, and the best cell is refined by
/// golden-section search.
pub fn solve_monopoly(d: &MaxDistribution) -> Result<MonopolyResult> {
    d.mean()?;
    if d.is_discrete() {
        let mut best = (0.0, 0.0);
        for (v, _) in d.atoms() {
            let r = revenue(d, v);
            if r > best.1 {
                best = (v, r);
            }
        }
        let ties = d
            .atoms()
            .iter()
            .filter(|(v, _)| (revenue(d, *v) - best.1).abs() <= NEAR_MAX)
            .count();
        return Ok(MonopolyResult {
            p_star: best.0,
            pi_star: best.1,
            c_const: None,
            unique: ties == 1,
        });
    }

    let grid: Vec<f64> = std::iter::once(d.support_lo())
        .chain((1..=GRID_POINTS).map(|i| d.quantile(i as f64 / GRID_POINTS as f64 * GRID_TOP)))
        .collect();
    let rev: Vec<f64> = grid.iter().map(|&p| revenue(d, p)).collect();
    let (mut i_best, mut r_best) = (0usize, f64::NEG_INFINITY);
    for (i, &r) in rev.iter().enumerate() {
        if r > r_best {
            i_best = i;
            r_best = r;
        }
    }
    let lo = grid[i_best.saturating_sub(1)];
    let hi = grid[(i_best + 1).min(grid.len() - 1)];
    let (mut p, mut r) = golden_max(|x| revenue(d, x), lo, hi, 1e-10);
    if r_best > r {
        p = grid[i_best];
        r = r_best;
    }

    let bottom = d.quantile(f64::MIN_POSITIVE);
    let candidates = d
        .atoms()
        .into_iter()
        .map(|a| a.0)
        .chain(std::iter::once(bottom));
    for x in candidates {
        let rx = revenue(d, x);
        if rx > r + 1e-15 || (rx >= r - 1e-15 && x < p) {
            p = x;
            r = rx;
        }
    }

    let unique = single_cluster(&grid, &rev, r.max(r_best), p);
    let c_const = c_constant(d, p).ok();
    Ok(MonopolyResult {
        p_star: p,
        pi_star: r,
        c_const,
        unique,
    })
}

/// Near-optimal grid points must form one run without gaps wider than
/// `CLUSTER_GAP` cells, and that run must be narrow relative to `p`.
fn single_cluster(grid: &[f64], rev: &[f64], top: f64, p: f64) -> bool {
    let near: Vec<usize> = (0..rev.len())
        .filter(|&i| rev[i] >= top - NEAR_MAX)
        .collect();
    let (Some(&first), Some(&last)) = (near.first(), near.last()) else {
        return true;
    };
    let contiguous = near.windows(2).all(|w| w[1] - w[0] <= CLUSTER_GAP);
    contiguous && grid[last] - grid[first] <= 0.05 * p.max(f64::MIN_POSITIVE)
}

/// `C(F) = (1 - F(p*))^2 / (2F'(p*) + p* F''(p*))`.
pub fn c_constant(d: &MaxDistribution, p_star: f64) -> Result<f64> {
    if d.is_discrete() {
        return Err(Error::UnsupportedForDiscrete("curvature constant"));
    }
    let denom = 2.0 * d.derivative(p_star, 1)? + p_star * d.derivative(p_star, 2)?;
    if !(denom > CURVATURE_FLOOR) {
        return Err(Error::DegenerateCurvature(denom));
    }
    let s = d.sf(p_star);
    Ok(s * s / denom)
}
