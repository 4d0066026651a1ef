//! Scalar numerics shared by the bound machinery: adaptive Simpson quadrature,
//! golden-section maximisation and bracketing bisection.

/// Default absolute tolerance for quadrature calls.
pub const QUAD_TOL: f64 = 1e-10;

/// Hard cap on the number of Simpson panels per call.
pub const MAX_SUBDIVISIONS: usize = 1_000_000;

const MAX_DEPTH: u32 = 60;

/// Result of an adaptive quadrature call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the local Richardson error estimates.
    pub error: f64,
    /// Number of accepted panels.
    pub panels: usize,
    /// Set when the subdivision cap was hit before every panel converged.
    pub capped: bool,
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` with absolute tolerance `tol`.
///
/// Uses an explicit work stack, so deep refinement near kinks cannot overflow.
/// Callers should split at known kinks; convergence across a kink is slow.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    if !(b > a) {
        return Quadrature {
            value: 0.0,
            error: 0.0,
            panels: 0,
            capped: false,
        };
    }
    struct Panel {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    }
    let simpson = |a: f64, b: f64, fa: f64, fm: f64, fb: f64| (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let mut stack = vec![Panel {
        a,
        b,
        fa,
        fm,
        fb,
        whole: simpson(a, b, fa, fm, fb),
        tol,
        depth: 0,
    }];
    let mut value = 0.0;
    let mut error = 0.0;
    let mut panels = 0usize;
    let mut capped = false;

    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        let converged = delta.abs() <= 15.0 * p.tol;
        let too_deep = p.depth >= MAX_DEPTH || m <= p.a || m >= p.b;
        if converged || too_deep || panels + stack.len() >= MAX_SUBDIVISIONS {
            if !converged {
                capped = true;
            }
            value += left + right + delta / 15.0;
            error += delta.abs() / 15.0;
            panels += 1;
            continue;
        }
        let half = 0.5 * p.tol;
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol: half,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol: half,
            depth: p.depth + 1,
        });
    }
    Quadrature {
        value,
        error,
        panels,
        capped,
    }
}

/// Integrates over `[a, b]` after splitting at every point of `breaks` that
/// falls strictly inside the interval. The tolerance is shared evenly.
pub fn integrate_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut knots: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    knots.push(a);
    knots.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    knots.push(b);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let pieces = (knots.len() - 1) as f64;
    knots
        .windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], tol / pieces).value)
        .sum()
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the maximiser of a unimodal `f` on `[a, b]`,
/// stopping once the bracket is narrower than `width`. Returns `(x, f(x))`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, width: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= width {
            break;
        }
        // Ties move toward the left end so flat tops resolve to the smaller point.
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(c, fc), (d, fd), (x, fx)]
        .into_iter()
        .fold((x, fx), |best, cand| {
            if cand.1 > best.1 || (cand.1 == best.1 && cand.0 < best.0) {
                cand
            } else {
                best
            }
        })
}

/// Bisection on a monotone predicate: `pred(lo)` is false and `pred(hi)` is
/// true. Returns the final `(lo, hi)` bracket once `hi - lo <= tol(hi)` or
/// the bracket stops shrinking.
pub fn bisect_predicate<P, T>(mut lo: f64, mut hi: f64, tol: T, mut pred: P) -> (f64, f64)
where
    P: FnMut(f64) -> bool,
    T: Fn(f64) -> f64,
{
    for _ in 0..2000 {
        if hi - lo <= tol(hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}
