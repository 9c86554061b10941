//! Bracketed one-dimensional root finding: a uniform sign-change scan
//! followed by bisection to machine precision.

/// Roots found on a bracket, plus the sampled residual profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    pub roots: Vec<f64>,
    pub profile: Vec<(f64, f64)>,
}

/// Bisects `f` on `[lo, hi]`, which must bracket a sign change.
///
/// Runs until the midpoint is no longer strictly inside the interval.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    for _ in 0..256 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scans `f` at `intervals + 1` uniform points of `[lo, hi]` and bisects
/// every sign change. Samples with `|f| <= zero_tol` count as roots.
/// Non-finite samples never start a bracket.
pub fn scan_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, intervals: usize, zero_tol: f64) -> Scan {
    let intervals = intervals.max(1);
    let step = (hi - lo) / intervals as f64;
    let profile: Vec<(f64, f64)> = (0..=intervals)
        .map(|i| {
            let x = if i == intervals { hi } else { lo + step * i as f64 };
            (x, f(x))
        })
        .collect();

    let mut roots = Vec::new();
    let mut last_was_zero = false;
    for i in 0..=intervals {
        let (x, fx) = profile[i];
        if fx.is_finite() && fx.abs() <= zero_tol {
            if !last_was_zero {
                roots.push(x);
            }
            last_was_zero = true;
            continue;
        }
        last_was_zero = false;
        if i == intervals {
            break;
        }
        let (x_next, f_next) = profile[i + 1];
        if !fx.is_finite() || !f_next.is_finite() || f_next.abs() <= zero_tol {
            continue;
        }
        if (fx < 0.0) != (f_next < 0.0) {
            roots.push(bisect(&f, x, x_next));
        }
    }
    Scan { roots, profile }
}

/// The `k`-th positive root (`k ≥ 1`) of `tan x = x`, in `(kπ, kπ + π/2)`.
///
/// Bisection runs on `sin x − x cos x`, which has the same roots and no
/// poles.
pub fn tan_fixed_point(k: u32) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    let k = k.max(1) as f64;
    bisect(|x| x.sin() - x * x.cos(), k * PI, k * PI + FRAC_PI_2)
}
