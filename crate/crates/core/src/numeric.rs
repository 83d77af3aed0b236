//! Bracketing root finders shared by the solvers and the oracle.

use crate::error::{Result, SolveError};

/// Iteration cap for every bisection loop.
pub const MAX_BISECTIONS: usize = 200;

/// Bisection on a monotone predicate.
///
/// `pred` must be false on `[lo, t*)` and true on `[t*, hi]`; `pred(hi)` is
/// assumed true. Returns the final bracket `(lo, hi)` with `pred(hi)` true.
/// Stops when the bracket is exhausted at double precision.
pub fn bisect<F>(mut lo: f64, mut hi: f64, mut pred: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<bool>,
{
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// Doubles `hi` from `start` until `pred(hi)` holds.
pub fn grow_bracket<F>(start: f64, what: &'static str, mut pred: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    let mut hi = start.max(f64::MIN_POSITIVE);
    for _ in 0..1100 {
        if pred(hi)? {
            return Ok(hi);
        }
        hi *= 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    Err(SolveError::Convergence { what, iterations: 1100 })
}

/// Root of a continuous increasing function on `[lo, hi]` with
/// `f(lo) <= 0 <= f(hi)`.
pub fn increasing_root<F>(lo: f64, hi: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (a, b) = bisect(lo, hi, |t| Ok(f(t)? >= 0.0))?;
    Ok(0.5 * (a + b))
}
