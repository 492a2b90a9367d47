//! Bracketing root finders for monotone scalar maps.

use crate::error::{Error, Result};

/// Bisection on `[lo, hi]` for a function with `f(lo)` and `f(hi)` of
/// opposite sign. Stops when the bracket is narrower than `tol` or can no
/// longer be split in floating point. Returns the final bracket.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok((lo, lo));
    }
    if f_hi == 0.0 {
        return Ok((hi, hi));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::domain(alloc::format!(
            "bisection bracket [{lo}, {hi}] does not change sign ({f_lo:e}, {f_hi:e})"
        )));
    }
    let lo_negative = f_lo < 0.0;
    for _ in 0..2000 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok((mid, mid));
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Bisection on a predicate that is `true` on `[lo, x*)` and `false` on
/// `[x*, hi]`. Returns `(last_true, first_false)`.
pub fn bisect_predicate<F>(mut holds: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<bool>,
{
    for _ in 0..2000 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let (lo, hi) = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-14).unwrap();
        assert!((0.5 * (lo + hi) - core::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn bisect_decreasing() {
        let (lo, hi) = bisect(|x| Ok(1.0 - x), 0.0, 3.0, 1e-12).unwrap();
        assert!(lo <= 1.0 && 1.0 <= hi);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        assert!(bisect(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn predicate_threshold() {
        let (a, b) = bisect_predicate(|x| Ok(x < 0.3), 0.0, 1.0, 1e-13).unwrap();
        assert!(a < 0.3 && b >= 0.3 && b - a <= 1e-13);
    }
}
