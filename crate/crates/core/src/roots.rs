//! Bisection on continuous scalar functions, with a grid scan to find a
//! sign-change bracket.

use crate::error::{Error, Result};

/// Result of a bisection run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Bisection on `[lo, hi]`, which must bracket a sign change.
///
/// Stops when `|f(x)| < ftol` or the bracket is narrower than `xtol`. The
/// returned point is the bracket endpoint or midpoint with the smallest `|f|`
/// seen.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, ftol: f64, xtol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) {
        return Err(Error::domain(format!("empty bracket [{lo}, {hi}]")));
    }
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(Root {
            x: lo,
            fx: 0.0,
            iterations: 0,
        });
    }
    if fhi == 0.0 {
        return Ok(Root {
            x: hi,
            fx: 0.0,
            iterations: 0,
        });
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::numeric(format!(
            "no sign change on [{lo}, {hi}] (f = {flo:e}, {fhi:e})"
        )));
    }
    let mut best = if flo.abs() < fhi.abs() {
        Root {
            x: lo,
            fx: flo,
            iterations: 0,
        }
    } else {
        Root {
            x: hi,
            fx: fhi,
            iterations: 0,
        }
    };
    for it in 1..=max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm.abs() < best.fx.abs() {
            best = Root {
                x: mid,
                fx: fm,
                iterations: it,
            };
        }
        best.iterations = it;
        if fm.abs() < ftol || hi - lo < xtol {
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Evaluates `f` on `xs` (in order) and returns the first adjacent pair whose
/// values change sign, with the sampled values.
pub fn scan_bracket<F>(mut f: F, xs: &[f64]) -> Result<Option<(f64, f64)>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut prev: Option<(f64, f64)> = None;
    for &x in xs {
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(Some((x, x)));
        }
        if let Some((px, pf)) = prev {
            if pf.signum() != fx.signum() {
                return Ok(Some((px, x)));
            }
        }
        prev = Some((x, fx));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt_two() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-15, 1e-15, 200).unwrap();
        assert!((r.x - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn bisect_requires_sign_change() {
        assert!(matches!(
            bisect(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 1e-12, 50),
            Err(Error::NumericFailure(_))
        ));
    }

    #[test]
    fn scan_finds_first_bracket() {
        let xs: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        let b = scan_bracket(|x| Ok((x - 3.5) * (x - 7.5)), &xs).unwrap();
        assert_eq!(b, Some((3.0, 4.0)));
        assert_eq!(scan_bracket(|x| Ok(x + 100.0), &xs).unwrap(), None);
    }
}
