//! Bracketed scalar root finding: bisection followed by guarded Newton polish.

/// Relative bracket width at which bisection stops.
pub const BISECTION_REL_WIDTH: f64 = 1e-14;
/// Newton steps attempted after bisection.
pub const NEWTON_POLISH_STEPS: usize = 5;

const MAX_BISECTIONS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct BracketFailure {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl std::fmt::Display for BracketFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "f({:e}) = {:e} and f({:e}) = {:e} do not straddle zero",
            self.lo, self.f_lo, self.hi, self.f_hi
        )
    }
}

/// Finds a root of `f` in `[lo, hi]`. `f` returns `(value, derivative)`; the
/// derivative is only used by the polish steps, which are accepted only if
/// they stay inside the final bracket and shrink `|f|`.
pub fn bracketed_root<F>(mut f: F, mut lo: f64, mut hi: f64) -> Result<f64, BracketFailure>
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut f_lo = f(lo).0;
    let f_hi = f(hi).0;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(BracketFailure { lo, hi, f_lo, f_hi });
    }

    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= BISECTION_REL_WIDTH * lo.abs().max(hi.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid).0;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }

    let mut x = 0.5 * (lo + hi);
    let (mut fx, mut dfx) = f(x);
    for _ in 0..NEWTON_POLISH_STEPS {
        if fx == 0.0 || dfx == 0.0 || !dfx.is_finite() {
            break;
        }
        let next = x - fx / dfx;
        if !(lo..=hi).contains(&next) {
            break;
        }
        let (f_next, df_next) = f(next);
        if f_next.abs() >= fx.abs() {
            break;
        }
        x = next;
        fx = f_next;
        dfx = df_next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let root = bracketed_root(|x| (x * x - 2.0, 2.0 * x), 0.0, 2.0).unwrap();
        assert!((root - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn decreasing_function() {
        let root = bracketed_root(|x| ((-x).exp() - 0.5, -(-x).exp()), 0.0, 10.0).unwrap();
        assert!((root - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_bracket() {
        let err = bracketed_root(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0).unwrap_err();
        assert!(err.f_lo > 0.0 && err.f_hi > 0.0);
        assert!(err.to_string().contains("straddle"));
    }

    #[test]
    fn endpoint_roots() {
        assert_eq!(bracketed_root(|x| (x, 1.0), 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(bracketed_root(|x| (x - 1.0, 1.0), 0.0, 1.0).unwrap(), 1.0);
    }
}
