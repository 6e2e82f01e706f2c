//! Bracketed scalar root finding.

/// Root of `f` on `[lo, hi]` by the Illinois variant of regula falsi.
///
/// Requires `f(lo)` and `f(hi)` of opposite sign (or one of them zero); returns
/// `None` otherwise. Stops when the bracket is narrower than `xtol`.
pub fn illinois<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
) -> Option<f64> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if !(flo.signum() != fhi.signum()) || flo.is_nan() || fhi.is_nan() {
        return None;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let x = (lo * fhi - hi * flo) / (fhi - flo);
        let x = if x > lo.min(hi) && x < lo.max(hi) {
            x
        } else {
            0.5 * (lo + hi)
        };
        let fx = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if fx.signum() == fhi.signum() {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        } else {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        }
        if (hi - lo).abs() <= xtol {
            break;
        }
    }
    Some(if flo.abs() < fhi.abs() { lo } else { hi })
}

/// Solves `f(x) = target` for a non-decreasing `f` on `[lo, hi]` with Newton steps
/// safeguarded by bisection. `f(lo) <= target <= f(hi)` is assumed.
pub fn monotone_newton<F>(
    mut f: F,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    guess: f64,
    xtol: f64,
) -> f64
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut x = guess.clamp(lo, hi);
    for _ in 0..200 {
        let (v, d) = f(x);
        let r = v - target;
        if r == 0.0 {
            return x;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= xtol {
            break;
        }
        let step = x - r / d;
        let next = if d > 0.0 && step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 0.25 * xtol {
            return next;
        }
        x = next;
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn illinois_finds_cube_root() {
        let r = illinois(|x| x * x * x - 2.0, 0.0, 3.0, 1e-14).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
        assert!(illinois(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn newton_handles_flat_derivative() {
        let x = monotone_newton(|x| (x * x * x, 3.0 * x * x), 0.125, -1.0, 1.0, 0.0, 1e-14);
        assert!((x - 0.5).abs() < 1e-13);
    }
}
