//! Bracketing root finder (Brent's method with bisection safeguard).

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Find a root of a continuous monotone `f` bracketed by `[lo, hi]`.
///
/// Returns `x` with `|f(x)| <= tol` or with final bracket width `<= tol`.
pub fn find_root_monotone<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo, hi, f_lo: fa, f_hi: fb });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if fb.abs() <= tol || xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic interpolation, or secant when a == c
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::NonFinite(format!("objective at {b}")));
        }
    }
    Ok(b)
}

/// Widen `[lo, hi]` geometrically until a monotone `f` changes sign.
pub fn expand_bracket<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, max_steps: usize) -> Result<(f64, f64)> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    for _ in 0..max_steps {
        if flo.signum() != fhi.signum() {
            return Ok((lo, hi));
        }
        let w = hi - lo;
        let increasing = fhi > flo;
        let decreasing = fhi < flo;
        let positive = flo > 0.0;
        // for a monotone f the root lies beyond exactly one end
        if (increasing && positive) || (decreasing && !positive) {
            lo -= w;
            flo = f(lo);
        } else if increasing || decreasing {
            hi += w;
            fhi = f(hi);
        } else {
            lo -= w;
            hi += w;
            flo = f(lo);
            fhi = f(hi);
        }
    }
    if flo.signum() != fhi.signum() {
        Ok((lo, hi))
    } else {
        Err(Error::NoBracket { lo, hi, f_lo: flo, f_hi: fhi })
    }
}
