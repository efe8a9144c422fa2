//! Bracketed scalar root finding shared by the potential and closure solvers.

use crate::error::{Error, Result};

pub(crate) const MAX_ITER: usize = 400;

/// Bisects `f` on `[lo, hi]` until the bracket is narrower than `rel_width`
/// relative to its midpoint. Returns the final bracket.
///
/// The signs at the ends must differ; a zero at either end is returned as a
/// degenerate bracket. Positive brackets spanning more than a factor of four
/// are split at the geometric mean.
pub(crate) fn bisect<F>(f: F, mut lo: f64, mut hi: f64, rel_width: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok((lo, lo));
    }
    if f_hi == 0.0 {
        return Ok((hi, hi));
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::ConvergenceFailure(format!(
            "no sign change on [{lo:e}, {hi:e}] (f = {f_lo:e}, {f_hi:e})"
        )));
    }
    for _ in 0..MAX_ITER {
        let mid = if lo > 0.0 && hi > 4.0 * lo {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) <= rel_width * mid.abs() || mid <= lo || mid >= hi {
            return Ok((lo, hi));
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok((mid, mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::ConvergenceFailure(format!(
        "bisection exceeded {MAX_ITER} iterations"
    )))
}

/// Newton polish inside a bracket. A step is only accepted if it stays in
/// `[lo, hi]` and does not increase `|f|`.
pub(crate) fn safeguarded_newton<F, D>(f: F, df: D, x0: f64, lo: f64, hi: f64, steps: usize) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = x0;
    let mut fx = f(x);
    for _ in 0..steps {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let trial = x - fx / d;
        if !(trial >= lo && trial <= hi) {
            break;
        }
        let ft = f(trial);
        if ft.abs() > fx.abs() {
            break;
        }
        x = trial;
        fx = ft;
    }
    x
}

/// Brent's method (inverse quadratic interpolation, secant and bisection).
///
/// Stops when `|f| <= f_tol` or the bracket shrinks below `x_tol`.
pub(crate) fn brent<F>(mut f: F, a: f64, b: f64, x_tol: f64, f_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa.abs() <= f_tol {
        return Ok(a);
    }
    if fb.abs() <= f_tol {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::ConvergenceFailure(format!(
            "brent: no sign change on [{a:e}, {b:e}]"
        )));
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
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= f_tol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut pp, mut qq);
            if a == c {
                pp = 2.0 * xm * s;
                qq = 1.0 - s;
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                pp = s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0));
                qq = (q0 - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if pp > 0.0 {
                qq = -qq;
            }
            pp = pp.abs();
            let min1 = 3.0 * xm * qq - (tol1 * qq).abs();
            let min2 = (e * qq).abs();
            if 2.0 * pp < min1.min(min2) {
                e = d;
                d = pp / qq;
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
        fb = f(b)?;
    }
    Err(Error::ConvergenceFailure(format!(
        "brent exceeded {MAX_ITER} iterations"
    )))
}
