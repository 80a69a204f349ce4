//! Bracketed scalar root finding: bisection with secant refinement.

use crate::error::WaveError;
use crate::Result;

/// Termination thresholds. Defaults follow the toolkit-wide convention
/// |f| ≤ 1e−12 or bracket width ≤ 1e−13·max(1,|x|).
#[derive(Debug, Clone, Copy)]
pub struct RootTol {
    pub f_abs: f64,
    pub x_abs: f64,
}

impl Default for RootTol {
    fn default() -> Self {
        RootTol { f_abs: 1e-12, x_abs: 1e-13 }
    }
}

/// Root of `f` inside `[a, b]`; requires a sign change. Bisection keeps the
/// bracket valid, a secant step is taken whenever it lands strictly inside.
pub fn bisect_secant<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: RootTol) -> Result<f64> {
    let mut lo = a;
    let mut hi = b;
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(WaveError::BracketFailure { what: "no sign change on supplied bracket" });
    }
    for _ in 0..200 {
        let width = hi - lo;
        let xscale = lo.abs().max(hi.abs()).max(1.0);
        // secant candidate, fall back to midpoint
        let mut x = if (fhi - flo).abs() > 0.0 {
            lo - flo * width / (fhi - flo)
        } else {
            0.5 * (lo + hi)
        };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx.abs() <= tol.f_abs || width <= tol.x_abs * xscale {
            return Ok(x);
        }
        if flo * fx < 0.0 {
            hi = x;
            fhi = fx;
        } else {
            lo = x;
            flo = fx;
        }
        // guarantee progress: if secant stalls, force a bisection step
        if hi - lo > 0.5 * width {
            let m = 0.5 * (lo + hi);
            let fm = f(m);
            if fm.abs() <= tol.f_abs {
                return Ok(m);
            }
            if flo * fm < 0.0 {
                hi = m;
                fhi = fm;
            } else {
                lo = m;
                flo = fm;
            }
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Grow a bracket geometrically from `start` in the `+` direction until the
/// sign of `f` flips, then solve. `first_step` sets the initial stride.
pub fn grow_and_solve<F: Fn(f64) -> f64>(
    f: F,
    start: f64,
    first_step: f64,
    limit: f64,
    tol: RootTol,
) -> Result<f64> {
    let f0 = f(start);
    if f0 == 0.0 {
        return Ok(start);
    }
    let mut step = first_step;
    let mut lo = start;
    let mut flo = f0;
    loop {
        let hi = lo + step;
        if hi > limit {
            return Err(WaveError::BracketFailure { what: "bracket growth hit the upper limit" });
        }
        let fhi = f(hi);
        if f0 * fhi <= 0.0 {
            let _ = flo;
            return bisect_secant(f, lo, hi, tol);
        }
        lo = hi;
        flo = fhi;
        step *= 2.0;
    }
}
