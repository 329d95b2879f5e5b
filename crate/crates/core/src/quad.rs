//! Adaptive quadrature for integrands on `[lower, inf)` that decay at least
//! exponentially, which covers every spectral average in this crate.
//!
//! The semi-infinite range is first truncated where the integrand has fallen
//! below `1e-14` of its running peak, then integrated by adaptive Simpson
//! subdivision on the finite remainder.

use crate::error::Error;

/// Relative envelope level at which the tail is considered negligible.
const TAIL_DROP: f64 = 1e-14;

/// Tolerances and the subdivision budget for one integration call.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-11, max_subdivisions: 100_000 }
    }
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Self {
        Self { abs_tol, rel_tol, max_subdivisions }
    }

    /// Integrates `f` over `[lower, inf)`.
    ///
    /// Fails with [`Error::QuadratureNonConvergence`] if the subdivision
    /// budget runs out before the local error estimates meet the tolerance.
    pub fn integrate_semi_infinite<F>(&self, f: F, lower: f64) -> Result<f64, Error>
    where
        F: Fn(f64) -> f64,
    {
        assert!(lower.is_finite(), "lower limit must be finite, got {lower}");
        let upper = truncation_point(&f, lower);
        if upper <= lower {
            return Ok(0.0);
        }
        self.integrate_finite(&f, lower, upper)
    }

    /// Adaptive Simpson on a finite interval.
    pub fn integrate_finite<F>(&self, f: &F, a: f64, b: f64) -> Result<f64, Error>
    where
        F: Fn(f64) -> f64,
    {
        assert!(a.is_finite() && b.is_finite() && a <= b, "bad interval [{a}, {b}]");
        if a == b {
            return Ok(0.0);
        }
        // Coarse whole-interval estimate seeds the relative-error target.
        let fa = f(a);
        let fb = f(b);
        let m = 0.5 * (a + b);
        let fm = f(m);
        let whole = simpson(a, b, fa, fm, fb);
        let tol = self.abs_tol.max(self.rel_tol * whole.abs());

        let mut total = 0.0;
        let mut used = 0usize;
        // Stack of pending panels: (a, b, fa, fm, fb, panel_estimate, tol).
        let mut stack = vec![(a, b, fa, fm, fb, whole, tol)];
        let mut last_error = f64::INFINITY;
        while let Some((a, b, fa, fm, fb, s, tol)) = stack.pop() {
            used += 1;
            if used > self.max_subdivisions {
                return Err(Error::QuadratureNonConvergence {
                    max_subdivisions: self.max_subdivisions,
                    last_error,
                });
            }
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = simpson(a, m, fa, flm, fm);
            let right = simpson(m, b, fm, frm, fb);
            let err = (left + right - s) / 15.0;
            last_error = err.abs();
            // Width floor: below ~40 ulps of the endpoints the midpoint stops
            // resolving, so accept the panel rather than loop forever.
            let width_floor = 1e-14 * (a.abs() + b.abs()).max(1e-300);
            if last_error <= tol || (b - a) <= width_floor {
                total += left + right + err;
            } else {
                let half = 0.5 * tol;
                stack.push((a, m, fa, flm, fm, left, half));
                stack.push((m, b, fm, frm, fb, right, half));
            }
        }
        Ok(total)
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Finds a point beyond which |f| stays below `TAIL_DROP` times its running
/// peak. Probes an arithmetic grid, then requires a run of consecutive
/// sub-threshold probes so an isolated zero crossing does not stop the scan.
fn truncation_point<F: Fn(f64) -> f64>(f: &F, lower: f64) -> f64 {
    const STEP: f64 = 0.25;
    const QUIET_RUN: usize = 24;
    const MAX_SPAN: f64 = 1e6;

    let mut peak = 0.0f64;
    let mut quiet = 0usize;
    let mut x = lower;
    loop {
        let v = f(x).abs();
        if v > peak {
            peak = v;
            quiet = 0;
        } else if v <= TAIL_DROP * peak && peak > 0.0 {
            quiet += 1;
            if quiet >= QUIET_RUN {
                return x;
            }
        } else {
            quiet = 0;
        }
        x += STEP;
        if x - lower > MAX_SPAN {
            // Either the integrand never rose above zero or it decays too
            // slowly for this truncation strategy; integrate what we scanned.
            return x;
        }
    }
}
