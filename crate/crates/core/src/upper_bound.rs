//! Informed-receiver upper bound on the bottleneck rate.
//!
//! If both relays could cooperate and the destination knew the channel, the
//! problem reduces to independent scalar bottlenecks on the eigenvalues of
//! the stacked channel's Gram matrix. The optimal allocation is a
//! water-filling in reverse: a water level `nu` splits the spectrum, every
//! eigenvalue above `nu sigma2` contributes, and `nu` is pinned by spending
//! exactly the total fronthaul `C1 + C2` across the spectrum:
//!
//! ```text
//! T . int_{nu s2}^inf log2(x / (nu s2)) f(x) dx = C1 + C2
//! R  = T . int_{nu s2}^inf [log2(1 + x/s2) - log2(1 + nu)] f(x) dx
//! ```
//!
//! with `f` the unordered-eigenvalue density and `T` the eigenvalue count.

use crate::config::ChannelConfig;
use crate::error::Error;
use crate::quad::Quadrature;
use crate::wishart::{eig_density, EigSpec};

/// Result of the upper-bound evaluation. `nu` is `+inf` when the total
/// fronthaul is zero (the constraint set collapses and the rate is zero).
#[derive(Debug, Clone, Copy)]
pub struct UpperBoundResult {
    pub rate: f64,
    pub nu: f64,
    pub spec: EigSpec,
}

/// Fronthaul spent at water level `nu`, minus the per-eigenvalue budget:
///
/// ```text
/// int_{nu s2}^inf log2(x / (nu s2)) f(x) dx  -  c_sum / T
/// ```
///
/// Strictly decreasing in `nu`; its root fixes the water level.
pub fn bottleneck_residual(
    spec: &EigSpec,
    sigma2: f64,
    c_sum: f64,
    nu: f64,
) -> Result<f64, Error> {
    assert!(nu > 0.0, "water level must be positive, got {nu}");
    assert!(sigma2 > 0.0 && c_sum >= 0.0);
    let lower = nu * sigma2;
    let quad = Quadrature::default();
    let spent = quad.integrate_semi_infinite(
        |x| {
            if x <= lower {
                return 0.0;
            }
            (x / lower).log2() * eig_density(spec, x)
        },
        lower,
    )?;
    Ok(spent - c_sum / spec.t() as f64)
}

/// Bounds within which the bracket for `nu` is expanded geometrically. The
/// floor keeps `nu * sigma2` well clear of f64 underflow for any noise
/// variance down to 1e-10 while admitting budgets of thousands of bits.
const NU_MIN: f64 = 1e-290;
const NU_MAX: f64 = 1e90;

/// Solves the bottleneck constraint for the water level by bisection in
/// log space, after expanding the initial bracket [1e-12, 1e12] until the
/// residual changes sign.
pub fn solve_nu(spec: &EigSpec, sigma2: f64, c_sum: f64, tol: f64) -> Result<f64, Error> {
    assert!(c_sum > 0.0, "c_sum must be positive, got {c_sum}");
    assert!(tol > 0.0);
    let mut lo = 1e-12;
    let mut hi = 1e12;
    while bottleneck_residual(spec, sigma2, c_sum, lo)? <= 0.0 {
        lo *= 1e-4;
        if lo < NU_MIN {
            return Err(Error::BracketNotFound { lo, hi });
        }
    }
    while bottleneck_residual(spec, sigma2, c_sum, hi)? >= 0.0 {
        hi *= 1e4;
        if hi > NU_MAX {
            return Err(Error::BracketNotFound { lo, hi });
        }
    }
    // Invariant: residual(lo) > 0 > residual(hi).
    let mut mid = lo;
    for _ in 0..200 {
        mid = ((lo.ln() + hi.ln()) * 0.5).exp();
        let res = bottleneck_residual(spec, sigma2, c_sum, mid)?;
        if res.abs() <= tol {
            return Ok(mid);
        }
        if res > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Evaluates the informed-receiver upper bound for one configuration.
pub fn upper_bound_rate(cfg: &ChannelConfig) -> Result<UpperBoundResult, Error> {
    cfg.validate()?;
    let spec = cfg.joint_spec();
    let c_sum = cfg.c_sum();
    if c_sum == 0.0 {
        return Ok(UpperBoundResult { rate: 0.0, nu: f64::INFINITY, spec });
    }
    let nu = solve_nu(&spec, cfg.sigma2, c_sum, 1e-10)?;
    let lower = nu * cfg.sigma2;
    let log_level = (1.0 + nu).log2();
    let quad = Quadrature::default();
    let integral = quad.integrate_semi_infinite(
        |x| {
            if x <= lower {
                return 0.0;
            }
            ((1.0 + x / cfg.sigma2).log2() - log_level) * eig_density(&spec, x)
        },
        lower,
    )?;
    Ok(UpperBoundResult { rate: (spec.t() as f64 * integral).max(0.0), nu, spec })
}

/// Ergodic capacity of the stacked channel with no fronthaul limit,
/// `T . E[log2(1 + x / sigma2)]`; the `c_sum -> inf` limit of the bound.
pub fn unconstrained_capacity(spec: &EigSpec, sigma2: f64) -> Result<f64, Error> {
    let quad = Quadrature::default();
    let integral = quad.integrate_semi_infinite(
        |x| (1.0 + x / sigma2).log2() * eig_density(spec, x),
        0.0,
    )?;
    Ok(spec.t() as f64 * integral)
}
