//! Scalar two-relay bottleneck kernel.
//!
//! A scalar source x ~ CN(0, 1) is seen by relay k as y_k = h_k x + n_k with
//! per-relay SNR rho_k; relay k forwards at most c_k bits per use. The best
//! joint-decoding rate is the max-min
//!
//! ```text
//! R = max_{0 <= r_k <= c_k} min over subsets T of {1,2} of
//!     log2[1 + sum_{k not in T} rho_k (1 - 2^-r_k)] + sum_{k in T} (c_k - r_k)
//! ```
//!
//! where r_k is the share of link k spent on describing the observation
//! (the rest is lost to compression noise). Each subset expression is
//! concave in (r1, r2) and the pointwise min of concave functions is
//! concave, so nested one-dimensional concave maximization finds the global
//! optimum. As a function of (c1, c2) the value is jointly concave and
//! nondecreasing; [`rate_supergradient`] exposes that structure to the
//! fronthaul allocator.

use crate::error::Error;

/// Which relay links are charged directly (capacity minus description rate)
/// in one term of the max-min objective; the complement contributes through
/// the decoded-signal log term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subset {
    Neither,
    First,
    Second,
    Both,
}

impl Subset {
    pub const ALL: [Subset; 4] = [Subset::Neither, Subset::First, Subset::Second, Subset::Both];
}

/// Scalar problem data: per-relay SNRs and link budgets (bits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarDibInstance {
    pub rho1: f64,
    pub rho2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl ScalarDibInstance {
    pub fn new(rho1: f64, rho2: f64, c1: f64, c2: f64) -> Result<Self, Error> {
        for (name, v) in [("rho1", rho1), ("rho2", rho2), ("c1", c1), ("c2", c2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be nonnegative and finite, got {v}"
                )));
            }
        }
        Ok(Self { rho1, rho2, c1, c2 })
    }
}

/// Solution of the scalar max-min program.
#[derive(Debug, Clone, Copy)]
pub struct ScalarDibSolution {
    /// Achieved rate, equal to `beta`.
    pub rate: f64,
    pub r1: f64,
    pub r2: f64,
    /// Value of the binding minimum at the optimum.
    pub beta: f64,
    /// The four subset expressions at the optimum, ordered
    /// [Neither, First, Second, Both].
    pub subset_values: [f64; 4],
}

/// 1 - 2^-r, the fraction of signal power that a description of r bits
/// retains. Computed via expm1 so small r does not cancel.
fn retained(r: f64) -> f64 {
    -(-std::f64::consts::LN_2 * r).exp_m1()
}

/// One subset expression of the max-min objective (bits).
pub fn subset_objective(inst: &ScalarDibInstance, r1: f64, r2: f64, subset: Subset) -> f64 {
    let g1 = inst.rho1 * retained(r1);
    let g2 = inst.rho2 * retained(r2);
    match subset {
        Subset::Neither => (1.0 + g1 + g2).log2(),
        Subset::First => (1.0 + g2).log2() + (inst.c1 - r1),
        Subset::Second => (1.0 + g1).log2() + (inst.c2 - r2),
        Subset::Both => (inst.c1 - r1) + (inst.c2 - r2),
    }
}

fn min_over_subsets(inst: &ScalarDibInstance, r1: f64, r2: f64) -> f64 {
    let g1 = inst.rho1 * retained(r1);
    let g2 = inst.rho2 * retained(r2);
    let slack1 = inst.c1 - r1;
    let slack2 = inst.c2 - r2;
    let f_neither = (1.0 + g1 + g2).log2();
    let f_first = (1.0 + g2).log2() + slack1;
    let f_second = (1.0 + g1).log2() + slack2;
    let f_both = slack1 + slack2;
    f_neither.min(f_first).min(f_second).min(f_both)
}

/// Golden-section maximization of a unimodal (here: concave) function on
/// [lo, hi]. Returns the best probed point; endpoints are always probed.
fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, eps: f64) -> (f64, f64) {
    debug_assert!(lo <= hi);
    let inv_phi = 0.618_033_988_749_894_9;
    let mut best_x = lo;
    let mut best_v = f(lo);
    let v_hi = f(hi);
    if v_hi > best_v {
        best_x = hi;
        best_v = v_hi;
    }
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > eps {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
        let (x, v) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
        if v > best_v {
            best_x = x;
            best_v = v;
        }
    }
    (best_x, best_v)
}

/// Solves the scalar max-min program to within `tol` bits of the optimum.
///
/// A relay with zero SNR or zero budget is pinned at r = 0 (its retained
/// term is exactly zero), which reduces the search to one dimension or to
/// the zero-rate corner.
pub fn solve_scalar_rate(inst: &ScalarDibInstance, tol: f64) -> ScalarDibSolution {
    assert!(tol > 0.0, "tol must be positive, got {tol}");
    let pin1 = inst.rho1 == 0.0 || inst.c1 <= 0.0;
    let pin2 = inst.rho2 == 0.0 || inst.c2 <= 0.0;
    // The inner grid is resolved much finer than the outer one so the kinks
    // of the min do not leak noise into the outer concave search.
    let eps_outer = |c: f64| (1e-2 * tol).clamp(1e-10, 1e-4) * (1.0 + c);
    let eps_inner = |c: f64| 1e-11 * (1.0 + c);

    let (r1, r2) = match (pin1, pin2) {
        (true, true) => (0.0, 0.0),
        (true, false) => {
            let (r2, _) = golden_max(
                |r2| min_over_subsets(inst, 0.0, r2),
                0.0,
                inst.c2,
                eps_inner(inst.c2),
            );
            (0.0, r2)
        }
        (false, true) => {
            let (r1, _) = golden_max(
                |r1| min_over_subsets(inst, r1, 0.0),
                0.0,
                inst.c1,
                eps_inner(inst.c1),
            );
            (r1, 0.0)
        }
        (false, false) => {
            let inner = |r1: f64| {
                golden_max(
                    |r2| min_over_subsets(inst, r1, r2),
                    0.0,
                    inst.c2,
                    eps_inner(inst.c2),
                )
            };
            let (r1, _) = golden_max(|r1| inner(r1).1, 0.0, inst.c1, eps_outer(inst.c1));
            let (r2, _) = inner(r1);
            (r1, r2)
        }
    };
    let subset_values = [
        subset_objective(inst, r1, r2, Subset::Neither),
        subset_objective(inst, r1, r2, Subset::First),
        subset_objective(inst, r1, r2, Subset::Second),
        subset_objective(inst, r1, r2, Subset::Both),
    ];
    let beta = subset_values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    ScalarDibSolution { rate: beta, r1, r2, beta, subset_values }
}

/// How a description-rate coordinate sits inside its box at the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BoxState {
    Lower,
    Interior,
    Upper,
}

/// Solves the program and returns `(solution, d)` where `d` is a
/// supergradient of the optimal rate as a function of `(c1, c2)`:
/// `rate(c') <= rate(c) + d . (c' - c)` for all feasible `c'`.
///
/// The components are exact weighted combinations of the binding subset
/// expressions' capacity sensitivities (at fixed r/c ratios); when no
/// consistent weighting is found numerically, forward differences are used
/// instead. Both components are nonnegative because the rate is
/// nondecreasing in each budget.
pub(crate) fn rate_supergradient(
    inst: &ScalarDibInstance,
    tol: f64,
) -> (ScalarDibSolution, [f64; 2]) {
    let sol = solve_scalar_rate(inst, tol);
    if let Some(d) = analytic_supergradient(inst, &sol) {
        return (sol, d);
    }
    // Forward differences. The rate is concave in c, so these slopes are
    // valid (slightly conservative) supergradient components.
    let mut d = [0.0f64; 2];
    for k in 0..2 {
        let h = 1e-5 * (1.0 + if k == 0 { inst.c1 } else { inst.c2 });
        let mut bumped = *inst;
        if k == 0 {
            bumped.c1 += h;
        } else {
            bumped.c2 += h;
        }
        let up = solve_scalar_rate(&bumped, tol);
        d[k] = ((up.rate - sol.rate) / h).max(0.0);
    }
    (sol, d)
}

/// Tries to certify supergradient weights from the active subset
/// expressions and the box state of (r1, r2). Returns None when no
/// enumerated weighting satisfies stationarity, letting the caller fall
/// back to finite differences.
fn analytic_supergradient(inst: &ScalarDibInstance, sol: &ScalarDibSolution) -> Option<[f64; 2]> {
    let c = [inst.c1, inst.c2];
    let rho = [inst.rho1, inst.rho2];
    let r = [sol.r1, sol.r2];
    let gain = [rho[0] * retained(r[0]), rho[1] * retained(r[1])];
    // Marginal gain of one more description bit through the log term.
    let press = [
        rho[0] * (-std::f64::consts::LN_2 * r[0]).exp(),
        rho[1] * (-std::f64::consts::LN_2 * r[1]).exp(),
    ];
    let u = 1.0 + gain[0] + gain[1];

    // d f_T / d r_k for the four subsets, order [Neither, First, Second, Both].
    let grad_r = [
        [press[0] / u, press[1] / u],
        [-1.0, press[1] / (1.0 + gain[1])],
        [press[0] / (1.0 + gain[0]), -1.0],
        [-1.0, -1.0],
    ];
    // d f_T / d c_k at fixed ratio t_k = r_k / c_k; a zero budget behaves as
    // the ratio-one corner (any extra capacity would be spent describing).
    let t = [
        if c[0] > 0.0 { (r[0] / c[0]).clamp(0.0, 1.0) } else { 1.0 },
        if c[1] > 0.0 { (r[1] / c[1]).clamp(0.0, 1.0) } else { 1.0 },
    ];
    let grad_c = [
        [t[0] * press[0] / u, t[1] * press[1] / u],
        [1.0 - t[0], t[1] * press[1] / (1.0 + gain[1])],
        [t[0] * press[0] / (1.0 + gain[0]), 1.0 - t[1]],
        [1.0 - t[0], 1.0 - t[1]],
    ];

    let state = |k: usize| -> BoxState {
        let span = 1e-7 * (1.0 + c[k]);
        if c[k] - r[k] <= span {
            BoxState::Upper
        } else if r[k] <= span {
            BoxState::Lower
        } else {
            BoxState::Interior
        }
    };
    let states = [state(0), state(1)];

    let tol_act = 1e-6 * (1.0 + sol.beta.abs());
    let active: Vec<usize> = (0..4)
        .filter(|&i| sol.subset_values[i] <= sol.beta + tol_act)
        .collect();
    let gscale = active
        .iter()
        .flat_map(|&i| grad_r[i].iter().map(|g| g.abs()))
        .fold(1.0f64, f64::max);
    let tol_g = 1e-5 * gscale;

    // Stationarity of a candidate weighting: zero along interior coords,
    // pointing into the box at bound coords.
    let feasible = |lambda: &[(usize, f64)]| -> bool {
        for k in 0..2 {
            let s: f64 = lambda.iter().map(|&(i, w)| w * grad_r[i][k]).sum();
            let ok = match states[k] {
                BoxState::Interior => s.abs() <= tol_g,
                BoxState::Upper => s >= -tol_g,
                BoxState::Lower => s <= tol_g,
            };
            if !ok {
                return false;
            }
        }
        true
    };
    let to_gradient = |lambda: &[(usize, f64)]| -> [f64; 2] {
        let mut d = [0.0f64; 2];
        for &(i, w) in lambda {
            d[0] += w * grad_c[i][0];
            d[1] += w * grad_c[i][1];
        }
        [d[0].max(0.0), d[1].max(0.0)]
    };

    // Single binding expression.
    for &i in &active {
        let lambda = [(i, 1.0)];
        if feasible(&lambda) {
            return Some(to_gradient(&lambda));
        }
    }
    // Pairs: one mixing weight, fixed by the first interior coordinate.
    for (a_pos, &i) in active.iter().enumerate() {
        for &j in &active[a_pos + 1..] {
            let mut candidates = vec![0.0, 1.0, 0.5];
            for k in 0..2 {
                if states[k] == BoxState::Interior {
                    let denom = grad_r[j][k] - grad_r[i][k];
                    if denom.abs() > 1e-12 * gscale {
                        candidates.push(grad_r[j][k] / denom);
                    }
                }
            }
            for x in candidates {
                if !(-1e-9..=1.0 + 1e-9).contains(&x) {
                    continue;
                }
                let x = x.clamp(0.0, 1.0);
                let lambda = [(i, x), (j, 1.0 - x)];
                if feasible(&lambda) {
                    return Some(to_gradient(&lambda));
                }
            }
        }
    }
    // Triples: solve the 3x3 system (two stationarity rows + normalization).
    if active.len() >= 3 {
        let combos: Vec<[usize; 3]> = match active.len() {
            3 => vec![[active[0], active[1], active[2]]],
            _ => vec![
                [active[0], active[1], active[2]],
                [active[0], active[1], active[3]],
                [active[0], active[2], active[3]],
                [active[1], active[2], active[3]],
            ],
        };
        for combo in combos {
            if let Some(w) = solve_weights_3(&grad_r, &combo) {
                let lambda = [(combo[0], w[0]), (combo[1], w[1]), (combo[2], w[2])];
                if w.iter().all(|&x| x >= -1e-9) && feasible(&lambda) {
                    let lambda = [
                        (combo[0], w[0].max(0.0)),
                        (combo[1], w[1].max(0.0)),
                        (combo[2], w[2].max(0.0)),
                    ];
                    return Some(to_gradient(&lambda));
                }
            }
        }
    }
    None
}

/// Solves lambda . grad_r[combo][k] = 0 for k = 0, 1 with weights summing
/// to one, by Cramer's rule on the 3x3 system.
fn solve_weights_3(grad_r: &[[f64; 2]; 4], combo: &[usize; 3]) -> Option<[f64; 3]> {
    let a = [
        [grad_r[combo[0]][0], grad_r[combo[1]][0], grad_r[combo[2]][0]],
        [grad_r[combo[0]][1], grad_r[combo[1]][1], grad_r[combo[2]][1]],
        [1.0, 1.0, 1.0],
    ];
    let b = [0.0, 0.0, 1.0];
    let det = det3(&a);
    if det.abs() < 1e-12 {
        return None;
    }
    let mut out = [0.0f64; 3];
    for col in 0..3 {
        let mut m = a;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        out[col] = det3(&m) / det;
    }
    Some(out)
}

fn det3(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}
