//! Quantize-and-forward over channel inversion.
//!
//! When M <= min N_k each relay can zero-force: the inverted observation is
//! the source vector plus noise whose per-component power is a diagonal
//! entry of A_k = sigma2 (H_k^H H_k)^{-1}. The relay rounds each noise
//! level up to a quantile grid (so the receiver learns a conservative SNR),
//! entropy-codes the level indices at H_sum bits per channel use, and
//! splits the remaining fronthaul across levels. The per-subchannel rate
//! for one level pair is the scalar kernel of [`crate::scalar_dib`], so the
//! allocation problem
//!
//! ```text
//! max over c >= 0 of  sum_{j1, j2} M P1 P2 R(snr1_j1, snr2_j2, c1_j1, c2_j2)
//! s.t. sum_j P_k c_kj <= (C_k - H_sum_k) / M,  c at the catch-all level = 0
//! ```
//!
//! is jointly concave; it is solved by projected supergradient ascent with
//! a coordinate-ascent polish, both certified against a brute-force oracle
//! on small grids.

use rand::Rng;
use rayon::prelude::*;

use crate::config::ChannelConfig;
use crate::error::Error;
use crate::linalg::{
    hermitian_eigenvalues, hermitize, identity, sample_complex_gaussian, solve_hermitian_pd,
    ComplexMatrix,
};
use crate::scalar_dib::{rate_supergradient, solve_scalar_rate, ScalarDibInstance};

/// Quantile grid for per-subchannel inversion-noise powers.
///
/// `levels` holds the ascending thresholds with a terminal `+inf` catch-all;
/// `snr_hat[j] = 1 / levels[j]` is the guaranteed SNR when a subchannel's
/// noise power is rounded up to level j (zero at the catch-all).
#[derive(Debug, Clone)]
pub struct QuantGrid {
    pub levels: Vec<f64>,
    pub probs: Vec<f64>,
    pub snr_hat: Vec<f64>,
    /// Quantization bits B; the grid has 2^B levels.
    pub bits: u32,
    /// Noise variance the samples were generated under (metadata).
    pub sigma2: f64,
}

impl QuantGrid {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn validate(&self) -> Result<(), Error> {
        let j = self.levels.len();
        if j == 0 || j != self.probs.len() || j != self.snr_hat.len() {
            return Err(Error::InvalidConfig(format!(
                "grid arrays must share a positive length, got {j}/{}/{}",
                self.probs.len(),
                self.snr_hat.len()
            )));
        }
        if j != 1 << self.bits {
            return Err(Error::InvalidConfig(format!(
                "grid has {j} levels but bits = {} implies {}",
                self.bits,
                1u64 << self.bits
            )));
        }
        if self.levels[j - 1] != f64::INFINITY {
            return Err(Error::InvalidConfig("last level must be +inf".into()));
        }
        for w in self.levels[..j - 1].windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidConfig(format!(
                    "finite levels must ascend strictly, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if self.levels[0] <= 0.0 {
            return Err(Error::InvalidConfig("levels must be positive".into()));
        }
        let mass: f64 = self.probs.iter().sum();
        if (mass - 1.0).abs() > 1e-9 || self.probs.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidConfig(format!("probs must sum to 1, got {mass}")));
        }
        for w in self.snr_hat.windows(2) {
            if w[0] < w[1] - 1e-15 {
                return Err(Error::InvalidConfig("snr_hat must be nonincreasing".into()));
            }
        }
        Ok(())
    }

    /// Index of the smallest level that covers noise power `a` (the
    /// rounding-up rule; the terminal +inf always matches).
    pub fn ceil_index(&self, a: f64) -> usize {
        self.levels.partition_point(|&b| b < a).min(self.levels.len() - 1)
    }
}

/// Allocation produced by [`qci_rate`].
#[derive(Debug, Clone)]
pub struct QciAllocation {
    /// Per-relay, per-level capacities (bits); the catch-all entry is zero.
    pub c: [Vec<f64>; 2],
    /// Scalar-kernel rate for every level pair.
    pub per_pair_rates: Vec<Vec<f64>>,
    /// Achieved objective, bits per complex channel use.
    pub rate: f64,
    /// Per-relay spent budget `sum_j P_j c_j`.
    pub budget_used: [f64; 2],
}

/// Draws `n` samples of a diagonal entry of sigma2 (H^H H)^{-1} for an
/// `n_k x m` Gaussian channel; all `m` diagonal entries of each draw are
/// used (they share the marginal law).
pub fn noise_level_samples<R: Rng + ?Sized>(
    m: usize,
    n_k: usize,
    sigma2: f64,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>, Error> {
    if m > n_k {
        return Err(Error::RankDeficient { m, n: n_k });
    }
    assert!(sigma2 > 0.0 && n > 0);
    let mut out = Vec::with_capacity(n + m);
    while out.len() < n {
        let h = sample_complex_gaussian(n_k, m, rng);
        let gram = h.adjoint() * &h;
        let inv = solve_hermitian_pd(&gram, &identity(m))?;
        for i in 0..m {
            out.push(sigma2 * inv[(i, i)].re);
        }
    }
    out.truncate(n);
    Ok(out)
}

/// Builds the 2^B-level quantile grid from empirical samples: level j is
/// the (j/J)-quantile (linear interpolation between order statistics), the
/// last level is +inf, and the pmf is uniform by construction.
pub fn build_quantile_grid(samples: &[f64], bits: u32, sigma2: f64) -> QuantGrid {
    assert!(!samples.is_empty(), "grid construction needs samples");
    assert!(bits <= 20, "2^{bits} levels is beyond any practical grid");
    let j_count = 1usize << bits;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut levels = Vec::with_capacity(j_count);
    for j in 1..j_count {
        let pos = (sorted.len() - 1) as f64 * j as f64 / j_count as f64;
        let base = pos.floor() as usize;
        let frac = pos - base as f64;
        let q = if base + 1 < sorted.len() {
            sorted[base] + frac * (sorted[base + 1] - sorted[base])
        } else {
            sorted[base]
        };
        levels.push(q);
    }
    // Ties in the samples could produce equal quantiles; keep the levels
    // strictly ascending so the grid invariants hold.
    for i in 1..levels.len() {
        if levels[i] <= levels[i - 1] {
            levels[i] = levels[i - 1] * (1.0 + 1e-12) + f64::MIN_POSITIVE;
        }
    }
    levels.push(f64::INFINITY);
    let probs = vec![1.0 / j_count as f64; j_count];
    let snr_hat = levels
        .iter()
        .map(|&b| if b.is_finite() { 1.0 / b } else { 0.0 })
        .collect();
    QuantGrid { levels, probs, snr_hat, bits, sigma2 }
}

/// Fronthaul consumed by entropy-coding the level indices of all `m`
/// subchannels: `m * H(probs)` bits per complex channel use.
pub fn entropy_budget(grid: &QuantGrid, m: usize) -> f64 {
    let h: f64 = grid
        .probs
        .iter()
        .map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 })
        .sum();
    m as f64 * h
}

/// Shared data of one allocation problem.
struct AllocProblem<'a> {
    m: f64,
    snr: [&'a [f64]; 2],
    probs: [&'a [f64]; 2],
    /// Number of allocatable levels per relay (all but the catch-all).
    nvar: [usize; 2],
    budget: [f64; 2],
}

impl AllocProblem<'_> {
    fn capacity(&self, k: usize, c_k: &[f64], j: usize) -> f64 {
        if j < self.nvar[k] {
            c_k[j]
        } else {
            0.0
        }
    }

    /// Objective and, optionally, its supergradient with respect to the
    /// allocatable capacities. Rows are evaluated in parallel and merged in
    /// level order, so the result does not depend on the thread count.
    fn eval(&self, c: &[Vec<f64>; 2], tol: f64, with_grad: bool) -> (f64, [Vec<f64>; 2]) {
        let rows: Vec<(f64, Vec<f64>, f64)> = (0..self.snr[0].len())
            .into_par_iter()
            .map(|j1| {
                let mut row_val = 0.0;
                let mut grad2_row = vec![0.0; self.nvar[1]];
                let mut grad1_entry = 0.0;
                for j2 in 0..self.snr[1].len() {
                    let inst = ScalarDibInstance {
                        rho1: self.snr[0][j1],
                        rho2: self.snr[1][j2],
                        c1: self.capacity(0, &c[0], j1),
                        c2: self.capacity(1, &c[1], j2),
                    };
                    if inst.rho1 == 0.0 && inst.rho2 == 0.0 {
                        continue;
                    }
                    let w = self.m * self.probs[0][j1] * self.probs[1][j2];
                    if with_grad {
                        let (sol, d) = rate_supergradient(&inst, tol);
                        row_val += w * sol.rate;
                        if j1 < self.nvar[0] {
                            grad1_entry += w * d[0];
                        }
                        if j2 < self.nvar[1] {
                            grad2_row[j2] += w * d[1];
                        }
                    } else {
                        row_val += w * solve_scalar_rate(&inst, tol).rate;
                    }
                }
                (row_val, grad2_row, grad1_entry)
            })
            .collect();
        let mut value = 0.0;
        let mut grad = [vec![0.0; self.nvar[0]], vec![0.0; self.nvar[1]]];
        for (j1, (row_val, grad2_row, grad1_entry)) in rows.into_iter().enumerate() {
            value += row_val;
            if j1 < self.nvar[0] {
                grad[0][j1] = grad1_entry;
            }
            for (g, add) in grad[1].iter_mut().zip(grad2_row) {
                *g += add;
            }
        }
        (value, grad)
    }

    /// Euclidean projection of one relay's allocation onto
    /// `{x >= 0, sum_j P_j x_j <= budget}` via the water-level form
    /// `x = max(c - theta P, 0)`.
    fn project(&self, k: usize, c: &mut [f64]) {
        let p = self.probs[k];
        for x in c.iter_mut() {
            if !x.is_finite() {
                *x = 0.0;
            }
        }
        let spent = |c: &[f64], theta: f64| -> f64 {
            c.iter()
                .zip(p)
                .map(|(&x, &w)| w * (x - theta * w).max(0.0))
                .sum()
        };
        if spent(c, 0.0) <= self.budget[k] {
            for x in c.iter_mut() {
                *x = x.max(0.0);
            }
            return;
        }
        let mut lo = 0.0;
        let mut hi = c
            .iter()
            .zip(p)
            .map(|(&x, &w)| if w > 0.0 { x / w } else { 0.0 })
            .fold(1.0f64, f64::max);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if spent(c, mid) > self.budget[k] {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        for (x, &w) in c.iter_mut().zip(p) {
            *x = (*x - hi * w).max(0.0);
        }
    }

    fn spent(&self, k: usize, c_k: &[f64]) -> f64 {
        c_k.iter().zip(self.probs[k]).map(|(&x, &w)| w * x).sum()
    }
}

/// Solves the fronthaul allocation for the quantize-and-forward scheme and
/// returns the achieved rate with the allocation that produced it.
///
/// Fails with [`Error::InfeasibleBudget`] when a relay's fronthaul cannot
/// even cover the entropy coding of its level indices (the error carries
/// that minimum), and with [`Error::RankDeficient`] when M > N_k.
pub fn qci_rate(
    cfg: &ChannelConfig,
    grid1: &QuantGrid,
    grid2: &QuantGrid,
    tol: f64,
) -> Result<QciAllocation, Error> {
    cfg.validate()?;
    grid1.validate()?;
    grid2.validate()?;
    assert!(tol > 0.0);
    for (n_k, _) in [(cfg.n1, 0), (cfg.n2, 1)] {
        if cfg.m > n_k {
            return Err(Error::RankDeficient { m: cfg.m, n: n_k });
        }
    }
    let grids = [grid1, grid2];
    let mut budget = [0.0f64; 2];
    for k in 0..2 {
        let h_sum = entropy_budget(grids[k], cfg.m);
        let c_k = if k == 0 { cfg.c1 } else { cfg.c2 };
        if c_k <= h_sum {
            return Err(Error::InfeasibleBudget { relay: k + 1, c: c_k, h_sum });
        }
        budget[k] = (c_k - h_sum) / cfg.m as f64;
    }

    let problem = AllocProblem {
        m: cfg.m as f64,
        snr: [&grids[0].snr_hat, &grids[1].snr_hat],
        probs: [&grids[0].probs, &grids[1].probs],
        nvar: [grids[0].level_count() - 1, grids[1].level_count() - 1],
        budget,
    };
    let tol_inner = (1e-2 * tol).clamp(1e-7, 1e-4);

    // Seed candidates: uniform split, and a split favoring strong levels.
    let mut seeds: Vec<[Vec<f64>; 2]> = Vec::new();
    let uniform: [Vec<f64>; 2] = [0, 1].map(|k| {
        let nv = problem.nvar[k];
        if nv == 0 {
            return Vec::new();
        }
        let mass: f64 = problem.probs[k][..nv].iter().sum();
        vec![if mass > 0.0 { budget[k] / mass } else { 0.0 }; nv]
    });
    seeds.push(uniform.clone());
    seeds.push([0, 1].map(|k| {
        let nv = problem.nvar[k];
        let weights: Vec<f64> = problem.snr[k][..nv]
            .iter()
            .map(|&r| (1.0 + r).log2())
            .collect();
        let norm: f64 = weights
            .iter()
            .zip(&problem.probs[k][..nv])
            .map(|(&w, &p)| p * w)
            .sum();
        if norm <= 0.0 {
            return uniform[k].clone();
        }
        weights.iter().map(|&w| budget[k] * w / norm).collect()
    }));

    let mut best_c = seeds[0].clone();
    let mut best_val = f64::NEG_INFINITY;
    for seed in &seeds {
        let (v, _) = problem.eval(seed, tol_inner, false);
        if v > best_val {
            best_val = v;
            best_c = seed.clone();
        }
    }

    // Projected supergradient ascent with diminishing steps.
    let mut c = best_c.clone();
    let mut since_best = 0usize;
    for iter in 0..140 {
        let (value, grad) = problem.eval(&c, tol_inner, true);
        if value > best_val + 0.05 * tol {
            best_val = value;
            best_c = c.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if iter >= 30 && since_best >= 15 {
                break;
            }
        }
        for k in 0..2 {
            if problem.nvar[k] == 0 {
                continue;
            }
            let gmax = grad[k].iter().fold(0.0f64, |m, &g| m.max(g.abs()));
            if gmax <= 0.0 {
                continue;
            }
            let lr = 0.6 * (budget[k] + 1e-9) / gmax / ((iter + 1) as f64).sqrt();
            for (x, g) in c[k].iter_mut().zip(&grad[k]) {
                *x += lr * g;
            }
            problem.project(k, &mut c[k]);
        }
    }

    // Coordinate-ascent polish from the incumbent: exact 1-D concave
    // maximization per level, never decreasing the objective.
    let mut c = best_c.clone();
    for _pass in 0..2 {
        for k in 0..2 {
            for j in 0..problem.nvar[k] {
                let p_j = problem.probs[k][j];
                if p_j <= 0.0 {
                    continue;
                }
                let slack = (budget[k] - problem.spent(k, &c[k])).max(0.0);
                let hi = c[k][j] + slack / p_j;
                if hi <= 0.0 {
                    continue;
                }
                let other = 1 - k;
                let line = |x: f64| -> f64 {
                    let mut total = 0.0;
                    for j2 in 0..problem.snr[other].len() {
                        let (rho1, rho2, c1, c2, w) = if k == 0 {
                            (
                                problem.snr[0][j],
                                problem.snr[1][j2],
                                x,
                                problem.capacity(1, &c[1], j2),
                                problem.m * problem.probs[0][j] * problem.probs[1][j2],
                            )
                        } else {
                            (
                                problem.snr[0][j2],
                                problem.snr[1][j],
                                problem.capacity(0, &c[0], j2),
                                x,
                                problem.m * problem.probs[0][j2] * problem.probs[1][j],
                            )
                        };
                        if rho1 == 0.0 && rho2 == 0.0 {
                            continue;
                        }
                        let inst = ScalarDibInstance { rho1, rho2, c1, c2 };
                        total += w * solve_scalar_rate(&inst, tol_inner).rate;
                    }
                    total
                };
                let mut lo_x = 0.0;
                let mut hi_x = hi;
                let f_lo = line(lo_x);
                let f_hi = line(hi_x);
                // Golden-section on the concave per-coordinate profile.
                let inv_phi = 0.618_033_988_749_894_9;
                let eps = (1e-3 * tol).max(1e-7) * (1.0 + hi);
                let mut x1 = hi_x - inv_phi * (hi_x - lo_x);
                let mut x2 = lo_x + inv_phi * (hi_x - lo_x);
                let mut f1 = line(x1);
                let mut f2 = line(x2);
                while hi_x - lo_x > eps {
                    if f1 >= f2 {
                        hi_x = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = hi_x - inv_phi * (hi_x - lo_x);
                        f1 = line(x1);
                    } else {
                        lo_x = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = lo_x + inv_phi * (hi_x - lo_x);
                        f2 = line(x2);
                    }
                }
                let mut cand = [(0.0, f_lo), (hi, f_hi), (x1, f1), (x2, f2)];
                cand.sort_by(|a, b| b.1.total_cmp(&a.1));
                c[k][j] = cand[0].0;
            }
        }
    }
    let (polished_val, _) = problem.eval(&c, tol_inner, false);
    if polished_val > best_val {
        best_c = c;
    }

    // Final artifacts at a tighter kernel tolerance.
    let tol_final = (1e-3 * tol).clamp(1e-9, 1e-5);
    let j1 = grids[0].level_count();
    let j2 = grids[1].level_count();
    let mut per_pair_rates = vec![vec![0.0; j2]; j1];
    let mut rate = 0.0;
    for a in 0..j1 {
        for b in 0..j2 {
            let inst = ScalarDibInstance {
                rho1: problem.snr[0][a],
                rho2: problem.snr[1][b],
                c1: problem.capacity(0, &best_c[0], a),
                c2: problem.capacity(1, &best_c[1], b),
            };
            let r = if inst.rho1 == 0.0 && inst.rho2 == 0.0 {
                0.0
            } else {
                solve_scalar_rate(&inst, tol_final).rate
            };
            per_pair_rates[a][b] = r;
            rate += problem.m * problem.probs[0][a] * problem.probs[1][b] * r;
        }
    }
    let budget_used = [problem.spent(0, &best_c[0]), problem.spent(1, &best_c[1])];
    let mut c_full = [vec![0.0; j1], vec![0.0; j2]];
    for k in 0..2 {
        for j in 0..problem.nvar[k] {
            c_full[k][j] = best_c[k][j];
        }
    }
    Ok(QciAllocation { c: c_full, per_pair_rates, rate, budget_used })
}

/// Plug-in Monte Carlo estimate of the joint entropy (bits) of the level
/// indices of all `m` subchannels under one channel draw; diagnostic for
/// how much the independent per-subchannel accounting (`m * H`) overpays.
pub fn joint_entropy_estimate<R: Rng + ?Sized>(
    m: usize,
    n_k: usize,
    sigma2: f64,
    grid: &QuantGrid,
    n_draws: usize,
    rng: &mut R,
) -> Result<f64, Error> {
    if m > n_k {
        return Err(Error::RankDeficient { m, n: n_k });
    }
    assert!(n_draws > 0);
    let j_count = grid.level_count();
    let mut counts: std::collections::HashMap<u64, u64> = std::collections::HashMap::new();
    for _ in 0..n_draws {
        let h = sample_complex_gaussian(n_k, m, rng);
        let gram = h.adjoint() * &h;
        let inv = solve_hermitian_pd(&gram, &identity(m))?;
        let mut key = 0u64;
        for i in 0..m {
            let a = sigma2 * inv[(i, i)].re;
            key = key * j_count as u64 + grid.ceil_index(a) as u64;
        }
        *counts.entry(key).or_insert(0) += 1;
    }
    let n = n_draws as f64;
    Ok(counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum())
}

/// Margins of the covariance determinant inequalities for one draw. Every
/// margin is `(dominating side - dominated side) / max(|sides|, 1)`; the
/// inequalities predict all of them nonnegative.
#[derive(Debug, Clone, Copy)]
pub struct DrawMargins {
    /// Full joint covariance vs the diagonal-surrogate joint covariance.
    pub block: f64,
    /// Per-relay Hadamard step: det(diag part) vs det(full block).
    pub hadamard: [f64; 2],
    /// Conditional covariance of relay 1 given relay 2, true vs surrogate.
    pub conditional: f64,
    /// Smallest eigenvalue of the joint covariance over its trace.
    pub min_eig_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct AppendixReport {
    pub margins: Vec<DrawMargins>,
    /// Draws where any margin fell below -1e-9.
    pub violations: usize,
}

/// Monte Carlo check of the determinant inequalities behind the scheme's
/// converse-side surrogate: for sampled channels, the joint covariance of
/// the two quantized inversion outputs is dominated (in determinant) by its
/// diagonal-blocks surrogate, as is the relay-1-given-relay-2 conditional.
pub fn appendix_inequality_check<R: Rng + ?Sized>(
    cfg: &ChannelConfig,
    grid: &QuantGrid,
    n_draws: usize,
    rng: &mut R,
) -> Result<AppendixReport, Error> {
    cfg.validate()?;
    grid.validate()?;
    for n_k in [cfg.n1, cfg.n2] {
        if cfg.m > n_k {
            return Err(Error::RankDeficient { m: cfg.m, n: n_k });
        }
    }
    let m = cfg.m;
    // The catch-all +inf level is replaced by a large finite surrogate so
    // the determinants stay meaningful.
    let largest_finite = grid.levels[..grid.level_count() - 1]
        .iter()
        .copied()
        .fold(1.0f64, f64::max);
    let cap = 1e3 * largest_finite;
    // Per-level description budget: whatever the fronthaul leaves after
    // entropy coding, floored so the quantization noise stays finite even
    // for configurations that the rate path would reject as infeasible.
    let h_sum = entropy_budget(grid, m);
    let c_bar = [
        ((cfg.c1 - h_sum) / m as f64).max(0.1),
        ((cfg.c2 - h_sum) / m as f64).max(0.1),
    ];

    let mut margins = Vec::with_capacity(n_draws);
    let mut violations = 0usize;
    for _ in 0..n_draws {
        let mut b_blocks = Vec::with_capacity(2);
        let mut d_blocks = Vec::with_capacity(2);
        for (k, &n_k) in [cfg.n1, cfg.n2].iter().enumerate() {
            let h = sample_complex_gaussian(n_k, m, rng);
            let gram = h.adjoint() * &h;
            let a_full = solve_hermitian_pd(&gram, &identity(m))?.scale(cfg.sigma2);
            let a_full = hermitize(&a_full);
            // Off-diagonal part stays exact; diagonal entries are rounded
            // up to the grid, and the description noise w rides on top.
            let mut b = a_full.clone();
            let mut d = ComplexMatrix::zeros(m, m);
            for i in 0..m {
                let a_i = a_full[(i, i)].re;
                let level = grid.levels[grid.ceil_index(a_i)].min(cap);
                let w_i = (1.0 + level) / ((c_bar[k]).exp2() - 1.0);
                let diag = 1.0 + level + w_i;
                b[(i, i)] = nalgebra::Complex::new(diag, 0.0);
                d[(i, i)] = nalgebra::Complex::new(diag, 0.0);
            }
            b_blocks.push(b);
            d_blocks.push(d);
        }
        let assemble = |top: &ComplexMatrix, bottom: &ComplexMatrix| -> ComplexMatrix {
            let mut joint = ComplexMatrix::zeros(2 * m, 2 * m);
            joint.view_mut((0, 0), (m, m)).copy_from(top);
            joint.view_mut((m, m), (m, m)).copy_from(bottom);
            for i in 0..m {
                joint[(i, m + i)] = nalgebra::Complex::new(1.0, 0.0);
                joint[(m + i, i)] = nalgebra::Complex::new(1.0, 0.0);
            }
            joint
        };
        let joint_b = assemble(&b_blocks[0], &b_blocks[1]);
        let joint_d = assemble(&d_blocks[0], &d_blocks[1]);

        let det_joint_b = joint_b.determinant().re;
        let det_joint_d = joint_d.determinant().re;
        let rel = |dominating: f64, dominated: f64| {
            (dominating - dominated) / dominating.abs().max(dominated.abs()).max(1.0)
        };
        let block = rel(det_joint_d, det_joint_b);

        let mut hadamard = [0.0f64; 2];
        for k in 0..2 {
            let det_b = b_blocks[k].determinant().re;
            let det_d = d_blocks[k].determinant().re;
            hadamard[k] = rel(det_d, det_b);
        }

        let inv_b2 = solve_hermitian_pd(&b_blocks[1], &identity(m))?;
        let cond_b = &b_blocks[0] - inv_b2;
        let inv_d2 = solve_hermitian_pd(&d_blocks[1], &identity(m))?;
        let cond_d = &d_blocks[0] - inv_d2;
        let conditional = rel(cond_d.determinant().re, cond_b.determinant().re);

        let eigs = hermitian_eigenvalues(&hermitize(&joint_b))?;
        let trace: f64 = (0..2 * m).map(|i| joint_b[(i, i)].re).sum();
        let min_eig_ratio = eigs[0] / trace.max(1e-300);

        let draw = DrawMargins { block, hadamard, conditional, min_eig_ratio };
        if draw.block < -1e-9
            || draw.conditional < -1e-9
            || draw.hadamard[0] < -1e-9
            || draw.hadamard[1] < -1e-9
        {
            violations += 1;
        }
        margins.push(draw);
    }
    Ok(AppendixReport { margins, violations })
}
