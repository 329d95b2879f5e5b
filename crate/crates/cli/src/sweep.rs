//! Sweep execution: one rate point per grid value.

use std::collections::BTreeMap;

use diamond_ib::qci::{build_quantile_grid, noise_level_samples, qci_rate};
use diamond_ib::rng::Task;
use diamond_ib::{mmse, upper_bound, ChannelConfig, Error as CoreError, RngFactory};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spec::{SweepMode, SweepSpec};

/// All bounds evaluated at one grid point.
///
/// `None` marks a value that is unavailable: either an infeasible quantizer
/// cell (fronthaul below the entropy-coding floor, the expected marker) or a
/// computation failure, which additionally appends to `notes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub snr_db: f64,
    /// Per-relay fronthaul capacity (`c1`; presets keep `c2` equal).
    pub c_bits: f64,
    pub r_ub: Option<f64>,
    /// Inversion-scheme rate per quantizer resolution B.
    pub r_lb1: BTreeMap<u32, Option<f64>>,
    pub r_lb2: Option<f64>,
    pub r_lb2_stderr: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Channel configuration at one grid value.
pub fn point_config(spec: &SweepSpec, value: f64) -> Result<ChannelConfig, CoreError> {
    let b = &spec.base;
    match spec.mode {
        SweepMode::SnrSweep | SweepMode::SinglePoint => ChannelConfig::new(
            b.m,
            b.n1,
            b.n2,
            ChannelConfig::sigma2_from_snr_db(value),
            b.c1,
            b.c2,
        ),
        SweepMode::CapacitySweep => ChannelConfig::new(b.m, b.n1, b.n2, b.sigma2, value, value),
    }
}

/// Evaluates every grid point. Points run in parallel; the output order is
/// the grid order, and all randomness is addressed by (seed, point index),
/// so the result is identical for any thread count.
pub fn run_sweep(spec: &SweepSpec) -> Vec<RatePoint> {
    let factory = RngFactory::new(spec.mc.seed);
    (0..spec.grid.len())
        .into_par_iter()
        .map(|idx| evaluate_point(spec, &factory, idx))
        .collect()
}

/// Any note means a computation failed somewhere (infeasible quantizer
/// cells are not failures).
pub fn has_failures(points: &[RatePoint]) -> bool {
    points.iter().any(|p| !p.notes.is_empty())
}

fn finite_or_note(value: f64, column: &str, notes: &mut Vec<String>) -> Option<f64> {
    if value.is_finite() {
        Some(value)
    } else {
        notes.push(format!("{column}: non-finite result {value}"));
        None
    }
}

fn evaluate_point(spec: &SweepSpec, factory: &RngFactory, idx: usize) -> RatePoint {
    let value = spec.grid[idx];
    let mut notes = Vec::new();
    let cfg = match point_config(spec, value) {
        Ok(cfg) => cfg,
        Err(e) => {
            notes.push(format!("config: {e}"));
            return RatePoint {
                snr_db: if spec.mode == SweepMode::CapacitySweep {
                    spec.base.snr_db()
                } else {
                    value
                },
                c_bits: if spec.mode == SweepMode::CapacitySweep { value } else { spec.base.c1 },
                r_ub: None,
                r_lb1: spec.qci_bits.iter().map(|&b| (b, None)).collect(),
                r_lb2: None,
                r_lb2_stderr: None,
                notes,
            };
        }
    };

    let r_ub = match upper_bound::upper_bound_rate(&cfg) {
        Ok(out) => finite_or_note(out.rate, "r_ub", &mut notes),
        Err(e) => {
            notes.push(format!("r_ub: {e}"));
            None
        }
    };

    let mut r_lb1 = BTreeMap::new();
    if !spec.qci_bits.is_empty() {
        match level_samples(spec, factory, idx, &cfg) {
            Ok([s1, s2]) => {
                for &bits in &spec.qci_bits {
                    let g1 = build_quantile_grid(&s1, bits, cfg.sigma2);
                    let g2 = build_quantile_grid(&s2, bits, cfg.sigma2);
                    let cell = match qci_rate(&cfg, &g1, &g2, spec.qci_tol) {
                        Ok(alloc) => {
                            finite_or_note(alloc.rate, &format!("r_lb1_B{bits}"), &mut notes)
                        }
                        // Fronthaul below the entropy-coding floor: the
                        // expected infeasibility marker, not a failure.
                        Err(CoreError::InfeasibleBudget { .. }) => None,
                        Err(e) => {
                            notes.push(format!("r_lb1_B{bits}: {e}"));
                            None
                        }
                    };
                    r_lb1.insert(bits, cell);
                }
            }
            Err(e) => {
                notes.push(format!("r_lb1: {e}"));
                for &bits in &spec.qci_bits {
                    r_lb1.insert(bits, None);
                }
            }
        }
    }

    let (r_lb2, r_lb2_stderr) = match mmse::mmse_rate(&cfg, spec.mc.samples, factory, idx) {
        Ok(out) => (
            finite_or_note(out.rate, "r_lb2", &mut notes),
            finite_or_note(out.mc_std_err, "r_lb2_stderr", &mut notes),
        ),
        Err(e) => {
            notes.push(format!("r_lb2: {e}"));
            (None, None)
        }
    };

    RatePoint { snr_db: cfg.snr_db(), c_bits: cfg.c1, r_ub, r_lb1, r_lb2, r_lb2_stderr, notes }
}

/// Inversion-noise samples for both relays at this point; drawn once and
/// shared by every quantizer resolution.
fn level_samples(
    spec: &SweepSpec,
    factory: &RngFactory,
    idx: usize,
    cfg: &ChannelConfig,
) -> Result<[Vec<f64>; 2], CoreError> {
    let mut rng1 = factory.stream(Task::GridRelay1, idx as u64);
    let s1 = noise_level_samples(cfg.m, cfg.n1, cfg.sigma2, spec.grid_samples, &mut rng1)?;
    let mut rng2 = factory.stream(Task::GridRelay2, idx as u64);
    let s2 = noise_level_samples(cfg.m, cfg.n2, cfg.sigma2, spec.grid_samples, &mut rng2)?;
    Ok([s1, s2])
}
