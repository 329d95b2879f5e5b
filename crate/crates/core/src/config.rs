use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::wishart::EigSpec;

/// One experiment instance: antenna counts, noise variance, and the two
/// fronthaul capacities in bits per complex channel use.
///
/// The source transmits `x ~ CN(0, I_M)`; relay `k` observes
/// `y_k = H_k x + n_k` with `n_k ~ CN(0, sigma2 I_{N_k})` and forwards a
/// compressed description over an error-free link of capacity `c_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Source antennas M.
    pub m: usize,
    /// Relay-1 antennas N1.
    pub n1: usize,
    /// Relay-2 antennas N2.
    pub n2: usize,
    /// Noise variance per receive antenna (linear).
    pub sigma2: f64,
    /// Fronthaul capacity of relay 1 (bits per complex channel use).
    pub c1: f64,
    /// Fronthaul capacity of relay 2 (bits per complex channel use).
    pub c2: f64,
}

impl ChannelConfig {
    pub fn new(m: usize, n1: usize, n2: usize, sigma2: f64, c1: f64, c2: f64) -> Result<Self, Error> {
        let cfg = Self { m, n1, n2, sigma2, c1, c2 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.m < 1 || self.n1 < 1 || self.n2 < 1 {
            return Err(Error::InvalidConfig(format!(
                "antenna counts must be >= 1, got M={}, N1={}, N2={}",
                self.m, self.n1, self.n2
            )));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sigma2 must be positive and finite, got {}",
                self.sigma2
            )));
        }
        for (name, c) in [("C1", self.c1), ("C2", self.c2)] {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be nonnegative and finite, got {c}"
                )));
            }
        }
        Ok(())
    }

    /// SNR in dB: rho = 10 log10(1/sigma2). The `+ 0.0` folds the negative
    /// zero of sigma2 = 1 into plain zero so printed output reads `0`.
    pub fn snr_db(&self) -> f64 {
        -10.0 * self.sigma2.log10() + 0.0
    }

    /// Noise variance for a given SNR in dB.
    pub fn sigma2_from_snr_db(snr_db: f64) -> f64 {
        10f64.powf(-snr_db / 10.0)
    }

    pub fn c_sum(&self) -> f64 {
        self.c1 + self.c2
    }

    /// Eigenvalue spec of the stacked channel [H1; H2] seen by cooperating
    /// relays: S = max(N1+N2, M), T = min(N1+N2, M).
    pub fn joint_spec(&self) -> EigSpec {
        EigSpec::for_channel(self.n1 + self.n2, self.m)
    }

    /// Eigenvalue spec of a single relay's channel H_k.
    pub fn relay_spec(&self, relay: usize) -> EigSpec {
        let n = if relay == 0 { self.n1 } else { self.n2 };
        EigSpec::for_channel(n, self.m)
    }
}
