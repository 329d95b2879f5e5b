//! Bounds on the bottleneck rate of a two-relay Gaussian MIMO diamond channel
//! with oblivious relays and Rayleigh fading.
//!
//! The destination is reached only through two relays, each connected by an
//! error-free fronthaul link of capacity `C_k` bits per complex channel use.
//! The relays do not know the transmit codebook, so each can only compress
//! what it observes. This crate computes, for that setting:
//!
//! * `upper_bound::upper_bound_rate` — the informed-receiver upper bound
//!   obtained by letting the relays cooperate and fixing a water level from
//!   the sum-fronthaul constraint,
//! * `qci::qci_rate` — an achievable rate for the quantized-channel-inversion
//!   scheme (zero-force, quantize the per-subchannel noise level on a quantile
//!   grid, entropy-code the levels, and allocate the leftover fronthaul), and
//! * `mmse::mmse_rate` — an achievable rate for the estimate-and-compress
//!   scheme built on the per-relay MMSE filter, evaluated by Monte Carlo.
//!
//! Shared machinery lives in `linalg` (complex Gaussian sampling, small
//! Hermitian eigendecompositions), `wishart` (the unordered-eigenvalue density
//! of the fading Gram matrix), `quad` (semi-infinite adaptive quadrature),
//! `scalar_dib` (the two-relay scalar bottleneck kernel), and `rng`
//! (deterministic substreams so parallel and serial runs agree).
//!
//! Rates and capacities are always bits per complex channel use; logarithms
//! are base 2.

pub mod config;
pub mod error;
pub mod linalg;
pub mod mmse;
pub mod qci;
pub mod quad;
pub mod rng;
pub mod scalar_dib;
pub mod upper_bound;
pub mod wishart;

pub use config::ChannelConfig;
pub use error::Error;
pub use linalg::ComplexMatrix;
pub use mmse::MmseArtifacts;
pub use qci::{QciAllocation, QuantGrid};
pub use quad::Quadrature;
pub use rng::RngFactory;
pub use scalar_dib::{ScalarDibInstance, ScalarDibSolution};
pub use upper_bound::UpperBoundResult;
pub use wishart::EigSpec;

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
