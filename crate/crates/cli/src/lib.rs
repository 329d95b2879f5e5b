//! Sweep driver for the diamond-channel rate bounds.
//!
//! The library half of the `diamond-sweep` binary: [`spec`] describes an
//! experiment (what to vary, channel shape, Monte Carlo controls, output),
//! [`sweep`] evaluates the three bounds at every grid point, and [`emit`]
//! renders the results as a fixed-schema CSV or a JSON document carrying
//! full run provenance. Everything is deterministic in the spec plus seed,
//! including under different thread counts, so reruns are byte-identical.

pub mod emit;
pub mod spec;
pub mod sweep;

pub use emit::{Document, Metadata};
pub use spec::{OutputFormat, Preset, SweepMode, SweepSpec};
pub use sweep::RatePoint;

/// Errors surfaced to the command line.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unusable sweep description: parse failure or invalid field values.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
