//! Experiment descriptions: TOML schema, validation, and built-in presets.

use std::path::PathBuf;

use diamond_ib::ChannelConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Which channel parameter the grid varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Grid values are SNR points in dB; fronthaul stays at the base config.
    SnrSweep,
    /// Grid values are the common per-relay fronthaul capacity in bits;
    /// the noise level stays at the base config.
    CapacitySweep,
    /// One row only; the single grid value is the SNR in dB.
    SinglePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Monte Carlo controls shared by every sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSection {
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputSection {
    pub path: PathBuf,
    pub format: OutputFormat,
}

/// A validated sweep description.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub mode: SweepMode,
    /// Sweep values: dB for SNR modes, bits for capacity sweeps.
    pub grid: Vec<f64>,
    pub base: ChannelConfig,
    /// Quantizer resolutions evaluated for the inversion scheme.
    pub qci_bits: Vec<u32>,
    pub mc: McSection,
    /// Empirical sample count behind each quantile grid.
    pub grid_samples: usize,
    /// Bit tolerance handed to the fronthaul allocator.
    pub qci_tol: f64,
    pub output: OutputSection,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.grid.is_empty() {
            return bad("grid must not be empty".into());
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return bad("grid values must be finite".into());
        }
        for w in self.grid.windows(2) {
            if !(w[0] < w[1]) {
                return bad(format!(
                    "grid must increase strictly, got {} then {}",
                    w[0], w[1]
                ));
            }
        }
        if self.mode == SweepMode::SinglePoint && self.grid.len() != 1 {
            return bad(format!(
                "single_point takes exactly one grid value, got {}",
                self.grid.len()
            ));
        }
        if self.mode == SweepMode::CapacitySweep && self.grid[0] < 0.0 {
            return bad("capacities must be nonnegative".into());
        }
        for w in self.qci_bits.windows(2) {
            if w[0] >= w[1] {
                return bad("qci_bits must increase strictly".into());
            }
        }
        if self.qci_bits.iter().any(|&b| b > 10) {
            return bad("qci_bits beyond 10 would need a 1024-level grid".into());
        }
        if self.mc.samples == 0 {
            return bad("mc.samples must be at least 1".into());
        }
        if self.grid_samples < 100 {
            return bad("grid_samples below 100 cannot support quantiles".into());
        }
        if !(self.qci_tol > 0.0 && self.qci_tol.is_finite()) {
            return bad("qci_tol must be positive".into());
        }
        if self.output.path.as_os_str().is_empty() {
            return bad("output.path must not be empty".into());
        }
        self.base
            .validate()
            .map_err(|e| CliError::Config(format!("[base]: {e}")))
    }
}

const DEFAULT_SAMPLES: usize = 10_000;
const DEFAULT_SEED: u64 = 7;
const DEFAULT_GRID_SAMPLES: usize = 200_000;
const DEFAULT_QCI_TOL: f64 = 5e-3;

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_grid_samples() -> usize {
    DEFAULT_GRID_SAMPLES
}
fn default_qci_tol() -> f64 {
    DEFAULT_QCI_TOL
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    mode: SweepMode,
    grid: Vec<f64>,
    qci_bits: Vec<u32>,
    #[serde(default = "default_grid_samples")]
    grid_samples: usize,
    #[serde(default = "default_qci_tol")]
    qci_tol: f64,
    base: BaseSection,
    #[serde(default)]
    mc: Option<McFileSection>,
    #[serde(default)]
    output: Option<OutputFileSection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BaseSection {
    m: usize,
    n1: usize,
    n2: usize,
    /// Exactly one of `sigma2` and `snr_db` must be given.
    sigma2: Option<f64>,
    snr_db: Option<f64>,
    c1: f64,
    c2: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct McFileSection {
    #[serde(default = "default_samples")]
    samples: usize,
    #[serde(default = "default_seed")]
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputFileSection {
    path: PathBuf,
    format: Option<OutputFormat>,
}

/// Parses a TOML sweep description and validates it. Parse errors keep the
/// deserializer's line/column diagnostics.
pub fn parse_spec(text: &str) -> Result<SweepSpec, CliError> {
    let file: SpecFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let sigma2 = match (file.base.sigma2, file.base.snr_db) {
        (Some(s), None) => s,
        (None, Some(db)) => ChannelConfig::sigma2_from_snr_db(db),
        _ => {
            return Err(CliError::Config(
                "[base]: give exactly one of sigma2 and snr_db".into(),
            ))
        }
    };
    let base = ChannelConfig::new(
        file.base.m,
        file.base.n1,
        file.base.n2,
        sigma2,
        file.base.c1,
        file.base.c2,
    )
    .map_err(|e| CliError::Config(format!("[base]: {e}")))?;
    let mc = file.mc.map_or(
        McSection { samples: DEFAULT_SAMPLES, seed: DEFAULT_SEED },
        |m| McSection { samples: m.samples, seed: m.seed },
    );
    let output = match file.output {
        Some(o) => {
            let format = o.format.unwrap_or_else(|| {
                match o.path.extension().and_then(|e| e.to_str()) {
                    Some("json") => OutputFormat::Json,
                    _ => OutputFormat::Csv,
                }
            });
            OutputSection { path: o.path, format }
        }
        None => OutputSection { path: PathBuf::from("sweep.csv"), format: OutputFormat::Csv },
    };
    let spec = SweepSpec {
        mode: file.mode,
        grid: file.grid,
        base,
        qci_bits: file.qci_bits,
        mc,
        grid_samples: file.grid_samples,
        qci_tol: file.qci_tol,
        output,
    };
    spec.validate()?;
    Ok(spec)
}

/// Built-in experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Rate versus SNR at fixed fronthaul: 3x3x3 antennas, C = 40 bits,
    /// SNR from 0 to 50 dB in 10 dB steps, quantizers B = 1..4.
    Fig2,
    /// Rate versus fronthaul at fixed SNR: 3x3x3 antennas, 40 dB,
    /// C from 5 to 60 bits in 5 bit steps, quantizers B = 1..4.
    Fig3,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
        }
    }
}

pub fn preset_spec(preset: Preset) -> SweepSpec {
    let (mode, grid, base) = match preset {
        Preset::Fig2 => (
            SweepMode::SnrSweep,
            (0..=5).map(|i| 10.0 * i as f64).collect::<Vec<_>>(),
            // The noise level here is a placeholder; every point overrides it.
            ChannelConfig::new(3, 3, 3, 1e-4, 40.0, 40.0).expect("static preset"),
        ),
        Preset::Fig3 => (
            SweepMode::CapacitySweep,
            (1..=12).map(|i| 5.0 * i as f64).collect::<Vec<_>>(),
            // 40 dB; the fronthaul fields are placeholders.
            ChannelConfig::new(3, 3, 3, 1e-4, 40.0, 40.0).expect("static preset"),
        ),
    };
    let spec = SweepSpec {
        mode,
        grid,
        base,
        qci_bits: vec![1, 2, 3, 4],
        mc: McSection { samples: DEFAULT_SAMPLES, seed: DEFAULT_SEED },
        grid_samples: DEFAULT_GRID_SAMPLES,
        qci_tol: DEFAULT_QCI_TOL,
        output: OutputSection {
            path: PathBuf::from(format!("{}.csv", preset.name())),
            format: OutputFormat::Csv,
        },
    };
    spec.validate().expect("presets are valid by construction");
    spec
}
