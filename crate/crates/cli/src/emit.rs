//! Figure-ready output: fixed-schema CSV and a JSON document with run
//! provenance.

use std::fs;

use diamond_ib::Quadrature;
use serde::{Deserialize, Serialize};

use crate::spec::{OutputFormat, SweepMode, SweepSpec};
use crate::sweep::RatePoint;
use crate::CliError;

/// Everything needed to reproduce a run, written into the JSON header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub mode: SweepMode,
    pub seed: u64,
    pub samples: usize,
    pub grid_samples: usize,
    pub qci_bits: Vec<u32>,
    pub qci_tol: f64,
    pub quad_abs_tol: f64,
    pub quad_rel_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
}

impl Metadata {
    pub fn for_spec(spec: &SweepSpec, preset: Option<&str>) -> Self {
        let quad = Quadrature::default();
        Metadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            mode: spec.mode,
            seed: spec.mc.seed,
            samples: spec.mc.samples,
            grid_samples: spec.grid_samples,
            qci_bits: spec.qci_bits.clone(),
            qci_tol: spec.qci_tol,
            quad_abs_tol: quad.abs_tol,
            quad_rel_tol: quad.rel_tol,
            preset: preset.map(str::to_string),
        }
    }
}

/// JSON output: metadata header plus all rate points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub metadata: Metadata,
    pub points: Vec<RatePoint>,
}

fn cell(value: Option<f64>) -> String {
    match value {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => "NA".to_string(),
    }
}

pub fn csv_header(qci_bits: &[u32]) -> String {
    let mut line = String::from("snr_db,c_bits,r_ub");
    for b in qci_bits {
        line.push_str(&format!(",r_lb1_B{b}"));
    }
    line.push_str(",r_lb2,r_lb2_stderr");
    line
}

/// Renders the fixed-schema CSV. Unavailable cells print the literal `NA`;
/// floats use Rust's shortest round-trip formatting, so identical runs
/// yield identical bytes.
pub fn to_csv(points: &[RatePoint], qci_bits: &[u32]) -> String {
    let mut out = csv_header(qci_bits);
    out.push('\n');
    for p in points {
        out.push_str(&format!("{},{},{}", p.snr_db, p.c_bits, cell(p.r_ub)));
        for b in qci_bits {
            out.push(',');
            out.push_str(&cell(p.r_lb1.get(b).copied().flatten()));
        }
        out.push(',');
        out.push_str(&cell(p.r_lb2));
        out.push(',');
        out.push_str(&cell(p.r_lb2_stderr));
        out.push('\n');
    }
    out
}

pub fn to_json(doc: &Document) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("plain data serializes");
    text.push('\n');
    text
}

/// Renders points in the spec's output format.
pub fn render(spec: &SweepSpec, points: &[RatePoint], preset: Option<&str>) -> String {
    match spec.output.format {
        OutputFormat::Csv => to_csv(points, &spec.qci_bits),
        OutputFormat::Json => to_json(&Document {
            metadata: Metadata::for_spec(spec, preset),
            points: points.to_vec(),
        }),
    }
}

pub fn write_output(
    spec: &SweepSpec,
    points: &[RatePoint],
    preset: Option<&str>,
) -> Result<(), CliError> {
    fs::write(&spec.output.path, render(spec, points, preset))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn sample_point(snr: f64) -> RatePoint {
        let mut r_lb1 = BTreeMap::new();
        r_lb1.insert(1, Some(0.75));
        r_lb1.insert(4, None);
        RatePoint {
            snr_db: snr,
            c_bits: 40.0,
            r_ub: Some(26.3924),
            r_lb1,
            r_lb2: Some(20.5),
            r_lb2_stderr: Some(0.01),
            notes: Vec::new(),
        }
    }

    #[test]
    fn header_matches_schema() {
        assert_eq!(
            csv_header(&[1, 2, 3, 4]),
            "snr_db,c_bits,r_ub,r_lb1_B1,r_lb1_B2,r_lb1_B3,r_lb1_B4,r_lb2,r_lb2_stderr"
        );
    }

    #[test]
    fn three_points_make_four_lines() {
        let points: Vec<_> = [0.0, 10.0, 20.0].map(sample_point).into();
        let text = to_csv(&points, &[1, 4]);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "snr_db,c_bits,r_ub,r_lb1_B1,r_lb1_B4,r_lb2,r_lb2_stderr");
        assert_eq!(lines[1], "0,40,26.3924,0.75,NA,20.5,0.01");
    }

    #[test]
    fn infeasible_cells_print_literal_na() {
        let text = to_csv(&[sample_point(30.0)], &[1, 4]);
        assert!(text.contains(",NA,"), "missing NA marker: {text}");
        assert!(!text.contains(",0,20.5"), "infeasible cell must not become zero");
    }

    #[test]
    fn json_round_trip_is_exact() {
        let doc = Document {
            metadata: Metadata {
                version: "0.1.0".into(),
                mode: SweepMode::SnrSweep,
                seed: 7,
                samples: 10_000,
                grid_samples: 200_000,
                qci_bits: vec![1, 4],
                qci_tol: 5e-3,
                quad_abs_tol: 1e-12,
                quad_rel_tol: 1e-11,
                preset: Some("fig2".into()),
            },
            points: vec![sample_point(0.1 + 0.2)],
        };
        let text = to_json(&doc);
        let back: Document = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        // Re-serialization is byte-identical, so values survive bit-for-bit.
        assert_eq!(to_json(&back), text);
    }
}
