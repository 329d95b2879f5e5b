use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use diamond_ib_cli::emit::write_output;
use diamond_ib_cli::spec::{parse_spec, preset_spec, OutputFormat, Preset};
use diamond_ib_cli::sweep::{has_failures, run_sweep};
use diamond_ib_cli::CliError;

/// Rate bounds for the fading MIMO diamond channel with oblivious relays.
///
/// Runs an SNR or fronthaul sweep and writes one row per grid point with
/// the informed-receiver upper bound, the quantized-inversion rates for each
/// configured quantizer resolution, and the Monte Carlo estimate-and-compress
/// rate with its standard error.
#[derive(Parser)]
#[command(name = "diamond-sweep", version)]
struct Args {
    /// TOML sweep description (see the README for the schema)
    #[arg(long, value_name = "PATH", conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment: rate vs SNR (fig2) or rate vs fronthaul (fig3)
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Master seed for every random substream
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo samples per sweep point
    #[arg(long)]
    samples: Option<usize>,
    /// Output path (default: the config's [output].path, or <preset>.<format>)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format (default: the config's [output].format, or csv)
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Fig2,
    Fig3,
}

impl From<PresetArg> for Preset {
    fn from(arg: PresetArg) -> Self {
        match arg {
            PresetArg::Fig2 => Preset::Fig2,
            PresetArg::Fig3 => Preset::Fig3,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(arg: FormatArg) -> Self {
        match arg {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        // Some points carry failure notes; the output file still has every
        // row that could be computed.
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(args: Args) -> Result<bool, CliError> {
    let (mut spec, preset) = match (&args.config, args.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            let spec = parse_spec(&text).map_err(|e| match e {
                // Prefix the file path onto the bare message, not the
                // already-rendered "config error: ..." line.
                CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
                other => other,
            })?;
            (spec, None)
        }
        (None, Some(arg)) => {
            let preset = Preset::from(arg);
            (preset_spec(preset), Some(preset))
        }
        // clap enforces exactly one source.
        _ => unreachable!(),
    };

    if let Some(seed) = args.seed {
        spec.mc.seed = seed;
    }
    if let Some(samples) = args.samples {
        spec.mc.samples = samples;
    }
    if let Some(format) = args.format {
        spec.output.format = format.into();
        if args.out.is_none() {
            if let Some(preset) = preset {
                spec.output.path =
                    PathBuf::from(format!("{}.{}", preset.name(), spec.output.format.extension()));
            }
        }
    }
    if let Some(out) = args.out {
        spec.output.path = out;
    }
    spec.validate()?;

    let points = run_sweep(&spec);
    write_output(&spec, &points, preset.map(Preset::name))?;
    for point in &points {
        for note in &point.notes {
            eprintln!(
                "warning: snr {} dB, C {} bits: {note}",
                point.snr_db, point.c_bits
            );
        }
    }
    println!("wrote {}", spec.output.path.display());
    Ok(!has_failures(&points))
}
