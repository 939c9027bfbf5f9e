use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wavetouch::features::{Band, BandConfig, Feature};
use wavetouch::material_sim::{
    NoiseLevel, TrialConfig, DEFAULT_GRIP_FORCE_N, DEFAULT_SNR_DB, DEFAULT_TRIALS,
};
use wavetouch::pipeline::{self, SEED_ENV};
use wavetouch::signals::{ChirpConfig, DEFAULT_SAMPLE_RATE_HZ};
use wavetouch::{Error, Result};

/// Active vibro-tactile material classification toolkit.
#[derive(Debug, Parser)]
#[command(name = "wavetouch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic emitter/receiver trials.
    Synth(SynthArgs),
    /// Write per-trial spectra and differential spectra.
    Analyze(AnalyzeArgs),
    /// Extract features and fit a nearest-centroid model.
    Train(TrainArgs),
    /// Classify trials with a saved model.
    Classify(ClassifyArgs),
    /// Export a classification map (CSV plus SVG).
    Map(MapArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// `builtin`, `infill`, `all`, or comma list of names / NAME:E_MPA[:INFILL].
    #[arg(long, default_value = "builtin")]
    materials: String,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SNR_DB, conflicts_with = "noiseless", allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long)]
    noiseless: bool,
    /// Overridden by the WAVETOUCH_SEED environment variable.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100.0)]
    f_start: f64,
    #[arg(long, default_value_t = 800.0)]
    f_end: f64,
    #[arg(long, default_value_t = 2.0)]
    duration: f64,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE_HZ)]
    sample_rate: f64,
    #[arg(long, default_value_t = DEFAULT_GRIP_FORCE_N)]
    grip_force: f64,
}

#[derive(Debug, Args)]
struct BandArgs {
    #[arg(long, default_value = "100:400")]
    band_low: String,
    #[arg(long, default_value = "400:800")]
    band_high: String,
    #[arg(long, default_value_t = 50.0)]
    filter_hz: f64,
}

impl BandArgs {
    fn resolve(&self) -> Result<BandConfig> {
        let bands = BandConfig {
            low: self.band_low.parse::<Band>()?,
            high: self.band_high.parse::<Band>()?,
            filter_width_hz: self.filter_hz,
        };
        bands.validate()?;
        Ok(bands)
    }
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    bands: BandArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    bands: BandArgs,
    /// Two of peak_freq, peak_mag, slope.
    #[arg(long, default_value = "peak_freq,slope")]
    features: String,
    #[arg(long)]
    model_out: PathBuf,
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct MapArgs {
    #[arg(long)]
    model: PathBuf,
    /// CSV output; an SVG plot is written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

fn parse_features(arg: &str) -> Result<[Feature; 2]> {
    let parsed: Vec<Feature> = arg.split(',').map(str::parse).collect::<Result<_>>()?;
    parsed.try_into().map_err(|_| {
        Error::Config(format!(
            "--features needs exactly two features, got {arg:?}"
        ))
    })
}

fn effective_seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(e) => Err(Error::Config(format!("{SEED_ENV}: {e}"))),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => {
            let materials = pipeline::parse_materials(&a.materials)?;
            let cfg = TrialConfig {
                chirp: ChirpConfig {
                    f_start_hz: a.f_start,
                    f_end_hz: a.f_end,
                    duration_s: a.duration,
                    amplitude: a.amplitude,
                    sample_rate_hz: a.sample_rate,
                },
                grip_force_n: a.grip_force,
                noise: if a.noiseless {
                    NoiseLevel::Noiseless
                } else {
                    NoiseLevel::SnrDb(a.snr_db)
                },
                seed: effective_seed(a.seed)?,
                num_trials: a.trials,
            };
            let written = pipeline::cmd_synth(&materials, &cfg, &a.out)?;
            eprintln!("wrote {} trial files to {}", written.len(), a.out.display());
        }
        Command::Analyze(a) => {
            let n = pipeline::cmd_analyze(&a.inputs, &a.bands.resolve()?, &a.out)?;
            eprintln!("analyzed {n} trials into {}", a.out.display());
        }
        Command::Train(a) => {
            let features = parse_features(&a.features)?;
            let model =
                pipeline::cmd_train(&a.inputs, &a.bands.resolve()?, features, &a.model_out)?;
            eprintln!(
                "trained {} classes into {}",
                model.classes.len(),
                a.model_out.display()
            );
        }
        Command::Classify(a) => {
            let (rows, text) = pipeline::cmd_classify(&a.model, &a.inputs)?;
            print!("{text}");
            let correct = rows.iter().filter(|r| r.material == r.predicted).count();
            eprintln!(
                "{correct}/{} predictions match the recorded material",
                rows.len()
            );
        }
        Command::Map(a) => {
            let map = pipeline::cmd_map(&a.model, &a.inputs, &a.out)?;
            eprintln!(
                "mapped {} points into {}",
                map.points.len(),
                a.out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("wavetouch: {msg}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
