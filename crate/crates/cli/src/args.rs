use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use twdp::inference::{AnalysisConfig, GTestConfig, GridConfig};

/// Rician versus TWDP fading identification for measured channel envelopes.
///
/// Log verbosity follows `RUST_LOG` (default `warn`).
#[derive(Debug, Parser)]
#[command(name = "twdp", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit Rice and TWDP models to envelope files and pick one.
    Fit(FitArgs),
    /// Power map and per-direction fits for a directional scan.
    Scan(ScanArgs),
    /// Spatial autocorrelation of a complex grid, optionally with a CIR tap fit.
    Spatial(SpatialArgs),
    /// Monte Carlo bit error rate of 4-QAM over a fading channel.
    Ber(BerArgs),
    /// Generate synthetic input files.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    pub k_min: f64,
    /// Upper end of the linear K grid. Fits that land on it are flagged.
    #[arg(long, default_value_t = 1000.0)]
    pub k_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub k_step: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta_step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GTestArgs {
    /// Significance level of the goodness-of-fit test.
    #[arg(long, default_value_t = twdp::inference::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Fit samples per g-test cell.
    #[arg(long, default_value_t = twdp::inference::DEFAULT_PER_CELL)]
    pub per_cell: usize,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub gtest: GTestArgs,
}

impl AnalysisArgs {
    pub fn config(&self) -> AnalysisConfig {
        AnalysisConfig {
            grid: GridConfig {
                k_min: self.grid.k_min,
                k_max: self.grid.k_max,
                k_step: self.grid.k_step,
                delta_step: self.grid.delta_step,
                ..GridConfig::default()
            },
            gtest: GTestConfig {
                alpha: self.gtest.alpha,
                per_cell: self.gtest.per_cell,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Envelope CSV files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Where to write `<stem>.report.json` and `<stem>.cdf.csv` (default:
    /// next to each input).
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
    /// Every stride-th sample is used for fitting, the rest for Ω.
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
    /// Suppress the human-readable summary.
    #[arg(short, long)]
    pub quiet: bool,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Scan JSON file.
    pub input: PathBuf,
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
    /// Directions whose mean power is less than this far above their noise
    /// power are not evaluated.
    #[arg(long, default_value_t = twdp::measurement::DEFAULT_MARGIN_DB)]
    pub margin_db: f64,
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
    #[arg(short, long)]
    pub quiet: bool,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

#[derive(Debug, Args)]
pub struct SpatialArgs {
    /// Grid CSV file (`ix,iy,iz,ifreq,re,im`).
    pub input: PathBuf,
    /// Grid JSON header (default: the input with a `.json` extension).
    #[arg(long)]
    pub header: Option<PathBuf>,
    #[arg(short, long)]
    pub out_dir: Option<PathBuf>,
    /// Spectral interpolation factor of the correlation map.
    #[arg(long, default_value_t = twdp::measurement::DEFAULT_INTERP_FACTOR)]
    pub interp: usize,
    /// Also fit the envelopes of this CIR tap across the grid.
    #[arg(long)]
    pub tap: Option<usize>,
    #[arg(short, long)]
    pub quiet: bool,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    /// Linear K-factor.
    #[arg(long, conflicts_with = "k_db", required_unless_present = "k_db")]
    pub k: Option<f64>,
    /// K-factor in dB.
    #[arg(long, allow_negative_numbers = true)]
    pub k_db: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
}

impl ChannelArgs {
    pub fn k_linear(&self) -> f64 {
        match (self.k, self.k_db) {
            (Some(k), _) => k,
            (None, Some(db)) => 10f64.powf(db / 10.0),
            (None, None) => 0.0,
        }
    }
}

#[derive(Debug, Args)]
pub struct BerArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// SNR points in dB.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0,5,10,15,20,25,30")]
    pub snr_db: Vec<f64>,
    #[arg(long, default_value_t = twdp::linksim::DEFAULT_SYMBOLS)]
    pub symbols: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; a JSON sidecar is written next to it.
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(short, long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// I.i.d. TWDP envelopes.
    Envelopes(SynthEnvelopesArgs),
    /// Plane-wave field on a spatial lattice.
    Grid(SynthGridArgs),
    /// Directional scan with TWDP envelopes plus noise per direction.
    Scan(SynthScanArgs),
}

#[derive(Debug, Args)]
pub struct SynthEnvelopesArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(short, long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthGridArgs {
    /// Scene JSON; when given the wave and lattice flags are ignored.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Plane wave as `amplitude,azimuth_deg,elevation_deg,phase_rad[,delay_s]`.
    #[arg(long = "wave", allow_negative_numbers = true)]
    pub waves: Vec<String>,
    /// Reference wavelength in metres.
    #[arg(long, default_value_t = 0.05)]
    pub wavelength: f64,
    /// Points per axis.
    #[arg(long, default_value_t = 9)]
    pub points: usize,
    /// Lattice spacing in wavelengths.
    #[arg(long, default_value_t = twdp::measurement::DEFAULT_SPACING)]
    pub spacing: f64,
    /// Frequency axis as `start_hz,step_hz,count` (default: one frequency at
    /// c0/wavelength).
    #[arg(long)]
    pub freqs: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub diffuse: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output grid CSV; the JSON header goes next to it.
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthScanArgs {
    /// Direction as `azimuth_deg,elevation_deg,k,delta,omega`.
    #[arg(long = "direction", required = true)]
    pub directions: Vec<String>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub out: PathBuf,
}
