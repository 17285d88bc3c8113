mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "tmnoise", version, about = "Noise spectra of a two-membrane optomechanical cavity")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Overrides applied on top of the configuration file.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Parameter preset: table1, fig4c, fig5 or cancellation.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_parser = ["full", "rwa", "rwa-linear"])]
    pub solver: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid start, Hz.
    #[arg(long, global = true)]
    pub fmin: Option<f64>,
    /// Grid stop, Hz.
    #[arg(long, global = true)]
    pub fmax: Option<f64>,
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true, value_parser = ["x", "y"])]
    pub quadrature: Option<String>,
    #[arg(long, global = true, value_parser = ["t2", "r1"])]
    pub port: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Output quadrature spectrum on the configured grid.
    Spectrum,
    /// Noise calibration from a synthetic beat or measured lock-in amplitudes.
    Calibrate,
    /// Fit couplings or Lorentzian peaks to a measured or synthetic spectrum.
    Fit {
        #[arg(long, default_value = "couplings", value_parser = ["couplings", "lorentz"])]
        model: String,
        /// CSV with `freq_hz,psd_value` rows.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Time-domain simulation and Welch spectrum.
    Oracle {
        /// Recorded duration, s.
        #[arg(long)]
        duration: Option<f64>,
        /// Keep every n-th recorded sample in the time-series CSV.
        #[arg(long, default_value_t = 1)]
        decimate: usize,
    },
    /// Noise dips near each membrane resonance.
    Dips,
    /// Spectra and cancellation window for each seed intensity.
    Cancellation,
    /// Run the acceptance criteria.
    Acceptance {
        /// Multiplies every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Comma-separated criterion numbers.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
    /// Validate configuration files without computing anything.
    Validate { files: Vec<PathBuf> },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spectrum => commands::spectrum(&cli.common),
        Command::Calibrate => commands::calibrate(&cli.common),
        Command::Fit { model, data, starts } => commands::fit(&cli.common, &model, data.as_deref(), starts),
        Command::Oracle { duration, decimate } => commands::oracle(&cli.common, duration, decimate),
        Command::Dips => commands::dips(&cli.common),
        Command::Cancellation => commands::cancellation(&cli.common),
        Command::Acceptance { tolerance_scale, only } => commands::acceptance(&cli.common, tolerance_scale, only),
        Command::Validate { files } => commands::validate(&files),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
