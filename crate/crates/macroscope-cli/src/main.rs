mod commands;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "macroscope", version, about = "Macroscopicity bounds for phonon-mode experiments")]
pub struct Cli {
    /// Directory for result files and manifest.json.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// What to print on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
pub struct DeviceArg {
    /// Preset name or path to a device JSON file.
    #[arg(long, default_value = "hbar-2022")]
    pub device: String,
}

#[derive(Args, Clone)]
pub struct RangeArgs {
    /// Smallest sigma_q [kg m/s].
    #[arg(long)]
    pub sigma_q_min: Option<f64>,
    /// Largest sigma_q [kg m/s].
    #[arg(long)]
    pub sigma_q_max: Option<f64>,
    /// Shortest hbar/sigma_q [m]; alternative to --sigma-q-max.
    #[arg(long, conflicts_with = "sigma_q_max")]
    pub length_min: Option<f64>,
    /// Longest hbar/sigma_q [m]; alternative to --sigma-q-min.
    #[arg(long, conflicts_with = "sigma_q_min")]
    pub length_max: Option<f64>,
    /// Scan points.
    #[arg(long, default_value_t = 129)]
    pub points: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Default,
    Analytic,
    Quadrature,
    Bruteforce,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvolveMethod {
    Closed,
    Convolution,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Device parameters and derived quantities.
    Device {
        #[command(flatten)]
        device: DeviceArg,
    },
    /// Gamma tau_e over a sigma_q scan.
    DiffusionCurve {
        #[command(flatten)]
        device: DeviceArg,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Default)]
        method: MethodArg,
    },
    /// Maximum of Gamma tau_e and where it sits.
    MaxDiffusion {
        #[command(flatten)]
        device: DeviceArg,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Wigner function snapshots of a decaying, diffusing state.
    Evolve {
        /// ground, fock1, superposition or mixture:<p>.
        #[arg(long, default_value = "fock1")]
        state: String,
        /// Diffusion rate [1/s].
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        /// Relaxation rate [1/s]; defaults to 1/T1 of the device.
        #[arg(long)]
        gamma_down: Option<f64>,
        #[command(flatten)]
        device: DeviceArg,
        /// Comma-separated times in microseconds.
        #[arg(long, default_value = "0,10,20,40")]
        times: String,
        /// extent:points of the square grid.
        #[arg(long, default_value = "2.4:41")]
        grid: String,
        #[arg(long, value_enum, default_value_t = EvolveMethod::Closed)]
        method: EvolveMethod,
    },
    /// Synthetic noisy Wigner dataset.
    Synth {
        #[arg(long, default_value = "fock1")]
        state: String,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[command(flatten)]
        device: DeviceArg,
        #[arg(long, default_value = "0,10,20,40")]
        times: String,
        #[arg(long, default_value = "2.4:41")]
        grid: String,
        /// Pixel noise standard deviation.
        #[arg(long, default_value_t = 0.034)]
        noise: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Posterior and upper quantiles of Gamma from a dataset.
    Infer {
        /// Dataset CSV (time_us,X,P,value).
        #[arg(long)]
        dataset: PathBuf,
        /// Overrides the state recorded in the file.
        #[arg(long)]
        state: Option<String>,
        #[command(flatten)]
        device: DeviceArg,
        /// Comma-separated confidence levels.
        #[arg(long, default_value = "0.95,0.999,0.9999999")]
        confidence: String,
        /// min:max:points of the log-spaced Gamma grid [1/s]; Gamma = 0 is always added.
        #[arg(long, default_value = "1e-2:1e5:400")]
        gamma_grid: String,
    },
    /// Macroscopicity for an excluded rate.
    Macroscopicity {
        #[arg(long)]
        gamma: f64,
        #[command(flatten)]
        device: DeviceArg,
        #[command(flatten)]
        range: RangeArgs,
        /// Confidence level the rate was excluded at.
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
    },
    /// Rescales an excluded rate to another device by T1 and evaluates mu.
    Project {
        /// Reference excluded rate [1/s].
        #[arg(long, default_value_t = 160.0)]
        gamma: f64,
        /// Reference T1 [us].
        #[arg(long, default_value_t = 85.8)]
        t1_ref: f64,
        #[command(flatten)]
        device: DeviceArg,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Heating bound from a steady-state population.
    Nonint {
        #[command(flatten)]
        device: DeviceArg,
        /// Thermal population; defaults to the device's.
        #[arg(long)]
        p1: Option<f64>,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Exact cylinder rate against the benchmarked reference integral.
    CylinderCompare {
        /// Mode index of a benchmark set (1 or 40); both when omitted.
        #[arg(long)]
        ell: Vec<u32>,
        #[arg(long, default_value_t = 1e-9)]
        r_min: f64,
        #[arg(long, default_value_t = 1e-3)]
        r_max: f64,
        #[arg(long, default_value_t = 25)]
        points: usize,
    },
    /// Runs the acceptance computations.
    Reproduce {
        /// Print the macroscopicity table for the resonator experiments.
        #[arg(long)]
        paper_table: bool,
        /// Comma-separated criterion numbers; all when omitted.
        #[arg(long)]
        criteria: Option<String>,
    },
}

fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("MACROSCOPE_THREADS") {
        let n: usize = v.parse().map_err(|_| format!("MACROSCOPE_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            return Err("MACROSCOPE_THREADS must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match commands::dispatch(&cli) {
        Ok(code) => code,
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
