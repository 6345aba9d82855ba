use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::info;

use daqsim_core::compiler::{SplitOrder, Trotter};
use daqsim_core::experiments::{self, Backend, DeviceSource, ExperimentConfig, Recipe, TimeGrid};
use daqsim_core::metrics::ExcitationScale;
use daqsim_core::Error;

/// Digital versus digital-analog Trotterized Ising dynamics on a modeled
/// always-on-ZZ device. Writes one CSV row per (backend, time, observable).
#[derive(Parser, Debug)]
#[command(name = "daqsim", version)]
struct Args {
    /// two-spin, cluster, disorder, qft, nonmarkov or optimal-coupling.
    recipe: Recipe,

    /// Preset (qx2-like, qx4-like, qx14-like) or path to a device JSON file.
    #[arg(long)]
    device: Option<String>,

    /// digital, da or theory; repeat or comma-separate for several.
    #[arg(long, value_delimiter = ',')]
    backend: Vec<Backend>,

    /// Also evaluate the dense exponential of the Hamiltonian (n <= 10).
    #[arg(long)]
    continuum: bool,

    /// Trotter steps.
    #[arg(long)]
    trotter: Option<usize>,

    /// Use the symmetric second-order splitting.
    #[arg(long, requires = "trotter")]
    second_order: bool,

    /// Largest physical time in µs (coherence time for optimal-coupling).
    #[arg(long)]
    tmax_us: Option<f64>,

    /// Number of uniformly spaced time points, t = 0 included.
    #[arg(long)]
    points: Option<usize>,

    /// Explicit comma-separated time list in µs; overrides --tmax-us/--points.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["tmax_us", "points"])]
    times_us: Vec<f64>,

    #[arg(long)]
    shots: Option<usize>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Number of disorder realizations.
    #[arg(long)]
    disorder: Option<usize>,

    /// Disorder amplitude in units of the mean coupling.
    #[arg(long)]
    disorder_amplitude: Option<f64>,

    #[arg(long)]
    disorder_seed: Option<u64>,

    /// Scales decoherence rates and gate/readout error probabilities.
    #[arg(long, default_value_t = 1.0)]
    noise_scale: f64,

    /// Scales the crosstalk applied during simulation.
    #[arg(long, default_value_t = 1.0)]
    crosstalk_scale: f64,

    /// Depolarizing probability after each CNOT (device value by default).
    #[arg(long)]
    cnot_error: Option<f64>,

    /// Per-qubit readout flip probability.
    #[arg(long)]
    readout_error: Option<f64>,

    /// Apply crosstalk only during idles, not while gates run.
    #[arg(long)]
    no_gate_crosstalk: bool,

    /// Initial basis pattern, qubit 0 rightmost.
    #[arg(long)]
    pattern: Option<String>,

    /// Device qubits the recipe acts on, comma-separated.
    #[arg(long, value_delimiter = ',')]
    qubits: Vec<usize>,

    /// Report the summed excitation instead of the per-spin mean.
    #[arg(long)]
    raw_sum: bool,

    /// Worker threads (all cores by default).
    #[arg(long)]
    threads: Option<usize>,

    /// Also write a matplotlib script that plots the CSV.
    #[arg(long, requires = "out")]
    plot_script: Option<PathBuf>,
}

impl Args {
    fn config(&self) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(self.recipe);
        if let Some(d) = &self.device {
            cfg.device = DeviceSource::Named(d.clone());
        }
        if !self.backend.is_empty() {
            cfg.backends = self.backend.clone();
        }
        if self.continuum && !cfg.backends.contains(&Backend::Continuum) {
            cfg.backends.push(Backend::Continuum);
        }
        if let Some(steps) = self.trotter {
            let order = if self.second_order { SplitOrder::Second } else { SplitOrder::First };
            cfg.trotter = Some(Trotter { steps, order });
        }
        if !self.times_us.is_empty() {
            cfg.time_grid = TimeGrid::List(self.times_us.clone());
        } else if self.tmax_us.is_some() || self.points.is_some() {
            let (tmax_us, points) = match &cfg.time_grid {
                TimeGrid::Uniform { tmax_us, points } => (*tmax_us, *points),
                TimeGrid::List(ts) => (ts.last().copied().unwrap_or(0.0), ts.len()),
            };
            cfg.time_grid = TimeGrid::Uniform {
                tmax_us: self.tmax_us.unwrap_or(tmax_us),
                points: self.points.unwrap_or(points),
            };
        }
        if let Some(s) = self.shots {
            cfg.shots = s;
        }
        cfg.master_seed = self.seed;
        if let Some(r) = self.disorder {
            cfg.disorder.realizations = r;
        }
        if let Some(a) = self.disorder_amplitude {
            cfg.disorder.amplitude_factor = a;
        }
        if let Some(s) = self.disorder_seed {
            cfg.disorder.seed = s;
        }
        cfg.noise.noise_scale = self.noise_scale;
        cfg.noise.crosstalk_scale = self.crosstalk_scale;
        cfg.noise.cnot_depol = self.cnot_error;
        cfg.noise.readout_flip = self.readout_error;
        if self.no_gate_crosstalk {
            cfg.noise.crosstalk_during_gates = Some(false);
        }
        cfg.pattern = self.pattern.clone();
        if !self.qubits.is_empty() {
            cfg.qubits = Some(self.qubits.clone());
        }
        if self.raw_sum {
            cfg.excitation_scale = ExcitationScale::RawSum;
        }
        cfg.threads = self.threads;
        cfg
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::Parse(_) => 2,
        Error::Device { .. } => 3,
        _ => 1,
    }
}

fn execute(args: &Args) -> Result<(), Error> {
    let cfg = args.config();
    info!("running {} with backends {:?}", cfg.recipe.name(), cfg.backends);
    let out = experiments::run(&cfg)?;
    match &args.out {
        Some(path) => {
            experiments::write_csv_file(&out.records, path)?;
            info!("wrote {} rows to {}", out.records.len(), path.display());
        }
        None => experiments::write_csv(&out.records, std::io::stdout().lock())?,
    }
    if let (Some(script), Some(csv)) = (&args.plot_script, &args.out) {
        std::fs::write(script, experiments::plot_script_stub(&csv.to_string_lossy()))?;
    }
    let mut err = std::io::stderr().lock();
    for (key, value) in &out.summary {
        writeln!(err, "{key} = {value:.6}")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("daqsim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
