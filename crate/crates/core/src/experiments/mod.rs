//! Named experiment recipes: configuration, sweeps over time and backends,
//! and the flat CSV result table.

mod recipes;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::compiler::Trotter;
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::metrics::{ExcitationScale, ObservableSeries};
use crate::model::DisorderSpec;
use crate::noise::NoiseModel;

pub use recipes::{
    run_cluster, run_disorder, run_nonmarkov, run_optimal_coupling, run_qft, run_two_spin, DOMAIN_WALL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Backend {
    /// Noiseless evaluation of the same Trotter circuit, exact expectations.
    Theory,
    /// Dense exponential of the model Hamiltonian, no Trotter error.
    Continuum,
    Digital,
    DigitalAnalog,
}

impl Backend {
    pub fn label(self) -> &'static str {
        match self {
            Backend::Theory => "theory",
            Backend::Continuum => "continuum",
            Backend::Digital => "digital",
            Backend::DigitalAnalog => "da",
        }
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theory" | "exact-theory" => Ok(Backend::Theory),
            "continuum" => Ok(Backend::Continuum),
            "digital" => Ok(Backend::Digital),
            "da" | "digital-analog" => Ok(Backend::DigitalAnalog),
            other => Err(Error::Config(format!(
                "unknown backend {other:?} (expected digital, da or theory)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Recipe {
    TwoSpin,
    Cluster,
    Disorder,
    Qft,
    Nonmarkov,
    OptimalCoupling,
}

impl Recipe {
    pub const ALL: [Recipe; 6] = [
        Recipe::TwoSpin,
        Recipe::Cluster,
        Recipe::Disorder,
        Recipe::Qft,
        Recipe::Nonmarkov,
        Recipe::OptimalCoupling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::TwoSpin => "two-spin",
            Recipe::Cluster => "cluster",
            Recipe::Disorder => "disorder",
            Recipe::Qft => "qft",
            Recipe::Nonmarkov => "nonmarkov",
            Recipe::OptimalCoupling => "optimal-coupling",
        }
    }

    fn default_device(self) -> &'static str {
        match self {
            Recipe::TwoSpin | Recipe::Disorder | Recipe::OptimalCoupling => "qx14-like",
            Recipe::Cluster | Recipe::Qft => "qx2-like",
            Recipe::Nonmarkov => "qx4-like",
        }
    }

    fn default_backends(self) -> Vec<Backend> {
        match self {
            Recipe::TwoSpin | Recipe::Cluster | Recipe::Qft => {
                vec![Backend::Theory, Backend::Digital, Backend::DigitalAnalog]
            }
            Recipe::Disorder => vec![Backend::DigitalAnalog],
            Recipe::Nonmarkov => vec![Backend::Theory, Backend::DigitalAnalog],
            Recipe::OptimalCoupling => vec![Backend::Theory],
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Recipe::ALL
            .into_iter()
            .find(|r| r.name() == s || r.name().replace('-', "_") == s)
            .ok_or_else(|| Error::Config(format!("unknown recipe {s:?}")))
    }
}

/// Where the device description comes from.
#[derive(Clone, Debug)]
pub enum DeviceSource {
    /// Preset name or path to a device JSON document.
    Named(String),
    Model(DeviceModel),
}

impl DeviceSource {
    pub fn resolve(&self) -> Result<DeviceModel> {
        match self {
            DeviceSource::Named(spec) => DeviceModel::preset_or_file(spec).map_err(|e| match e {
                e @ Error::Device { .. } => e,
                other => Error::Device {
                    path: spec.clone(),
                    message: other.to_string(),
                },
            }),
            DeviceSource::Model(d) => Ok(d.clone()),
        }
    }
}

/// Physical sample times in µs.
#[derive(Clone, Debug, PartialEq)]
pub enum TimeGrid {
    /// `points` uniformly spaced values from 0 to `tmax_us` inclusive.
    Uniform { tmax_us: f64, points: usize },
    List(Vec<f64>),
}

impl TimeGrid {
    pub fn times(&self) -> Result<Vec<f64>> {
        let t = match self {
            TimeGrid::Uniform { tmax_us, points } => {
                if *points == 0 {
                    return Err(Error::Config("time grid needs at least one point".into()));
                }
                if !(*tmax_us >= 0.0 && tmax_us.is_finite()) {
                    return Err(Error::Config(format!("tmax {tmax_us} µs must be finite and nonnegative")));
                }
                if *points == 1 {
                    vec![*tmax_us]
                } else {
                    (0..*points).map(|i| tmax_us * i as f64 / (*points - 1) as f64).collect()
                }
            }
            TimeGrid::List(t) => t.clone(),
        };
        if t.is_empty() {
            return Err(Error::Config("empty time grid".into()));
        }
        if t.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(Error::Config("time grid must be finite and nonnegative".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("time grid must be strictly increasing".into()));
        }
        Ok(t)
    }
}

/// Adjustments on top of the device-derived noise model.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseOverrides {
    pub cnot_depol: Option<f64>,
    pub readout_flip: Option<f64>,
    /// Multiplies decoherence rates and error probabilities; 0 disables them.
    pub noise_scale: f64,
    /// Multiplies the crosstalk the engine applies, without changing compilation.
    pub crosstalk_scale: f64,
    pub dt_noise_ns: Option<f64>,
    pub crosstalk_during_gates: Option<bool>,
}

impl Default for NoiseOverrides {
    fn default() -> Self {
        Self {
            cnot_depol: None,
            readout_flip: None,
            noise_scale: 1.0,
            crosstalk_scale: 1.0,
            dt_noise_ns: None,
            crosstalk_during_gates: None,
        }
    }
}

impl NoiseOverrides {
    pub fn noise_model(&self, device: &DeviceModel) -> Result<NoiseModel> {
        let mut m = NoiseModel::from_device(device);
        if let Some(p) = self.cnot_depol {
            m.cnot_depol = p;
        }
        if let Some(p) = self.readout_flip {
            m.readout_flip = p;
        }
        if let Some(dt) = self.dt_noise_ns {
            m.dt_noise_ns = dt;
        }
        if let Some(g) = self.crosstalk_during_gates {
            m.crosstalk_during_gates = g;
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::Config(format!("noise scale {} must be nonnegative", self.noise_scale)));
        }
        m.crosstalk_scale = self.crosstalk_scale;
        let m = m.with_noise_scale(self.noise_scale);
        m.validate()?;
        Ok(m)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub recipe: Recipe,
    pub device: DeviceSource,
    pub backends: Vec<Backend>,
    /// Recipe default when `None`.
    pub trotter: Option<Trotter>,
    pub time_grid: TimeGrid,
    pub shots: usize,
    pub master_seed: u64,
    pub noise: NoiseOverrides,
    pub disorder: DisorderSpec,
    /// Initial basis state as a bitstring, qubit 0 rightmost.
    pub pattern: Option<String>,
    /// Device qubits the recipe acts on; recipe default when `None`.
    pub qubits: Option<Vec<usize>>,
    pub excitation_scale: ExcitationScale,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Defaults for `recipe` on its usual device.
    pub fn new(recipe: Recipe) -> Self {
        let (tmax_us, points, shots) = match recipe {
            Recipe::Nonmarkov => (20.0, 50, 1024),
            Recipe::Disorder => (50.0, 25, 1024),
            _ => (50.0, 25, 8192),
        };
        let time_grid = match recipe {
            Recipe::OptimalCoupling => TimeGrid::List(vec![50.0, 75.0, 100.0]),
            _ => TimeGrid::Uniform { tmax_us, points },
        };
        Self {
            recipe,
            device: DeviceSource::Named(recipe.default_device().into()),
            backends: recipe.default_backends(),
            trotter: None,
            time_grid,
            shots,
            master_seed: 0,
            noise: NoiseOverrides::default(),
            disorder: DisorderSpec::default(),
            pattern: None,
            qubits: None,
            excitation_scale: ExcitationScale::PerSpin,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        if self.backends.is_empty() {
            return Err(Error::Config("no backend selected".into()));
        }
        if let Some(t) = self.trotter {
            if t.steps == 0 {
                return Err(Error::Config("Trotter steps must be at least 1".into()));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        self.time_grid.times()?;
        Ok(())
    }
}

/// One row of the result table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub recipe: String,
    pub backend: String,
    pub t_phys_us: f64,
    pub t_mapped: f64,
    pub observable: String,
    pub qubit: Option<usize>,
    pub value: f64,
    pub stderr: f64,
    pub seed: u64,
}

/// Rows plus a few headline numbers for the terminal.
#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub records: Vec<Record>,
    pub summary: Vec<(String, f64)>,
}

impl ExperimentOutput {
    pub fn series(&self, backend: Backend, observable: &str, qubit: Option<usize>) -> Result<ObservableSeries> {
        series_from(&self.records, backend.label(), observable, qubit)
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// Collects the rows matching `(backend, observable, qubit)` in time order.
pub fn series_from(records: &[Record], backend: &str, observable: &str, qubit: Option<usize>) -> Result<ObservableSeries> {
    let mut rows: Vec<&Record> = records
        .iter()
        .filter(|r| r.backend == backend && r.observable == observable && r.qubit == qubit)
        .collect();
    if rows.is_empty() {
        return Err(Error::invalid(format!("no rows for {backend}/{observable}/{qubit:?}")));
    }
    rows.sort_by(|a, b| a.t_phys_us.total_cmp(&b.t_phys_us));
    ObservableSeries::new(
        format!("{backend}:{observable}"),
        rows.iter().map(|r| r.t_phys_us).collect(),
        rows.iter().map(|r| r.t_mapped).collect(),
        rows.iter().map(|r| r.value).collect(),
        rows.iter().map(|r| r.stderr).collect(),
    )
}

/// Runs the configured recipe, on a dedicated pool when `threads` is set.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let go = || match cfg.recipe {
        Recipe::TwoSpin => run_two_spin(cfg),
        Recipe::Cluster => run_cluster(cfg),
        Recipe::Disorder => run_disorder(cfg),
        Recipe::Qft => run_qft(cfg),
        Recipe::Nonmarkov => run_nonmarkov(cfg),
        Recipe::OptimalCoupling => run_optimal_coupling(cfg),
    };
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(go),
        None => go(),
    }
}

pub fn write_csv<W: Write>(records: &[Record], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<Record>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub const CSV_COLUMNS: [&str; 9] = [
    "recipe",
    "backend",
    "t_phys_us",
    "t_mapped",
    "observable",
    "qubit",
    "value",
    "stderr",
    "seed",
];

pub fn write_csv_file(records: &[Record], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_csv(records, std::io::BufWriter::new(f))
}

/// A short matplotlib script that plots every (backend, observable) series of a CSV.
pub fn plot_script_stub(csv_path: &str) -> String {
    format!(
        r#"import csv
from collections import defaultdict
import matplotlib.pyplot as plt

series = defaultdict(list)
with open({csv_path:?}) as f:
    for row in csv.DictReader(f):
        key = (row["backend"], row["observable"], row["qubit"])
        series[key].append((float(row["t_phys_us"]), float(row["value"]), float(row["stderr"])))

for (backend, observable, qubit), pts in sorted(series.items()):
    pts.sort()
    t, v, e = zip(*pts)
    label = f"{{backend}} {{observable}}" + (f" q{{qubit}}" if qubit else "")
    plt.errorbar(t, v, yerr=e, label=label, capsize=2)
plt.xlabel("t_phys (us)")
plt.legend(fontsize="small")
plt.show()
"#
    )
}
