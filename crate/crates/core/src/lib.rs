//! Trotterized transverse-field Ising dynamics on a simulated superconducting
//! chip, compiled either to CNOT circuits or to single-qubit gates interleaved
//! with idles under always-on ZZ crosstalk.

pub mod compiler;
pub mod device;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod model;
pub mod noise;
pub mod rng;
pub mod statevector;

pub use device::{mean_ising_times, optimal_coupling, idle_block_length, DeviceModel};
pub use error::{Error, Result};
pub use experiments::{Backend, ExperimentConfig, ExperimentOutput, Recipe, Record};
pub use metrics::ObservableSeries;
pub use model::{DisorderSpec, SpinModel};
pub use noise::{NoiseModel, RunResult};
pub use compiler::{Schedule, Trotter};
pub use statevector::{DensityMatrix2x2, StateVector, ZzTerm};
