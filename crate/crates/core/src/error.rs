use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {qubit} out of range for {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("{n_qubits} qubits exceeds the limit of {max} for this representation")]
    TooManyQubits { n_qubits: usize, max: usize },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Device document failed validation; `path` locates the offending field.
    #[error("device validation failed at `{path}`: {message}")]
    Device { path: String, message: String },

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn device(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Device {
            path: path.into(),
            message: message.into(),
        }
    }
}
