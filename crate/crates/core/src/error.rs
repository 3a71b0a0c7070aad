use thiserror::Error;

/// Errors produced by the estimation and optimization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input matrix is not Hermitian: relative asymmetry {asymmetry:.3e} exceeds {tol:.1e}")]
    NonHermitianInput { asymmetry: f64, tol: f64 },

    #[error("coordinate vector length {len} is not a perfect square")]
    BadLength { len: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid multipath profile: {0}")]
    InvalidProfile(String),

    #[error("cannot zero-pad {taps} channel taps into {subcarriers} subcarriers")]
    PadError { taps: usize, subcarriers: usize },

    #[error("sensing core collapsed under the pseudo-inverse tolerance (degenerate eigenbasis)")]
    SingularCore,

    #[error("penalized objective became non-finite at iteration {iteration}")]
    NonFiniteIterate { iteration: usize },

    #[error("no samples condition on element {element} taking codebook index {index}; training budget too small")]
    EmptyConditionCell { element: usize, index: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code for the CLI: validation failures map to 1, runtime failures to 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonHermitianInput { .. }
            | Error::BadLength { .. }
            | Error::DimensionMismatch(_)
            | Error::InvalidProfile(_)
            | Error::PadError { .. }
            | Error::EmptyInput(_)
            | Error::Config(_) => 1,
            _ => 2,
        }
    }
}
