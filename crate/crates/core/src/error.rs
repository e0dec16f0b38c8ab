use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver blow-up at stamp {stamp}: {detail}")]
    BlowUp { stamp: f64, detail: String },
    #[error("coverage error: {0}")]
    Coverage(String),
    #[error("non-convergence: {0}")]
    NonConvergence(String),
    #[error("divergence at iterate {iterate}: {detail}")]
    Divergence { iterate: usize, detail: String },
    #[error("gluing mismatch {measured:.3e} exceeds tolerance {tolerance:.3e}")]
    Glue { measured: f64, tolerance: f64 },
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
