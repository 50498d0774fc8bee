use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbiError {
    #[error("inadmissible state: {0}")]
    Inadmissible(String),
    #[error("frequency domain error: {0}")]
    Domain(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical blow-up at t = {t}: {what}")]
    BlowUp { t: f64, what: String },
    #[error("unsupported interaction: {0}")]
    Unsupported(String),
    #[error("cofactors unavailable: {0}")]
    Unavailable(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for AbiError {
    fn from(e: std::io::Error) -> Self {
        AbiError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AbiError>;
