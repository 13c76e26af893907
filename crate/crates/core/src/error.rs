use thiserror::Error;

/// Errors raised by the lab's numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The exact jump kernel needs a registered subordinator Lévy density.
    #[error("surrogate-only: no closed-form subordinator density for {0}")]
    SurrogateOnly(String),

    #[error("missing subordinator Lévy density for {0}")]
    MissingDensity(String),

    #[error("inequality violated at lambda={lambda}, t={t}: {what}")]
    Violation { what: String, lambda: f64, t: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("bisection failed: {0}")]
    Bisection(String),

    #[error("unsupported shape for this operation: {0}")]
    UnsupportedShape(String),

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("comparability failed: ratio span {span:e} exceeds bound")]
    Comparability { span: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("hypothesis violation: {0}")]
    Hypothesis(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
