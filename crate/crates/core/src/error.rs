use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("form is degenerate: {0}")]
    Degenerate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("outside the chart domain: {0}")]
    ChartDomain(String),
    #[error("evaluation outside domain at {0:?}")]
    Domain(Vec<f64>),
    #[error("obstruction at t = {t}, point {point:?}: {reason}")]
    Obstruction { t: f64, point: Vec<f64>, reason: String },
    #[error("contact condition fails: {0}")]
    ContactCondition(String),
    #[error("truncation too small: {0}")]
    Truncation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("fixed-point iteration not contracting (factor {factor:.3e}); shrink epsilon")]
    Contraction { factor: f64 },
    #[error("linearization is rank deficient (condition estimate {condition:.3e})")]
    TransversalityFailure { condition: f64 },
    #[error("linearization check failed: relative error {0:.3e}")]
    Assembly(f64),
    #[error("Newton iteration did not converge: final residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("continuation stuck after t = {last_good_t}: {reason}")]
    ContinuationStuck { last_good_t: f64, reason: String },
    #[error("taming fails: {0}")]
    Taming(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
