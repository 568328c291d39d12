use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum IfsError {
    #[error("inverse did not converge: bracket width {width:e} after {iterations} iterations (lift is not a valid homeomorphism lift)")]
    ConvergenceFailure { width: f64, iterations: usize },

    #[error("symbol {symbol} out of range for a system with {k} maps")]
    SymbolOutOfRange { symbol: usize, k: usize },

    #[error("push-forward would create {needed} atoms, cap is {cap}; switch to Monte Carlo")]
    AtomBudgetExceeded { needed: u128, cap: usize },

    #[error("exact tree of depth {depth} needs {needed} nodes, budget is {budget}; use the Monte Carlo estimator")]
    NodeBudgetExceeded { depth: usize, needed: u128, budget: u64 },

    #[error("word enumeration of {needed} words exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("probability {prob} is not m/{denominator} for an integer m")]
    NotRational { prob: f64, denominator: u64 },

    #[error("no candidate arc showed contraction under random words (a common invariant measure is likely, e.g. isometries)")]
    NoContractionFound,

    #[error("no m <= {m_max} gives positive hitting mass at every grid point")]
    NotReached { m_max: usize },

    #[error("success set is empty: no word of length {m} steers the point into the target arc")]
    EmptySuccessSet { m: usize },

    #[error("common success cardinality is zero at block {block}")]
    NonPositiveCommonCardinality { block: usize },

    #[error("sample is degenerate (variance {variance:e})")]
    DegenerateSample { variance: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl IfsError {
    /// Hint printed by the command line runner next to the error.
    pub fn remediation(&self) -> Option<&'static str> {
        match self {
            IfsError::NodeBudgetExceeded { .. } => Some("lower the depth or switch the mode to \"mc\""),
            IfsError::AtomBudgetExceeded { .. } => Some("use the Monte Carlo chain simulator instead of exact push-forward"),
            IfsError::NoContractionFound => Some("the maps may share an invariant measure; try non-isometric maps"),
            IfsError::NotReached { .. } => Some("increase m_max or enlarge the target arc"),
            IfsError::NotRational { .. } => Some("pass a common denominator for the probability vector"),
            IfsError::EmptySuccessSet { .. } | IfsError::NonPositiveCommonCardinality { .. } => {
                Some("increase m using the hitting parameters of the contraction arc")
            }
            IfsError::DegenerateSample { .. } => Some("the observable may be constant or cohomologous to a constant"),
            IfsError::Validation(_) => Some("fix the configuration field named above"),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, IfsError>;
