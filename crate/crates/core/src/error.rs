use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("budget k must be positive, got {0}")]
    NonPositiveBudget(f64),
    #[error("rate limit b must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("price bounds must satisfy 0 < p_min <= p_max, got [{p_min}, {p_max}]")]
    BadPriceBounds { p_min: f64, p_max: f64 },
    #[error("price {value} at index {index} lies outside [p_min, p_max]")]
    PriceOutOfBounds { index: usize, value: f64 },
    #[error("price sequence is empty")]
    EmptyPrices,
    #[error("invalid horizon scenario: {0}")]
    BadScenario(String),
    #[error("price sequence length {got} does not match horizon {expected}")]
    HorizonMismatch { expected: usize, got: usize },

    #[error("pseudo-cost pole: alpha * x / k = {0} >= 1")]
    SingularEvaluation(f64),
    #[error("amount {requested} exceeds the remaining budget {available}")]
    BudgetExceeded { requested: f64, available: f64 },

    #[error("balance parameter alpha must be >= 1, got {0}")]
    BadAlpha(f64),
    #[error("notification received outside notice mode")]
    NotifyInWrongMode,
    #[error("a notification was already received in this run")]
    DoubleNotify,
    #[error("notification at step {step} with horizon {horizon} is inconsistent with remaining budget {remaining} at rate {rate}")]
    InconsistentNotify {
        step: usize,
        horizon: usize,
        remaining: f64,
        rate: f64,
    },
    #[error("step {step} is past the known horizon {horizon}")]
    StepAfterHorizon { step: usize, horizon: usize },

    #[error("confidence lambda must lie in [0, 1], got {0}")]
    BadLambda(f64),

    #[error("Lambert W is undefined for x = {0} < -1/e")]
    LambertDomain(f64),
    #[error("fluctuation ratio theta must be >= 1, got {0}")]
    BadTheta(f64),
    #[error("root solver did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("rate {rate} over {horizon} steps cannot place budget {budget}")]
    InfeasibleHorizon { budget: f64, rate: f64, horizon: usize },

    #[error("brute-force oracle too large: {0}")]
    TooLarge(String),

    #[error("cannot parse line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("price {value} on line {line} lies outside [p_min, p_max]")]
    CsvPriceOutOfBounds { line: usize, value: f64 },
    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the filesystem rather than of the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
