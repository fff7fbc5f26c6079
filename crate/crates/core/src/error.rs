use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("channel row {row} sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },

    #[error("silent index {index} out of range for {rows} rows")]
    SilentIndexOutOfRange { index: usize, rows: usize },

    #[error("channel has no message letters besides the silent symbol")]
    EmptyMessageAlphabet,

    #[error("unknown input letter {letter} (alphabet size {alphabet})")]
    UnknownLetter { letter: usize, alphabet: usize },

    #[error("enumeration needs {needed} evaluations, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("channel entry W({y}|{x}) = 0: exponent computation requires full support")]
    NotFullSupport { x: usize, y: usize },

    #[error("rate must be nonnegative, got {0}")]
    NegativeRate(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("type denominator mismatch: joint type has n = {joint}, sequences have n = {sequence}")]
    DenominatorMismatch { joint: usize, sequence: usize },

    #[error("exponent fit needs at least 3 points with positive probabilities, got {0}")]
    InsufficientFitPoints(usize),

    #[error("nonpositive probability {value} at n = {n} in exponent fit input")]
    NonpositiveProbability { n: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
