use thiserror::Error;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("load error: {0}")]
    Load(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("constant column(s): {}", .0.join(", "))]
    ConstantColumns(Vec<String>),

    /// `row` is the 0-based data row; the message counts from 1.
    #[error("non-positive price {value} in column `{column}` at data row {}", .row + 1)]
    NonPositivePrice {
        column: String,
        row: usize,
        value: f64,
    },

    #[error("rank-deficient design; collinear column(s): {}", .0.join(", "))]
    RankDeficient(Vec<String>),

    #[error("too few observations: {n_obs} rows for {n_params} parameters")]
    TooFewObservations { n_obs: usize, n_params: usize },

    #[error("regression for variable `{variable}` failed: {source}")]
    Regression {
        variable: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{measure} did not converge after {iterations} iterations")]
    NonConvergence { measure: String, iterations: usize },

    #[error("singular system in {0}")]
    Singular(String),

    #[error("coincident centroids for clusters {0} and {1}")]
    CoincidentCentroids(usize, usize),

    #[error("{0} out of range")]
    OutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
