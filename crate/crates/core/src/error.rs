use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A distribution or mixture description violates its constraints.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// A Stieltjes transform was requested at a point of the support.
    #[error("point {re}{im:+}i lies on the support of {what}")]
    OnSupport { re: f64, im: f64, what: String },

    /// Moment-based operations on a law without finite moments.
    #[error("{0} has no finite moments")]
    NoFiniteMoments(String),

    /// A moment table does not contain an entry the formula needs.
    #[error("moment table is missing E(Y1^{i} Y2^{j})")]
    MissingMoment { i: usize, j: usize },

    /// The double Stieltjes integral does not exist for the given laws.
    #[error("integral diverges: {0}")]
    Divergent(String),

    /// A quadrature did not reach the requested tolerance.
    #[error("quadrature failed to converge (error estimate {error:e})")]
    NotConverged { error: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error(transparent)]
    Parse(#[from] crate::grammar::ParseError),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
