use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input shape: {0}")]
    InputShape(String),

    #[error("partition enumeration refused for n = {n} (guard is {guard})")]
    EnumerationGuard { n: usize, guard: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid mixture component {index}: {reason}")]
    InvalidComponent { index: usize, reason: String },

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error(
        "quadrature did not reach tolerance within {panels} panels \
         (component {component}: best estimate {best:e}, error estimate {error_estimate:e})"
    )]
    Quadrature {
        component: usize,
        best: f64,
        error_estimate: f64,
        panels: usize,
    },

    #[error("evaluation failed at derivative order {order}: {source}")]
    Evaluation {
        order: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("function evaluation failed at t = {t}: {message}")]
    Sample { t: f64, message: String },

    #[error("t = {t} is outside the trusted region [{lo}, {hi}] of the fitted curve")]
    OutsideTrustedRegion { t: f64, lo: f64, hi: f64 },

    #[error("accuracy failure: {0}")]
    Accuracy(String),

    #[error("identity mismatch at t = {t}, m = {m}: |{lhs:e} - {rhs:e}| > {tolerance:e}")]
    IdentityMismatch {
        t: f64,
        m: usize,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
