use thiserror::Error;

/// Errors produced by the solver and its building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "quadrature with {nodes} nodes cannot resolve {modes} modes (need at least {required})"
    )]
    Resolution {
        modes: usize,
        nodes: usize,
        required: usize,
    },

    #[error("{model}: derivative undefined at r = {r} (outside (0, 1))")]
    Domain { model: &'static str, r: f64 },

    #[error(
        "concentration left [{delta}, 1 - {delta}] at t = {t} (range [{min}, {max}]); \
         use model = regularized_log for states near the pure phases"
    )]
    SingularGuard {
        t: f64,
        min: f64,
        max: f64,
        delta: f64,
    },

    #[error("implicit step at t = {t} did not converge after {iterations} Newton iterations (residual {residual:e})")]
    NewtonDivergence {
        t: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("free-energy model has no declared growth bounds")]
    MissingGrowthBounds,

    #[error("invalid expression `{source_text}`: {message}")]
    Expression {
        source_text: String,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
