use std::io;

use thiserror::Error;

/// Errors produced by the buckling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An input parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A mesh failed validation or could not be parsed.
    #[error("mesh error: {0}")]
    Mesh(String),

    /// The constrained system could not be assembled into a solvable form.
    #[error("assembly error: {0}")]
    Assembly(String),

    /// Cholesky hit a non-positive pivot.
    #[error("matrix is not positive definite (pivot {pivot})")]
    IndefiniteMatrix { pivot: usize },

    /// An iterative method stopped before reaching its tolerance.
    #[error("no convergence after {iterations} iterations (best residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    /// The geometric operator has no direction of positive energy.
    #[error("pencil has no buckling mode: geometric operator has no positive direction")]
    NoBucklingMode,

    /// A vector that must be normalized carries zero energy.
    #[error("degenerate vector: energy {0:.3e} is not positive")]
    DegenerateVector(f64),

    /// The dual problem needs a strictly richer space than the primal one.
    #[error("enrichment must be strictly richer than the primal space")]
    Enrichment,

    /// True error is zero, so an effectivity index cannot be formed.
    #[error("effectivity undefined: computed and reference values coincide")]
    UndefinedEffectivity,

    /// Config file syntax error.
    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    /// Required config keys are absent.
    #[error("missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),

    /// Config file parsed but failed validation.
    #[error("config field `{field}`: {message}")]
    ConfigValue { field: String, message: String },

    /// Field and mesh sizes disagree.
    #[error("length mismatch for `{name}`: expected {expected}, got {actual}")]
    LengthMismatch {
        name: String,
        expected: usize,
        actual: usize,
    },

    /// Failure inside an adaptive step; wraps the underlying error.
    #[error("adaptive step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by user input rather than by a numerical failure.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::Parameter { .. }
            | Error::ConfigParse { .. }
            | Error::ConfigValue { .. }
            | Error::MissingKeys(_)
            | Error::Mesh(_) => true,
            Error::Step { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
