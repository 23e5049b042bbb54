use thiserror::Error;

use crate::measurement::Setting;

/// Failures raised by constructors and operations in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector is not unit-norm (squared norm {norm_sqr})")]
    Normalization { norm_sqr: f64 },

    #[error("operator is not hermitian (max deviation {deviation:e})")]
    Hermiticity { deviation: f64 },

    #[error("basis is not orthonormal (Gram deviation {deviation:e})")]
    Orthonormality { deviation: f64 },

    #[error("not a valid density operator (trace deviation {trace_deviation:e}, min eigenvalue {min_eigenvalue:e}, hermiticity deviation {hermiticity_deviation:e})")]
    InvalidDensity {
        trace_deviation: f64,
        min_eigenvalue: f64,
        hermiticity_deviation: f64,
    },

    #[error("not a probability distribution: {reason}")]
    Distribution { reason: &'static str },

    #[error("mixture weights are invalid (sum {sum}, min {min})")]
    Weight { sum: f64, min: f64 },

    #[error("measurement for setting {setting} must be a product measurement")]
    ProductRequired { setting: Setting },

    #[error("measurement tagged {tag} was supplied in the {setting} slot")]
    TagMismatch { setting: Setting, tag: Setting },

    #[error("local observables are inconsistent across settings (deviation {deviation:e})")]
    LocalMismatch { deviation: f64 },

    #[error("outcome labels must be +1/-1 (setting {setting}, label {label})")]
    Label { setting: Setting, label: f64 },

    #[error("value {value} is outside [-1, 1]")]
    Domain { value: f64 },

    #[error("parameter {value} is not finite")]
    Parameter { value: f64 },

    #[error("tolerance must be positive and finite, got {value}")]
    Tolerance { value: f64 },

    #[error("synthesis did not reach tolerance (best residual {best_residual:e})")]
    Synthesis { best_residual: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
