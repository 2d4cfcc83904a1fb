use thiserror::Error;

/// Errors produced by majorant evaluation and its supporting machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value {value} at ({x1}, {x2}) while evaluating {what}")]
    Evaluation {
        what: String,
        x1: f64,
        x2: f64,
        value: f64,
    },

    #[error("unsupported representation: {0}")]
    UnsupportedRepresentation(String),

    #[error(
        "flux is not equilibrated: ‖div‖+ = {div_plus:.3e}, ‖div‖- = {div_minus:.3e}, \
         ‖λ - [q·n]‖ = {jump:.3e} (use the M majorant for general fluxes)"
    )]
    NotEquilibrated {
        div_plus: f64,
        div_minus: f64,
        jump: f64,
    },

    #[error(
        "approximation is not admissible: min(v - ψ) on M = {min_gap:.3e}, \
         max |v - φ| on the Dirichlet boundary = {boundary_mismatch:.3e}"
    )]
    Inadmissible {
        min_gap: f64,
        boundary_mismatch: f64,
    },

    #[error("multiplier is negative ({value:.3e}) at x1 = {x1}")]
    NegativeMultiplier { x1: f64, value: f64 },

    #[error("incomplete constants: missing {}", .0.join(", "))]
    IncompleteConstants(Vec<String>),

    #[error(
        "zero-mean condition violated: ∫div q over Ω+ = {mean_div_plus:.3e}, \
         over Ω- = {mean_div_minus:.3e}, ∫(λ - [q·n]) over M = {mean_jump:.3e}"
    )]
    ConditionViolation {
        mean_div_plus: f64,
        mean_div_minus: f64,
        mean_jump: f64,
    },

    #[error("internal defect: {0}")]
    InternalDefect(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
