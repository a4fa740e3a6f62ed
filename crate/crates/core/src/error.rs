//! Shared error type for every module in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A single-constituent system has no internal coordinate to separate.
    #[error("system with one constituent has no relative coordinate")]
    NoRelativeSystem,

    /// Coordinate transform matrix is singular or produced a non-positive mass.
    #[error("degenerate coordinate transform: {detail}")]
    DegenerateTransform { detail: String },

    /// Radial arguments must be strictly positive.
    #[error("non-positive distance {value}")]
    NonPositiveDistance { value: f64 },

    /// Electron count does not fill an integer number of shells.
    #[error("z = {z} is not a closed-shell count (nearest are {below} and {above})")]
    NotClosedShell { z: u32, below: u32, above: u32 },

    /// A tabulated coefficient left the exactly-representable integer range.
    #[error("coefficient overflow in {context}")]
    Overflow { context: &'static str },

    /// Adaptive integration stalled above the requested tolerance.
    #[error("quadrature did not converge: estimate {estimate}, residual {residual} > {tolerance}")]
    QuadratureNonConvergence {
        estimate: f64,
        residual: f64,
        tolerance: f64,
    },

    /// Pure and density operands cannot be combined directly.
    #[error("state kind mismatch: {detail}")]
    KindMismatch { detail: String },

    #[error("unknown subsystem label '{label}'")]
    UnknownLabel { label: String },

    #[error("duplicate subsystem label '{label}'")]
    DuplicateLabel { label: String },

    #[error("dimension mismatch: {detail}")]
    DimensionMismatch { detail: String },

    /// Supplied record states fail the orthonormality check.
    #[error("basis not orthonormal: worst deviation {deviation}")]
    NonOrthonormalBasis { deviation: f64 },

    /// Initial packet resolved by fewer grid points than the sampling floor.
    #[error(
        "grid too coarse: packet width spans {points_per_width:.2} points, need at least {floor}"
    )]
    GridTooCoarse { points_per_width: f64, floor: f64 },

    /// Propagation lost or gained norm beyond the unitarity budget.
    #[error("norm drifted by {drift:e} at step {step}")]
    NormDrift { step: usize, drift: f64 },

    #[error("invalid input: {detail}")]
    InvalidInput { detail: String },
}

impl Error {
    /// Stable machine-readable tag, used by the command-line error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NoRelativeSystem => "no_relative_system",
            Error::DegenerateTransform { .. } => "degenerate_transform",
            Error::NonPositiveDistance { .. } => "non_positive_distance",
            Error::NotClosedShell { .. } => "not_closed_shell",
            Error::Overflow { .. } => "overflow",
            Error::QuadratureNonConvergence { .. } => "quadrature_non_convergence",
            Error::KindMismatch { .. } => "kind_mismatch",
            Error::UnknownLabel { .. } => "unknown_label",
            Error::DuplicateLabel { .. } => "duplicate_label",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonOrthonormalBasis { .. } => "non_orthonormal_basis",
            Error::GridTooCoarse { .. } => "grid_too_coarse",
            Error::NormDrift { .. } => "norm_drift",
            Error::InvalidInput { .. } => "invalid_input",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
