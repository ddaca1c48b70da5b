//! Error type shared by every module in this crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A constructor argument or configuration value is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A matrix failed a structural requirement (symmetry, positive
    /// definiteness).
    #[error("matrix error: {0}")]
    Matrix(String),
    /// Training hit a non-finite loss.
    #[error("training diverged at epoch {epoch}, sample {sample}: non-finite loss")]
    Diverged { epoch: usize, sample: usize },
    /// An image contained no ink above the threshold.
    #[error("empty image: {0}")]
    EmptyImage(String),
    /// A projected polyline edge collapsed to zero length.
    #[error("degenerate view: {0}")]
    DegenerateView(String),
    /// An operation ran against an invalid state (e.g. an empty prototype
    /// set).
    #[error("invalid state: {0}")]
    State(String),
}
