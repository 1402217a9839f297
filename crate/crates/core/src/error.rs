use thiserror::Error;

use crate::stransform::ChannelIndex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field must have at least one pixel (got {width}x{height})")]
    EmptyField { width: usize, height: usize },

    #[error("value count {got} does not match {width}x{height}")]
    ValueCount {
        width: usize,
        height: usize,
        got: usize,
    },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("degenerate window: k*f^b + c = 0 at f = {frequency}{}", channel.map(|c| format!(" (channel {c})")).unwrap_or_default())]
    DegenerateWindow {
        frequency: f64,
        channel: Option<ChannelIndex>,
    },

    #[error("invalid channel (p={p}, n={n}) for N={rotations}")]
    InvalidChannel { p: usize, n: usize, rotations: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("scattering maps are incompatible: {0}")]
    IncompatibleMaps(String),

    #[error("field is not binary: value {value} at index {index}")]
    NonBinary { index: usize, value: f64 },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("training data contains a single class")]
    SingleClass,

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
