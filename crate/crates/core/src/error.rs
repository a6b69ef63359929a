use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    DimensionMismatch(String),

    #[error("radius {radius} is not below the Nyquist band radius {nyquist}")]
    Aliasing { radius: f64, nyquist: f64 },

    #[error("scale {k} outside the available range [{min}, {max}]")]
    ScaleOutOfRange { k: i32, min: i32, max: i32 },

    #[error("dyadic corners are not grid points: {0}")]
    GridIncompatible(String),

    #[error("band condition violated at scale {k}: spectrum is not supported in |xi| <= {radius}")]
    BandViolation { k: i32, radius: f64 },

    #[error("invalid exponents: {0}")]
    InvalidExponents(String),

    #[error("multiplier family has no entries")]
    EmptyFamily,

    #[error("multiplier family has no symbol for populated scale {0}")]
    MissingScale(i32),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
