use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("grid does not resolve the geometry: {0}")]
    GridMismatch(String),

    #[error("under-resolved film: {0}")]
    UnderResolved(String),

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    NotConverged { residual: f64, tolerance: f64 },

    #[error("nonphysical capacitance matrix: |kappa| = {0} >= 1")]
    NonPhysicalCoupling(f64),

    #[error("position ({x}, {y}) um is outside the chip")]
    OutOfBounds { x: f64, y: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("field file error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::OutOfBounds { .. } | Error::InvalidGeometry(_) => 2,
            Error::Fit(_) => 4,
            _ => 3,
        }
    }
}
