use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFiniteValue,
    #[error("scale must be finite and nonnegative, got {0}")]
    InvalidScale(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grids do not share identical evaluation points")]
    GridMismatch,
    #[error("quadrature stalled at error {achieved:e} above tolerance {tol:e}")]
    Quadrature { tol: f64, achieved: f64 },
    #[error("split level {level} exceeds the supported maximum {max}")]
    LevelTooLarge { level: u32, max: u32 },
    #[error(
        "integrand fails to decay near zero (fitted exponent {exponent:.3}, need > 1); \
         input is not close to a fixed point"
    )]
    Divergent { exponent: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
