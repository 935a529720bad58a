use alloc::string::String;

/// Errors raised by the core operators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("field kind mismatch: {0}")]
    KindMismatch(String),
    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("size mismatch: header implies {expected} payload bytes, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("empty evaluation mask")]
    EmptyMask,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error(
        "target SSIM {target} not bracketable: SSIM ranges from {ssim_at_zero} (theta=0) to {ssim_at_max} (theta={theta_max})"
    )]
    NotBracketable {
        target: f64,
        theta_max: f64,
        ssim_at_zero: f64,
        ssim_at_max: f64,
    },
    #[error("ragged tables: {0}")]
    Ragged(String),
    #[error("jpeg codec: {0}")]
    Jpeg(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn check_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            left_width: a.0,
            left_height: a.1,
            right_width: b.0,
            right_height: b.1,
        })
    }
}
