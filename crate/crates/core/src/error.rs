use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("spectral singularity at eigenvalue {eigenvalue:e}")]
    SpectralSingularity { eigenvalue: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("window overflow: {0}")]
    WindowOverflow(String),
    #[error("matrix is not hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn geometry<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::InvalidGeometry(msg.into()))
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::InvalidArgument(msg.into()))
}
