use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chain length must be at least 2, got {0}")]
    ChainTooShort(usize),
    #[error("chain length {0} exceeds the supported maximum of {max}", max = crate::state::MAX_SITES)]
    ChainTooLong(usize),
    #[error("amplitude array has length {got}, expected 2^{n_sites} = {expected}")]
    AmplitudeLength {
        n_sites: usize,
        expected: usize,
        got: usize,
    },
    #[error("state dimension mismatch: {left} sites vs {right} sites")]
    DimensionMismatch { left: usize, right: usize },
    #[error("site {site} out of range for a chain of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("duplicate site {0} in Pauli string")]
    DuplicateSite(usize),
    #[error("exact trace requested for L = {n_sites}, above the cap L = {cap}")]
    ExactTraceCap { n_sites: usize, cap: usize },
    #[error("singular input: {0}")]
    SingularInput(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient data: {got} points in fit window, need at least {needed}")]
    InsufficientData { needed: usize, got: usize },
    #[error("time {t} beyond series range 0..={t_max}")]
    TimeOutOfRange { t: usize, t_max: usize },
    #[error("cannot parse observable `{0}`")]
    ObservableParse(String),
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
