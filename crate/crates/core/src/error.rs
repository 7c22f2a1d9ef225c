use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("problem kind {kind} is incompatible with the mesh: {reason}")]
    IncompatibleKind { kind: String, reason: String },

    #[error("invalid support: {0}")]
    InvalidSupport(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Transplant guard `|t| * ||psi||_C2 < 1/2` violated.
    #[error("amplitude too large: |t|*||psi|| = {product:.6} (must stay below 1/2)")]
    AmplitudeTooLarge { product: f64 },

    #[error("mesh folded: triangle {triangle} has signed area {area:e} after transplant")]
    MeshFolded { triangle: usize, area: f64 },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("eigen-tracking failure at t = {t:e}: {reason}")]
    TrackingFailure { t: f64, reason: String },

    #[error("quantity is undefined for a simple eigenvalue (m = 1)")]
    UndefinedForSimple,

    #[error("invalid case: {0}")]
    InvalidCase(String),

    #[error("no splitting candidate found (best score {best_score:e})")]
    NoCandidateFound { best_score: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("non-finite value in output: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
