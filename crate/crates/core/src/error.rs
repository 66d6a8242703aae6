use thiserror::Error;

pub type Result<T> = std::result::Result<T, KwgError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KwgError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("vacuum: min(1+q) = {min:.6e} <= floor {floor} at t = {t:.6}")]
    Vacuum { min: f64, floor: f64, t: f64 },
    #[error("blow-up guard: |u|_inf = {sup:.6e} exceeds {limit:.6e} at t = {t:.6}")]
    BlowUp { sup: f64, limit: f64, t: f64 },
    #[error("CFL violated: dt = {dt:.6e} > bound {bound:.6e} at t = {t:.6}")]
    Cfl { dt: f64, bound: f64, t: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("sweep member eps = {eps} failed: {source}")]
    SweepMember { eps: f64, source: Box<KwgError> },
}

impl KwgError {
    /// True for failures that signal the run left the small-data regime.
    pub fn is_physics_abort(&self) -> bool {
        match self {
            KwgError::Vacuum { .. } | KwgError::BlowUp { .. } | KwgError::Cfl { .. } => true,
            KwgError::SweepMember { source, .. } => source.is_physics_abort(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for KwgError {
    fn from(e: std::io::Error) -> Self {
        KwgError::Io(e.to_string())
    }
}
