use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NtcError {
    #[error("unknown model tag `{0}`")]
    UnknownModel(String),
    #[error("energy {0} is a critical value or not finite")]
    CriticalEnergy(f64),
    #[error("degenerate direction: {0}")]
    DegenerateDirection(String),
    #[error("invalid direction: {0}")]
    InvalidDirection(String),
    #[error("path does not close: residual {0:e}")]
    NotClosed(f64),
    #[error("point lies on the polyline (distance {0:e})")]
    OnBoundary(f64),
    #[error("expected 4 critical points, found {0}")]
    UnexpectedCount(usize),
    #[error("step limit reached after {steps} steps (arclength {arclength:.3})")]
    StepLimit { steps: usize, arclength: f64 },
    #[error("lost the surface: {0}")]
    LostSurface(String),
    #[error("orbit entered the capture radius of a critical point")]
    NearSaddle,
    #[error("no handle core clears the level {0}")]
    NoCore(f64),
    #[error("handle core meets the projected loop")]
    CoreOnLoop,
    #[error("no cylinder of closed orbits at this base")]
    NoCylinder,
    #[error("too few points for a fit: {0}")]
    TooFewPoints(usize),
    #[error("checkpoint header mismatch: {0}")]
    ResumeMismatch(String),
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for NtcError {
    fn from(e: std::io::Error) -> Self {
        NtcError::Io(e.to_string())
    }
}
