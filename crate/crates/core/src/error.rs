use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension {requested} exceeds cap {cap}")]
    DimensionCap { requested: usize, cap: usize },

    #[error("operator is not hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resonance condition violated for qubit {qubit}: bias {bias} vs required {required}")]
    Resonance { qubit: usize, bias: f64, required: f64 },

    #[error("rotation is fully degenerate (E_k = 0)")]
    DegenerateRotation,

    #[error("qubit {qubit} is decoupled from the cavity (zero coupling rate)")]
    Decoupled { qubit: usize },

    #[error("pulse out of range at t = {t}: arccos argument {argument}")]
    PulseOutOfRange { t: f64, argument: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("segment {segment}: {source}")]
    Segment {
        segment: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no-reflection constraint unsolvable: receiver amplitude below floor for {span} time units")]
    ConstraintUnsolvable { span: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed or inconsistent input rather than
    /// by a numerical failure.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::DimensionMismatch { .. }
            | Error::DimensionCap { .. }
            | Error::InvalidParameter(_)
            | Error::Resonance { .. }
            | Error::DegenerateRotation
            | Error::Decoupled { .. }
            | Error::PulseOutOfRange { .. }
            | Error::Config(_)
            | Error::Io(_)
            | Error::Json(_) => true,
            Error::Segment { source, .. } => source.is_validation(),
            Error::NotHermitian { .. }
            | Error::NotUnitary { .. }
            | Error::Integration { .. }
            | Error::ConstraintUnsolvable { .. } => false,
        }
    }
}
