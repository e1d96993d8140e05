use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("operator acts on {expected} qubit(s) but {actual} target(s) were given")]
    ArityMismatch { expected: usize, actual: usize },

    #[error("a Kraus set can only be applied to a density matrix")]
    KrausOnPureState,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{name} must lie in [{min}, {max}], got {value}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("matrix is not unitary (max |U†U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("Kraus set is not trace preserving (max |ΣK†K - I| = {0:e})")]
    NotTracePreserving(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("partial trace must keep at least one subsystem")]
    EmptyKeep,

    #[error("measurement must leave at least one subsystem unmeasured")]
    NothingLeft,

    #[error("unknown measurement basis `{0}`")]
    UnknownBasis(String),

    #[error("basis {0} is not supported by this operation")]
    UnsupportedBasis(String),

    #[error("probability pair ({0}, {1}) does not sum to 1")]
    UnnormalizedProbabilities(f64, f64),

    #[error("no counts recorded in the {0} basis")]
    EmptyBasis(String),

    #[error("number of events must be at least 1")]
    NoEvents,

    #[error("input list is empty")]
    EmptyInput,
}

impl Error {
    pub(crate) fn check_range(name: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
        if value.is_finite() && (min..=max).contains(&value) {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                name,
                value,
                min,
                max,
            })
        }
    }

    pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
        Self::check_range(name, value, 0.0, 1.0)
    }
}
