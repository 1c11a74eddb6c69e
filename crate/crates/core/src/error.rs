use thiserror::Error;

/// Errors raised while building or evaluating measurement scenarios.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("not Hermitian: ‖M − M†‖_F = {0:e}")]
    NotHermitian(f64),

    #[error("not positive semidefinite: minimum eigenvalue {0:e}")]
    NotPsd(f64),

    #[error("trace is {0} (expected 1)")]
    InvalidTrace(f64),

    #[error("POVM elements do not sum to identity: residual {0:e}")]
    Incomplete(f64),

    #[error("duplicate POVM label {0}")]
    DuplicateLabel(String),

    #[error("invalid priors: {0}")]
    InvalidPriors(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid probability table: {0}")]
    InvalidDistribution(String),

    #[error("axis sets overlap on axis {0}")]
    OverlappingAxes(usize),

    #[error("invalid axis selection: {0}")]
    InvalidAxes(String),

    #[error("conditioning slice has zero probability")]
    ZeroProbabilitySlice,

    #[error("probability has imaginary residue {0:e}")]
    ComplexProbability(f64),

    #[error("Φ `{name}` evaluated to {value} at {arg}")]
    PhiEvaluation { name: String, arg: f64, value: f64 },

    #[error("Φ `{name}` is not convex: midpoint violation {violation:e} between {x} and {y}")]
    NonConvexPhi {
        name: String,
        x: f64,
        y: f64,
        violation: f64,
    },

    #[error("outcome table too large: {0} entries")]
    TableTooLarge(usize),

    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),

    #[error("random POVM normalizer stayed degenerate after {0} attempts")]
    DegeneratePovm(usize),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Prefixes the error with a location such as a field path or a scenario seed.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
