use thiserror::Error;

/// Errors raised by the simulator, the diagnostics and the command-line layer.
#[derive(Debug, Error)]
pub enum Error {
    /// A constitutive function was evaluated outside its domain.
    #[error("{what} is undefined at s = {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("regularization parameter delta = {0} must lie in (0, 1/2)")]
    InvalidDelta(f64),

    #[error("mobility vanishes at s = {at}; regularize it before building an entropy")]
    DegenerateMobility { at: f64 },

    #[error("{what} did not converge: {iterations} iterations, residual {residual:e}")]
    SolverDiverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("blow-up detected at t = {t}: {detail}")]
    BlowUp { t: f64, detail: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("quadrature under-resolved: two-level difference {difference:e} exceeds {threshold:e}")]
    QuadratureUnderResolved { difference: f64, threshold: f64 },

    #[error("step size underflow at t = {t} (h = {h:e}); reduce the mode count or use an implicit integrator")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("constraint violated ({assumption}): {message}")]
    Constraint { assumption: &'static str, message: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error("at t = {t}: {source}")]
    At {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at(self, t: f64) -> Error {
        match self {
            e @ Error::At { .. } => e,
            e => Error::At { t, source: Box::new(e) },
        }
    }

    /// The innermost error, stripping time stamps.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for failures of the numerical method rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::Domain { .. }
                | Error::SolverDiverged { .. }
                | Error::BlowUp { .. }
                | Error::QuadratureUnderResolved { .. }
                | Error::StepSizeUnderflow { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
