use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Both Rabi frequencies vanish, so the mixing angle is undefined.
    #[error("degenerate field at t = {t}: no pulse is on")]
    DegenerateField { t: f64 },

    #[error("integrator step size underflow at t = {t} (h = {h:e})")]
    StepFailure { t: f64, h: f64 },

    #[error("quadrature did not reach {target:e} within {evaluations} evaluations (estimate {estimate:e})")]
    QuadratureFailure {
        target: f64,
        estimate: f64,
        evaluations: usize,
    },

    /// A closed-form result was requested outside its domain; `equation`
    /// names the violated assumption.
    #[error("precondition violated ({equation}): {detail}")]
    PreconditionViolated { equation: &'static str, detail: String },

    #[error("dark-state amplitude depleted (|C_d| = {magnitude:e})")]
    DarkDepleted { magnitude: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unknown preset '{0}' (expected fig2, fig3 or fig4)")]
    UnknownPreset(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
