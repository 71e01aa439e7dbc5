use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("non-finite value passed as `{0}`")]
    NonFinite(&'static str),

    #[error("Arrhenius rate requires a positive temperature, got {0}")]
    NonPositiveTemperature(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("ghost width {have} is smaller than the {need} layers the stencil needs")]
    GhostWidth { have: usize, need: usize },

    #[error("non-finite {quantity} at cell ({i}, {j}){}", step.map(|s| format!(" in step {s}")).unwrap_or_default())]
    Divergence {
        quantity: &'static str,
        i: usize,
        j: usize,
        step: Option<u64>,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("configuration error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("{have} samples in the fit window, at least {need} required")]
    InsufficientSamples { have: usize, need: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// True for errors raised while stepping a simulation (as opposed to
    /// configuration problems). The CLI maps these to a distinct exit code.
    pub fn is_runtime_divergence(&self) -> bool {
        matches!(self, Error::Divergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
