use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("ellipticity violation at site {site}: eigenvalues ({min}, {max})")]
    Ellipticity { site: usize, min: f64, max: f64 },

    #[error("numerical failure in {stage}: {detail}")]
    Numerical { stage: &'static str, detail: String },

    #[error("quadrature under-resolved: self-difference {self_difference:e} above {tolerance:e} after {nodes} nodes")]
    Accuracy {
        self_difference: f64,
        tolerance: f64,
        nodes: usize,
    },

    #[error("inequality `{name}` violated: worst margin {margin:e}")]
    InequalityViolation { name: String, margin: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("property `{quantity}` violated at step {step}: value {value:e}, allowed {allowed:e}")]
    PropertyViolation {
        step: usize,
        quantity: &'static str,
        value: f64,
        allowed: f64,
    },

    #[error("comparison error: {0}")]
    Comparison(String),

    #[error("{module}: {source}")]
    Module {
        module: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numerical(stage: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            stage,
            detail: detail.into(),
        }
    }

    /// Tags an error with the module it came from.
    pub fn in_module(self, module: &'static str) -> Self {
        match self {
            e @ Error::Module { .. } => e,
            e => Error::Module {
                module,
                source: Box::new(e),
            },
        }
    }

    /// True when the error stems from bad input rather than a failed check.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::Precondition(_) => true,
            Error::Module { source, .. } => source.is_config(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
