use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid of {n_theta} points cannot resolve {t_max} kicks; at least {required} points are required")]
    GridTooSmall {
        n_theta: usize,
        t_max: usize,
        required: usize,
    },

    #[error("degenerate state: amplitudes vanished{}", fmt_step(*.step))]
    DegenerateState { step: Option<usize> },

    #[error("non-finite norm{}", fmt_step(*.step))]
    NonFinite { step: Option<usize> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

fn fmt_step(step: Option<usize>) -> String {
    match step {
        Some(k) => format!(" at step {k}"),
        None => String::new(),
    }
}

impl Error {
    /// Attach the kick index to a numerical fault raised without one.
    pub fn at_step(self, k: usize) -> Self {
        match self {
            Error::DegenerateState { step: None } => Error::DegenerateState { step: Some(k) },
            Error::NonFinite { step: None } => Error::NonFinite { step: Some(k) },
            other => other,
        }
    }

    /// True for faults of the evolution/rescaling protocol rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::DegenerateState { .. } | Error::NonFinite { .. })
    }
}
