use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The CSV header is missing or lacks a required column.
    #[error("malformed CSV header: {0}")]
    Format(String),

    /// A data row could not be accepted. `line` is the 1-based line in the file.
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },

    #[error("insufficient data: {found} valid rows, at least {required} required")]
    InsufficientData { found: usize, required: usize },

    #[error("fetch failed with HTTP status {status}")]
    Fetch { status: u16 },

    #[error("transport error: {0}")]
    Transport(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// The cycle has no downturn (`p_pre == p_event`).
    #[error("degenerate cycle: pre-event and event LoP are equal ({p_pre})")]
    DegenerateCycle { p_pre: f64 },

    /// The failure slope is zero, so rebuilding is undefined.
    #[error("zero failure slope: no downturn between t_pre={t_pre} and t_event={t_event}")]
    ZeroFailureSlope { t_pre: usize, t_event: usize },

    #[error("insufficient tail: {0}")]
    InsufficientTail(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn row(line: usize, message: impl Into<String>) -> Self {
        Error::Row {
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by the input data rather than by usage or a bug.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Format(_)
                | Error::Row { .. }
                | Error::InsufficientData { .. }
                | Error::Fetch { .. }
                | Error::Transport(_)
                | Error::DegenerateCycle { .. }
                | Error::ZeroFailureSlope { .. }
                | Error::InsufficientTail(_)
                | Error::Csv(_)
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}
