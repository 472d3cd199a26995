use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("training overhead ratio is undefined: {0}")]
    UndefinedMetric(String),

    #[error(
        "simulation diverged: no contributed work across {stalled_periods} consecutive failure periods \
         (t = {elapsed:.3} s, committed work = {committed_work})"
    )]
    Diverged {
        stalled_periods: u64,
        elapsed: f64,
        committed_work: f64,
    },

    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("trace gap: interval [{start}, {end}) is not covered by any event")]
    Gap { start: f64, end: f64 },

    #[error("trace overlap: event [{first_start}, {first_end}) overlaps [{second_start}, {second_end})")]
    Overlap {
        first_start: f64,
        first_end: f64,
        second_start: f64,
        second_end: f64,
    },

    #[error("line {line}: stage {stage} must have rate {expected}, got {rate}")]
    StageRate {
        line: usize,
        stage: String,
        expected: f64,
        rate: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown {kind} `{name}` (registered: {registered})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        registered: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input (configs, traces, arguments).
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Diverged { .. } | Error::Io(_))
    }
}
