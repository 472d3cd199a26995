//! Observed event logs: parsing, r(t) reconstruction and empirical metrics.
//!
//! A trace is JSON Lines, one pre-classified interval per line:
//!
//! ```text
//! {"t_start": 0.0, "t_end": 90.0, "stage": "HealthyRun", "rate": 1.0}
//! {"t_start": 90.0, "t_end": 93.0, "stage": "CheckpointSave", "rate": 0.0, "note": "ckpt 7"}
//! ```
//!
//! Instead of `t_start`/`t_end` (seconds since trace start) an event may carry
//! RFC 3339 `start_time`/`end_time`; those are normalised to seconds since the
//! earliest start. A trace must use one style throughout.

mod parse;
mod periods;
mod report;

use serde::{Deserialize, Serialize};

use crate::model::{Ratio, StageKind, TimeSeconds};

pub use parse::{parse_trace, trace_to_timeline, validate_events, write_jsonl};
pub use periods::{split_periods, PeriodSplit, RealizedPeriod, StageSums};
pub use report::{estimate_mtbf, report, MtbfEstimate, PeriodCounts, TraceReport, REPORT_SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub t_start: TimeSeconds,
    pub t_end: TimeSeconds,
    pub stage: StageKind,
    pub rate: Ratio,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TraceEvent {
    pub fn duration(&self) -> f64 {
        self.t_end.get() - self.t_start.get()
    }
}
