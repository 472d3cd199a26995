use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::periods::split_periods;
use super::{trace_to_timeline, TraceEvent};
use crate::error::Result;
use crate::model::{FailureClass, StageKind};
use crate::num::RunningMean;
use crate::timeline::{self, RateTimeline, StageTotals};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MtbfEstimate {
    pub fail_stop_mtbf: Option<f64>,
    pub fail_slow_mtbf: Option<f64>,
}

pub(crate) fn mtbf_of_timeline(tl: &RateTimeline) -> (MtbfEstimate, PeriodCounts) {
    let split = split_periods(tl);
    let mean_of = |class| {
        let mut m = RunningMean::default();
        split.complete_of(class).for_each(|p| m.push(p.mtbf()));
        m
    };
    let stop = mean_of(FailureClass::FailStop);
    let slow = mean_of(FailureClass::FailSlow);
    (
        MtbfEstimate {
            fail_stop_mtbf: stop.mean(),
            fail_slow_mtbf: slow.mean(),
        },
        PeriodCounts {
            fail_stop: stop.count(),
            fail_slow: slow.count(),
            leading_partial: split.leading.is_some(),
            trailing_partial: split.trailing.is_some(),
        },
    )
}

/// Mean MTBF stage sum over complete periods of each class; absent when a
/// class has no complete period.
pub fn estimate_mtbf(events: &[TraceEvent]) -> Result<MtbfEstimate> {
    Ok(mtbf_of_timeline(&trace_to_timeline(events)?).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PeriodCounts {
    pub fail_stop: u64,
    pub fail_slow: u64,
    pub leading_partial: bool,
    pub trailing_partial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub schema_version: u32,
    pub events: usize,
    pub observed_time: f64,
    pub optimal_time: f64,
    pub tor: f64,
    #[serde(flatten)]
    pub mtbf: MtbfEstimate,
    pub periods: PeriodCounts,
    pub stage_breakdown: BTreeMap<StageKind, StageTotals>,
}

pub fn report(events: &[TraceEvent]) -> Result<TraceReport> {
    let tl = trace_to_timeline(events)?;
    let (mtbf, periods) = mtbf_of_timeline(&tl);
    Ok(TraceReport {
        schema_version: REPORT_SCHEMA_VERSION,
        events: events.len(),
        observed_time: timeline::observed_time(&tl).get(),
        optimal_time: timeline::integrate_optimal_time(&tl).get(),
        tor: timeline::tor_of_timeline(&tl).get(),
        mtbf,
        periods,
        stage_breakdown: timeline::stage_breakdown(&tl),
    })
}
