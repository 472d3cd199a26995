use std::io::{BufRead, Write};

use chrono::DateTime;
use serde::Deserialize;

use super::TraceEvent;
use crate::error::{Error, Result};
use crate::model::{Ratio, StageKind, TimeSeconds};
use crate::timeline::{RateTimeline, Segment};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    t_start: Option<f64>,
    t_end: Option<f64>,
    start_time: Option<String>,
    end_time: Option<String>,
    stage: StageKind,
    rate: f64,
    #[serde(default)]
    note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stamp {
    Seconds(f64, f64),
    Nanos(i64, i64),
}

fn parse_datetime(line: usize, field: &str, s: &str) -> Result<i64> {
    DateTime::parse_from_rfc3339(s)
        .ok()
        .and_then(|dt| dt.timestamp_nanos_opt())
        .ok_or_else(|| Error::MalformedLine {
            line,
            reason: format!("`{field}` is not an RFC 3339 timestamp: {s:?}"),
        })
}

fn stamp(line: usize, raw: &RawEvent) -> Result<Stamp> {
    let bad = |reason: &str| Error::MalformedLine {
        line,
        reason: reason.to_string(),
    };
    match (raw.t_start, raw.t_end, &raw.start_time, &raw.end_time) {
        (Some(a), Some(b), None, None) => Ok(Stamp::Seconds(a, b)),
        (None, None, Some(a), Some(b)) => Ok(Stamp::Nanos(
            parse_datetime(line, "start_time", a)?,
            parse_datetime(line, "end_time", b)?,
        )),
        (None, None, None, None) => Err(bad("missing `t_start`/`t_end`")),
        (Some(_), None, ..) | (None, Some(_), ..) => Err(bad("need both `t_start` and `t_end`")),
        (None, None, ..) => Err(bad("need both `start_time` and `end_time`")),
        _ => Err(bad("use either `t_start`/`t_end` or `start_time`/`end_time`, not both")),
    }
}

/// Reads a JSONL trace. Blank lines are skipped. The result is sorted by
/// `t_start` and covers one contiguous interval with no gaps or overlaps.
pub fn parse_trace<R: BufRead>(input: R) -> Result<Vec<TraceEvent>> {
    let mut raw_events = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawEvent = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: line_no,
            reason: e.to_string(),
        })?;
        let stamp = stamp(line_no, &raw)?;
        raw_events.push((line_no, stamp, raw));
    }

    let by_datetime = match raw_events.first() {
        Some((_, Stamp::Nanos(..), _)) => true,
        Some(_) => false,
        None => return Err(Error::UndefinedMetric("trace is empty".into())),
    };
    let origin = raw_events
        .iter()
        .filter_map(|(_, s, _)| match s {
            Stamp::Nanos(a, _) => Some(*a),
            Stamp::Seconds(..) => None,
        })
        .min()
        .unwrap_or(0);

    let mut events = Vec::with_capacity(raw_events.len());
    for (line, stamp, raw) in raw_events {
        let (start, end) = match (stamp, by_datetime) {
            (Stamp::Seconds(a, b), false) => (a, b),
            (Stamp::Nanos(a, b), true) => {
                ((a - origin) as f64 / 1e9, (b - origin) as f64 / 1e9)
            }
            _ => {
                return Err(Error::MalformedLine {
                    line,
                    reason: "trace mixes numeric and wall-clock timestamps".into(),
                })
            }
        };
        events.push((line, build_event(line, start, end, raw.stage, raw.rate, raw.note)?));
    }
    order_and_check(events)
}

fn build_event(
    line: usize,
    start: f64,
    end: f64,
    stage: StageKind,
    rate: f64,
    note: Option<String>,
) -> Result<TraceEvent> {
    let wrap = |e: Error| Error::MalformedLine {
        line,
        reason: e.to_string(),
    };
    let t_start = TimeSeconds::checked("t_start", start).map_err(wrap)?;
    let t_end = TimeSeconds::checked("t_end", end).map_err(wrap)?;
    if end <= start {
        return Err(Error::MalformedLine {
            line,
            reason: format!("t_end ({end}) must be greater than t_start ({start})"),
        });
    }
    let rate_checked = Ratio::checked("rate", rate).map_err(wrap)?;
    if let Some(expected) = stage.fixed_rate() {
        if rate != expected {
            return Err(Error::StageRate {
                line,
                stage: stage.to_string(),
                expected,
                rate,
            });
        }
    }
    Ok(TraceEvent {
        t_start,
        t_end,
        stage,
        rate: rate_checked,
        note,
    })
}

fn order_and_check(mut events: Vec<(usize, TraceEvent)>) -> Result<Vec<TraceEvent>> {
    events.sort_by(|a, b| a.1.t_start.get().total_cmp(&b.1.t_start.get()));
    for pair in events.windows(2) {
        let (prev, next) = (&pair[0].1, &pair[1].1);
        let (end, start) = (prev.t_end.get(), next.t_start.get());
        if start > end {
            return Err(Error::Gap { start: end, end: start });
        }
        if start < end {
            return Err(Error::Overlap {
                first_start: prev.t_start.get(),
                first_end: end,
                second_start: start,
                second_end: next.t_end.get(),
            });
        }
    }
    Ok(events.into_iter().map(|(_, e)| e).collect())
}

/// Applies the parser's checks to events built in memory.
pub fn validate_events(events: Vec<TraceEvent>) -> Result<Vec<TraceEvent>> {
    if events.is_empty() {
        return Err(Error::UndefinedMetric("trace is empty".into()));
    }
    let checked = events
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            build_event(i + 1, e.t_start.get(), e.t_end.get(), e.stage, e.rate.get(), e.note)
                .map(|ev| (i + 1, ev))
        })
        .collect::<Result<Vec<_>>>()?;
    order_and_check(checked)
}

/// One segment per event, durations `t_end - t_start`.
pub fn trace_to_timeline(events: &[TraceEvent]) -> Result<RateTimeline> {
    let segments = events
        .iter()
        .map(|e| Segment::new(e.duration(), e.rate.get(), e.stage))
        .collect::<Result<Vec<_>>>()?;
    RateTimeline::new(segments)
}

pub fn write_jsonl<W: Write>(events: &[TraceEvent], mut out: W) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
