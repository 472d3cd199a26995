//! Piecewise-constant r(t) timelines and the exact algebra over them.
//!
//! Every closed-form TOR in this crate is checked against the functions here:
//! integrating a piecewise-constant rate is an exact weighted sum, so a
//! timeline built stage by stage is the brute-force oracle for the formulas.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Ratio, StageKind, TimeSeconds};
use crate::num::{compensated_sum, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: TimeSeconds,
    pub rate: Ratio,
    pub stage: StageKind,
}

impl Segment {
    pub fn new(duration: f64, rate: f64, stage: StageKind) -> Result<Self> {
        Ok(Segment {
            duration: TimeSeconds::checked("duration", duration)?,
            rate: Ratio::checked("rate", rate)?,
            stage,
        })
    }

    /// Time-equivalent of optimal work done in this segment.
    pub fn optimal_time(&self) -> f64 {
        self.duration.get() * self.rate.get()
    }

    pub fn lost_time(&self) -> f64 {
        self.duration.get() * (1.0 - self.rate.get())
    }
}

#[derive(Debug, Deserialize)]
struct RawTimeline {
    segments: Vec<Segment>,
}

/// Ordered, contiguous segments; start times are the running sum of durations.
///
/// Zero-length segments are dropped on construction and an empty timeline is
/// rejected, so every `RateTimeline` has positive observed time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTimeline")]
pub struct RateTimeline {
    segments: Vec<Segment>,
}

impl RateTimeline {
    pub fn new(segments: impl IntoIterator<Item = Segment>) -> Result<Self> {
        let segments: Vec<Segment> = segments
            .into_iter()
            .filter(|s| s.duration.get() > 0.0)
            .collect();
        if segments.is_empty() {
            return Err(Error::UndefinedMetric(
                "timeline has no observed time".into(),
            ));
        }
        Ok(RateTimeline { segments })
    }

    /// Builds a timeline from `(duration, rate, stage)` triples.
    pub fn from_parts(parts: impl IntoIterator<Item = (f64, f64, StageKind)>) -> Result<Self> {
        let segments = parts
            .into_iter()
            .map(|(d, r, s)| Segment::new(d, r, s))
            .collect::<Result<Vec<_>>>()?;
        RateTimeline::new(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// `(t_start, t_end, segment)` for each segment, starting at zero.
    pub fn windows(&self) -> impl Iterator<Item = (f64, f64, &Segment)> + '_ {
        let mut clock = CompensatedSum::new();
        self.segments.iter().map(move |s| {
            let start = clock.value();
            clock.add(s.duration.get());
            (start, clock.value(), s)
        })
    }

    /// Splits the segment containing `at` into two pieces with the same rate
    /// and stage. Splitting at a boundary (or outside the timeline) is a no-op.
    pub fn split_at(&self, at: f64) -> RateTimeline {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        for (start, end, seg) in self.windows() {
            if at > start && at < end {
                let head = at - start;
                let tail = seg.duration.get() - head;
                if let (Ok(head), Ok(tail)) = (TimeSeconds::new(head), TimeSeconds::new(tail)) {
                    if head.get() > 0.0 && tail.get() > 0.0 {
                        out.push(Segment { duration: head, ..*seg });
                        out.push(Segment { duration: tail, ..*seg });
                        continue;
                    }
                }
            }
            out.push(*seg);
        }
        RateTimeline { segments: out }
    }
}

impl TryFrom<RawTimeline> for RateTimeline {
    type Error = Error;
    fn try_from(raw: RawTimeline) -> Result<Self> {
        RateTimeline::new(raw.segments)
    }
}

/// `T_opt`: the integral of r(t), exact for piecewise-constant rates.
pub fn integrate_optimal_time(tl: &RateTimeline) -> TimeSeconds {
    let t = compensated_sum(tl.segments.iter().map(Segment::optimal_time));
    TimeSeconds::new(t.max(0.0)).expect("sum of non-negative terms")
}

/// `T_obs`: total wall time covered by the timeline.
pub fn observed_time(tl: &RateTimeline) -> TimeSeconds {
    let t = compensated_sum(tl.segments.iter().map(|s| s.duration.get()));
    TimeSeconds::new(t).expect("sum of non-negative terms")
}

/// `T_opt / T_obs` of the timeline.
pub fn tor_of_timeline(tl: &RateTimeline) -> Ratio {
    let obs = observed_time(tl).get();
    Ratio::saturating(integrate_optimal_time(tl).get() / obs)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTotals {
    pub time: f64,
    pub lost_time: f64,
}

/// Per stage: total time spent and time lost relative to the optimal rate.
pub fn stage_breakdown(tl: &RateTimeline) -> BTreeMap<StageKind, StageTotals> {
    let mut acc: BTreeMap<StageKind, (CompensatedSum, CompensatedSum)> = BTreeMap::new();
    for seg in &tl.segments {
        let entry = acc.entry(seg.stage).or_default();
        entry.0.add(seg.duration.get());
        entry.1.add(seg.lost_time());
    }
    acc.into_iter()
        .map(|(k, (time, lost))| {
            (
                k,
                StageTotals {
                    time: time.value(),
                    lost_time: lost.value(),
                },
            )
        })
        .collect()
}

/// Appends timelines in order.
pub fn concat(timelines: &[RateTimeline]) -> Result<RateTimeline> {
    RateTimeline::new(timelines.iter().flat_map(|t| t.segments.iter().copied()))
}

/// Timeline repeated `n` times back to back.
pub fn repeat(tl: &RateTimeline, n: usize) -> Result<RateTimeline> {
    RateTimeline::new(std::iter::repeat_n(tl.segments.iter().copied(), n).flatten())
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct CsvRow {
    pub t_start: f64,
    pub t_end: f64,
    pub rate: f64,
    pub stage: StageKind,
}

pub(crate) fn write_csv_rows<W: Write>(
    rows: impl IntoIterator<Item = CsvRow>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `t_start,t_end,rate,stage` rows with a header.
pub fn write_csv<W: Write>(tl: &RateTimeline, out: W) -> Result<()> {
    write_csv_rows(
        tl.windows().map(|(t_start, t_end, s)| CsvRow {
            t_start,
            t_end,
            rate: s.rate.get(),
            stage: s.stage,
        }),
        out,
    )
}

/// Reads the CSV produced by [`write_csv`]. Rows must be contiguous.
pub fn read_csv<R: Read>(input: R) -> Result<RateTimeline> {
    let mut reader = csv::Reader::from_reader(input);
    let mut segments = Vec::new();
    let mut prev_end: Option<f64> = None;
    for (i, row) in reader.deserialize::<CsvRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::MalformedLine {
            line,
            reason: e.to_string(),
        })?;
        if let Some(end) = prev_end {
            if row.t_start > end {
                return Err(Error::Gap { start: end, end: row.t_start });
            }
            if row.t_start < end {
                return Err(Error::Overlap {
                    first_start: end,
                    first_end: end,
                    second_start: row.t_start,
                    second_end: row.t_end,
                });
            }
        }
        let seg = Segment::new(row.t_end - row.t_start, row.rate, row.stage).map_err(|e| {
            Error::MalformedLine {
                line,
                reason: e.to_string(),
            }
        })?;
        prev_end = Some(row.t_end);
        segments.push(seg);
    }
    RateTimeline::new(segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use StageKind::*;

    fn fail_stop_worked() -> RateTimeline {
        RateTimeline::from_parts([
            (2.0, 0.5, SlowRecovery),
            (90.0, 1.0, HealthyRun),
            (3.0, 0.0, CheckpointSave),
            (5.0, 0.0, RollbackWaste),
            (10.0, 0.0, Repair),
        ])
        .unwrap()
    }

    #[test]
    fn integrate_examples() {
        let healthy = RateTimeline::from_parts([(10.0, 1.0, HealthyRun)]).unwrap();
        assert_eq!(integrate_optimal_time(&healthy).get(), 10.0);
        assert_eq!(integrate_optimal_time(&fail_stop_worked()).get(), 91.0);
        let repair = RateTimeline::from_parts([(7.0, 0.0, Repair)]).unwrap();
        assert_eq!(integrate_optimal_time(&repair).get(), 0.0);
    }

    #[test]
    fn observed_examples() {
        let healthy = RateTimeline::from_parts([(10.0, 1.0, HealthyRun)]).unwrap();
        assert_eq!(observed_time(&healthy).get(), 10.0);
        assert_eq!(observed_time(&fail_stop_worked()).get(), 110.0);
        assert!(matches!(
            RateTimeline::new(Vec::new()),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(serde_json::from_str::<RateTimeline>(r#"{"segments":[]}"#).is_err());
    }

    #[test]
    fn tor_examples() {
        let healthy = RateTimeline::from_parts([(1234.5, 1.0, HealthyRun)]).unwrap();
        assert_eq!(tor_of_timeline(&healthy).get(), 1.0);
        assert!((tor_of_timeline(&fail_stop_worked()).get() - 91.0 / 110.0).abs() < 1e-15);
        let repair = RateTimeline::from_parts([(3.0, 0.0, Repair), (4.0, 0.0, Repair)]).unwrap();
        assert_eq!(tor_of_timeline(&repair).get(), 0.0);
    }

    #[test]
    fn breakdown_examples() {
        let b = stage_breakdown(&RateTimeline::from_parts([(8.0, 1.0, HealthyRun)]).unwrap());
        assert_eq!(b[&HealthyRun], StageTotals { time: 8.0, lost_time: 0.0 });

        let b = stage_breakdown(&fail_stop_worked());
        assert_eq!(b[&SlowRecovery], StageTotals { time: 2.0, lost_time: 1.0 });
        assert_eq!(b[&HealthyRun], StageTotals { time: 90.0, lost_time: 0.0 });
        assert_eq!(b[&CheckpointSave], StageTotals { time: 3.0, lost_time: 3.0 });
        assert_eq!(b[&RollbackWaste], StageTotals { time: 5.0, lost_time: 5.0 });
        assert_eq!(b[&Repair], StageTotals { time: 10.0, lost_time: 10.0 });

        let b = stage_breakdown(&RateTimeline::from_parts([(4.0, 0.25, FailSlowDegraded)]).unwrap());
        assert_eq!(b[&FailSlowDegraded], StageTotals { time: 4.0, lost_time: 3.0 });
    }

    #[test]
    fn concat_examples() {
        let a = fail_stop_worked();
        assert_eq!(concat(std::slice::from_ref(&a)).unwrap(), a);

        let five = repeat(&a, 5).unwrap();
        assert_eq!(observed_time(&five).get(), 550.0);
        assert_eq!(integrate_optimal_time(&five).get(), 455.0);

        let b = RateTimeline::from_parts([
            (2.0, 0.5, SlowRecovery),
            (90.0, 1.0, HealthyRun),
            (3.0, 0.0, CheckpointSave),
            (10.0, 0.4, FailSlowDegraded),
            (5.0, 0.0, Repair),
        ])
        .unwrap();
        let ab = concat(&[a, b]).unwrap();
        assert!((tor_of_timeline(&ab).get() - 186.0 / 220.0).abs() < 1e-15);
        assert!(concat(&[]).is_err());
    }

    #[test]
    fn zero_length_segments_are_dropped() {
        let tl = RateTimeline::from_parts([(0.0, 0.5, SlowRecovery), (5.0, 1.0, HealthyRun)]).unwrap();
        assert_eq!(tl.len(), 1);
    }

    #[test]
    fn split_preserves_metrics() {
        let tl = fail_stop_worked();
        let split = tl.split_at(50.0);
        assert_eq!(split.len(), tl.len() + 1);
        assert_eq!(tor_of_timeline(&split), tor_of_timeline(&tl));
        assert_eq!(tl.split_at(2.0), tl);
    }

    #[test]
    fn csv_round_trip() {
        let tl = fail_stop_worked();
        let mut buf = Vec::new();
        write_csv(&tl, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t_start,t_end,rate,stage\n0.0,2.0,0.5,SlowRecovery\n"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), tl);

        let gap = "t_start,t_end,rate,stage\n0,1,1,HealthyRun\n2,3,1,HealthyRun\n";
        assert!(matches!(read_csv(gap.as_bytes()), Err(Error::Gap { .. })));
    }
}
