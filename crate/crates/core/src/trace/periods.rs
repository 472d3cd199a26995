//! Splitting a realized timeline into failure-repair periods.
//!
//! A period ends when a `Repair` stretch ends. Its class is read from the
//! stage right before the repair: `FailSlowDegraded` means fail-slow, anything
//! else fail-stop. A zero-length degradation therefore cannot be told apart
//! from a fail-stop failure.
//!
//! Only periods that start right after a repair are *complete*. The stretch
//! before the first repair counts as complete only when the timeline opens
//! with `SlowRecovery` (the trace starts at a recovery); otherwise it is a
//! censored leading period. Whatever follows the last repair is the trailing
//! partial period.

use serde::{Deserialize, Serialize};

use crate::model::{FailSlowParams, FailStopParams, FailureClass, PeriodSpec, StageKind};
use crate::num::CompensatedSum;
use crate::timeline::{RateTimeline, Segment};
use crate::Result;

/// Per-stage time totals over some stretch of a timeline.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageSums {
    pub t_sr: f64,
    /// `sum(duration * rate)` over slow-recovery segments.
    pub sr_optimal: f64,
    pub t_h: f64,
    pub t_ckpt_total: f64,
    pub n_ckpt: u64,
    pub t_rb: f64,
    pub t_fs: f64,
    /// `sum(duration * rate)` over degraded segments.
    pub fs_optimal: f64,
    pub t_r: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct SumsAcc {
    t_sr: CompensatedSum,
    sr_optimal: CompensatedSum,
    t_h: CompensatedSum,
    t_ckpt: CompensatedSum,
    n_ckpt: u64,
    t_rb: CompensatedSum,
    t_fs: CompensatedSum,
    fs_optimal: CompensatedSum,
    t_r: CompensatedSum,
    segments: usize,
}

impl SumsAcc {
    fn add(&mut self, s: &Segment) {
        let d = s.duration.get();
        self.segments += 1;
        match s.stage {
            StageKind::SlowRecovery => {
                self.t_sr.add(d);
                self.sr_optimal.add(s.optimal_time());
            }
            StageKind::HealthyRun => self.t_h.add(d),
            StageKind::CheckpointSave => {
                self.t_ckpt.add(d);
                self.n_ckpt += 1;
            }
            StageKind::RollbackWaste => self.t_rb.add(d),
            StageKind::FailSlowDegraded => {
                self.t_fs.add(d);
                self.fs_optimal.add(s.optimal_time());
            }
            StageKind::Repair => self.t_r.add(d),
        }
    }

    fn finish(&self) -> StageSums {
        StageSums {
            t_sr: self.t_sr.value(),
            sr_optimal: self.sr_optimal.value(),
            t_h: self.t_h.value(),
            t_ckpt_total: self.t_ckpt.value(),
            n_ckpt: self.n_ckpt,
            t_rb: self.t_rb.value(),
            t_fs: self.t_fs.value(),
            fs_optimal: self.fs_optimal.value(),
            t_r: self.t_r.value(),
        }
    }
}

impl StageSums {
    pub fn of_timeline(tl: &RateTimeline) -> StageSums {
        let mut acc = SumsAcc::default();
        tl.segments().iter().for_each(|s| acc.add(s));
        acc.finish()
    }

    pub fn merge(&self, other: &StageSums) -> StageSums {
        StageSums {
            t_sr: self.t_sr + other.t_sr,
            sr_optimal: self.sr_optimal + other.sr_optimal,
            t_h: self.t_h + other.t_h,
            t_ckpt_total: self.t_ckpt_total + other.t_ckpt_total,
            n_ckpt: self.n_ckpt + other.n_ckpt,
            t_rb: self.t_rb + other.t_rb,
            t_fs: self.t_fs + other.t_fs,
            fs_optimal: self.fs_optimal + other.fs_optimal,
            t_r: self.t_r + other.t_r,
        }
    }

    /// Divides every total by `n` (period means).
    pub fn scaled(&self, n: f64) -> StageSums {
        StageSums {
            t_sr: self.t_sr / n,
            sr_optimal: self.sr_optimal / n,
            t_h: self.t_h / n,
            t_ckpt_total: self.t_ckpt_total / n,
            n_ckpt: self.n_ckpt,
            t_rb: self.t_rb / n,
            t_fs: self.t_fs / n,
            fs_optimal: self.fs_optimal / n,
            t_r: self.t_r / n,
        }
    }

    pub fn observed_time(&self) -> f64 {
        self.t_sr + self.t_h + self.t_ckpt_total + self.t_rb + self.t_fs + self.t_r
    }

    pub fn optimal_time(&self) -> f64 {
        self.sr_optimal + self.t_h + self.fs_optimal
    }

    /// Time-weighted recovery rate; zero when there was no slow recovery.
    pub fn r_sr(&self) -> f64 {
        if self.t_sr > 0.0 {
            (self.sr_optimal / self.t_sr).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    pub fn r_fs(&self) -> f64 {
        if self.t_fs > 0.0 {
            (self.fs_optimal / self.t_fs).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    /// The class's MTBF stage sum.
    pub fn mtbf(&self, class: FailureClass) -> f64 {
        match class {
            FailureClass::FailStop => self.t_sr + self.t_h + self.t_ckpt_total + self.t_rb,
            FailureClass::FailSlow => self.t_sr + self.t_h + self.t_ckpt_total,
        }
    }

    /// Reads the sums as period parameters of `class`, folding all checkpoint
    /// time into a single save (`n_ckpt = 1`). Time labelled with the other
    /// class's stage is dropped.
    pub fn as_period(&self, class: FailureClass) -> Result<PeriodSpec> {
        Ok(match class {
            FailureClass::FailStop => PeriodSpec::FailStop(
                FailStopParams {
                    t_sr: self.t_sr,
                    r_sr: self.r_sr(),
                    t_h: self.t_h,
                    n_ckpt: 1,
                    t_ckpt: self.t_ckpt_total,
                    t_rb: self.t_rb,
                    t_r: self.t_r,
                }
                .build()?,
            ),
            FailureClass::FailSlow => PeriodSpec::FailSlow(
                FailSlowParams {
                    t_sr: self.t_sr,
                    r_sr: self.r_sr(),
                    t_h: self.t_h,
                    n_ckpt: 1,
                    t_ckpt: self.t_ckpt_total,
                    t_fs: self.t_fs,
                    r_fs: self.r_fs(),
                    t_r: self.t_r,
                }
                .build()?,
            ),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizedPeriod {
    pub class: FailureClass,
    pub sums: StageSums,
}

impl RealizedPeriod {
    pub fn mtbf(&self) -> f64 {
        self.sums.mtbf(self.class)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PeriodSplit {
    pub complete: Vec<RealizedPeriod>,
    /// Stretch before the first repair, when the timeline does not open at a recovery.
    pub leading: Option<RealizedPeriod>,
    /// Stretch after the last repair.
    pub trailing: Option<StageSums>,
}

impl PeriodSplit {
    pub fn complete_of(&self, class: FailureClass) -> impl Iterator<Item = &RealizedPeriod> {
        self.complete.iter().filter(move |p| p.class == class)
    }
}

pub fn split_periods(tl: &RateTimeline) -> PeriodSplit {
    let segs = tl.segments();
    let opens_at_recovery = segs
        .first()
        .is_some_and(|s| s.stage == StageKind::SlowRecovery);

    let mut split = PeriodSplit::default();
    let mut acc = SumsAcc::default();
    let mut before_repair: Option<StageKind> = None;
    let mut first = true;

    for (i, seg) in segs.iter().enumerate() {
        if seg.stage != StageKind::Repair {
            before_repair = Some(seg.stage);
        }
        acc.add(seg);
        let repair_ends = seg.stage == StageKind::Repair
            && segs.get(i + 1).is_none_or(|n| n.stage != StageKind::Repair);
        if repair_ends {
            let class = match before_repair {
                Some(StageKind::FailSlowDegraded) => FailureClass::FailSlow,
                _ => FailureClass::FailStop,
            };
            let period = RealizedPeriod {
                class,
                sums: acc.finish(),
            };
            if first && !opens_at_recovery {
                split.leading = Some(period);
            } else {
                split.complete.push(period);
            }
            first = false;
            acc = SumsAcc::default();
            before_repair = None;
        }
    }
    if acc.segments > 0 {
        split.trailing = Some(acc.finish());
    }
    split
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::period_to_timeline;
    use crate::model::{mtbf_fail_stop, FailStopParams};
    use crate::timeline::repeat;
    use StageKind::*;

    #[test]
    fn synthesized_periods_are_complete() {
        let p = FailStopParams {
            t_sr: 2.0,
            r_sr: 0.5,
            t_h: 90.0,
            n_ckpt: 3,
            t_ckpt: 1.0,
            t_rb: 5.0,
            t_r: 10.0,
        }
        .build()
        .unwrap();
        let tl = repeat(&period_to_timeline(&p.into()), 3).unwrap();
        let split = split_periods(&tl);
        assert_eq!(split.complete.len(), 3);
        assert!(split.leading.is_none() && split.trailing.is_none());
        for period in &split.complete {
            assert_eq!(period.class, FailureClass::FailStop);
            assert_eq!(period.mtbf(), mtbf_fail_stop(&p).get());
            assert_eq!(period.sums.r_sr(), 0.5);
        }
    }

    #[test]
    fn leading_and_trailing_stretches() {
        let tl = RateTimeline::from_parts([
            (30.0, 1.0, HealthyRun),
            (1.0, 0.0, CheckpointSave),
            (4.0, 0.0, RollbackWaste),
            (5.0, 0.0, Repair),
            (2.0, 0.5, SlowRecovery),
            (20.0, 1.0, HealthyRun),
            (6.0, 0.2, FailSlowDegraded),
            (3.0, 0.0, Repair),
            (7.0, 1.0, HealthyRun),
        ])
        .unwrap();
        let split = split_periods(&tl);
        assert_eq!(split.leading.unwrap().class, FailureClass::FailStop);
        assert_eq!(split.complete.len(), 1);
        assert_eq!(split.complete[0].class, FailureClass::FailSlow);
        assert_eq!(split.complete[0].mtbf(), 22.0);
        assert_eq!(split.trailing.unwrap().t_h, 7.0);
    }
}
