use std::collections::BTreeMap;

use super::arrivals::ArrivalClock;
use super::{ClassMeans, PeriodMeans, Prepared, SimConfig, SimResult, SimRng};
use crate::error::{Error, Result};
use crate::model::{FailureClass, Ratio, StageKind, TimeSeconds};
use crate::timeline;
use crate::trace::{split_periods, trace_to_timeline, TraceEvent};

/// Events closer together than this fraction of the time scale are treated as
/// simultaneous and resolved by [`Event`] order.
const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    CheckpointDue,
    Done,
    CheckpointEnd,
    RepairEnd,
    StageEnd,
    FailStop,
    FailSlow,
}

#[derive(Debug, Clone, Copy)]
enum Base {
    Healthy,
    SlowRecovery { remaining: f64 },
    Degraded { remaining: f64 },
}

impl Base {
    fn stage(self) -> StageKind {
        match self {
            Base::Healthy => StageKind::HealthyRun,
            Base::SlowRecovery { .. } => StageKind::SlowRecovery,
            Base::Degraded { .. } => StageKind::FailSlowDegraded,
        }
    }

    fn remaining(self) -> f64 {
        match self {
            Base::Healthy => f64::INFINITY,
            Base::SlowRecovery { remaining } | Base::Degraded { remaining } => remaining.max(0.0),
        }
    }

    fn consume(&mut self, dt: f64) {
        if let Base::SlowRecovery { remaining } | Base::Degraded { remaining } = self {
            *remaining -= dt;
        }
    }

    fn is_degraded(self) -> bool {
        matches!(self, Base::Degraded { .. })
    }
}

#[derive(Debug, Clone, Copy)]
enum Activity {
    Running,
    Checkpoint { remaining: f64 },
    Repair { remaining: f64 },
}

#[derive(Debug, Clone, Copy)]
struct RawSegment {
    start: f64,
    end: f64,
    stage: StageKind,
    rate: f64,
}

/// Realized segments with absolute times. Segments at or after `commit` were
/// recorded since the last completed checkpoint.
#[derive(Debug, Default)]
struct Recorder {
    segments: Vec<RawSegment>,
    commit: usize,
}

impl Recorder {
    fn push(&mut self, start: f64, end: f64, stage: StageKind, rate: f64) {
        if end <= start {
            return;
        }
        if self.segments.len() > self.commit {
            let last = self.segments.last_mut().expect("non-empty");
            if last.stage == stage && last.rate == rate && stage != StageKind::Repair && last.end == start {
                last.end = end;
                return;
            }
        }
        self.segments.push(RawSegment { start, end, stage, rate });
    }

    fn commit(&mut self) {
        self.commit = self.segments.len();
    }

    /// Relabels everything but repairs since the last commit as waste.
    fn roll_back(&mut self) {
        let tail: Vec<RawSegment> = self.segments.drain(self.commit..).collect();
        for mut seg in tail {
            if seg.stage != StageKind::Repair {
                seg.stage = StageKind::RollbackWaste;
                seg.rate = 0.0;
            }
            let open = self.segments.len() > self.commit;
            match self.segments.last_mut() {
                Some(last)
                    if open
                        && last.stage == StageKind::RollbackWaste
                        && seg.stage == StageKind::RollbackWaste
                        && last.end == seg.start =>
                {
                    last.end = seg.end;
                }
                _ => self.segments.push(seg),
            }
        }
    }
}

pub(super) struct Engine<'a> {
    cfg: &'a SimConfig,
    models: &'a Prepared,
    rng: &'a mut SimRng,
    now: f64,
    progress: f64,
    committed: f64,
    uncommitted: f64,
    activity: Activity,
    base: Base,
    stop: ArrivalClock,
    slow: ArrivalClock,
    rec: Recorder,
    fail_stop_events: u64,
    fail_slow_events: u64,
    checkpoints: u64,
    stalled: u64,
    work_at_last_failure: f64,
}

pub(super) struct Run {
    segments: Vec<RawSegment>,
    work_done: f64,
    fail_stop_events: u64,
    fail_slow_events: u64,
    checkpoints: u64,
}

impl<'a> Engine<'a> {
    pub fn new(cfg: &'a SimConfig, models: &'a Prepared, rng: &'a mut SimRng) -> Self {
        let stop = ArrivalClock::new(cfg.fail_stop_rate, cfg.fail_stop_schedule.as_ref(), rng);
        let slow = ArrivalClock::new(cfg.fail_slow_rate, cfg.fail_slow_schedule.as_ref(), rng);
        Engine {
            cfg,
            models,
            rng,
            now: 0.0,
            progress: 0.0,
            committed: 0.0,
            uncommitted: 0.0,
            activity: Activity::Running,
            base: Base::Healthy,
            stop,
            slow,
            rec: Recorder::default(),
            fail_stop_events: 0,
            fail_slow_events: 0,
            checkpoints: 0,
            stalled: 0,
            work_at_last_failure: 0.0,
        }
    }

    fn rate(&self) -> f64 {
        match self.base {
            Base::Healthy => 1.0,
            Base::SlowRecovery { .. } => self.cfg.r_sr.get(),
            Base::Degraded { .. } => self.cfg.r_fs.get(),
        }
    }

    fn candidates(&self) -> Vec<(f64, Event)> {
        let mut c = Vec::with_capacity(5);
        match self.activity {
            Activity::Running => {
                c.push(((self.cfg.ckpt_interval - self.progress).max(0.0), Event::CheckpointDue));
                let speed = self.rate() * self.cfg.w_opt.get();
                if speed > 0.0 {
                    let left = (self.cfg.total_work - self.committed - self.uncommitted).max(0.0);
                    c.push((left / speed, Event::Done));
                }
                c.push((self.base.remaining(), Event::StageEnd));
                c.push((self.stop.remaining(), Event::FailStop));
                if !self.base.is_degraded() {
                    c.push((self.slow.remaining(), Event::FailSlow));
                }
            }
            Activity::Checkpoint { remaining } => {
                c.push((remaining.max(0.0), Event::CheckpointEnd));
                c.push((self.stop.remaining(), Event::FailStop));
                c.push((self.slow.remaining(), Event::FailSlow));
            }
            Activity::Repair { remaining } => {
                c.push((remaining.max(0.0), Event::RepairEnd));
            }
        }
        c
    }

    /// Earliest event; near-simultaneous events resolve by priority.
    fn next_event(&self) -> (f64, Event) {
        let c = self.candidates();
        let earliest = c.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
        assert!(earliest.is_finite(), "no pending event");
        let tol = TIE_TOLERANCE * self.now.max(self.cfg.ckpt_interval);
        let event = c
            .iter()
            .filter(|e| e.0 <= earliest + tol)
            .map(|e| e.1)
            .min()
            .expect("at least one candidate");
        (earliest, event)
    }

    fn advance(&mut self, dt: f64) {
        let end = self.now + dt;
        match &mut self.activity {
            Activity::Running => {
                let rate = self.rate();
                self.rec.push(self.now, end, self.base.stage(), rate);
                self.progress += dt;
                self.uncommitted += rate * self.cfg.w_opt.get() * dt;
                self.base.consume(dt);
                self.stop.advance(dt);
                if !self.base.is_degraded() {
                    self.slow.advance(dt);
                }
            }
            Activity::Checkpoint { remaining } => {
                *remaining -= dt;
                self.rec.push(self.now, end, StageKind::CheckpointSave, 0.0);
                self.stop.advance(dt);
                self.slow.advance(dt);
            }
            Activity::Repair { remaining } => {
                *remaining -= dt;
                self.rec.push(self.now, end, StageKind::Repair, 0.0);
            }
        }
        self.now = end;
    }

    fn sample(model: &dyn super::DurationModel, rng: &mut SimRng) -> f64 {
        model.sample(rng).max(0.0)
    }

    fn note_failure(&mut self) -> Result<()> {
        let contributed = self.committed + self.uncommitted;
        if contributed > self.work_at_last_failure {
            self.stalled = 0;
        } else {
            self.stalled += 1;
        }
        self.work_at_last_failure = contributed;
        if self.stalled >= self.cfg.watchdog_periods {
            return Err(Error::Diverged {
                stalled_periods: self.stalled,
                elapsed: self.now,
                committed_work: self.committed,
            });
        }
        Ok(())
    }

    fn fail_stop(&mut self) -> Result<()> {
        self.fail_stop_events += 1;
        self.stop.fire(self.rng);
        self.rec.roll_back();
        self.uncommitted = 0.0;
        self.progress = 0.0;
        self.base = Base::Healthy;
        let t_r = Self::sample(self.models.t_r.as_ref(), self.rng);
        self.activity = Activity::Repair { remaining: t_r };
        self.note_failure()
    }

    fn fail_slow(&mut self) -> Result<()> {
        self.fail_slow_events += 1;
        self.slow.fire(self.rng);
        let t_fs = Self::sample(self.models.t_fs.as_ref(), self.rng);
        self.base = Base::Degraded { remaining: t_fs };
        self.note_failure()
    }

    pub fn run(mut self) -> Result<Run> {
        loop {
            let (dt, event) = self.next_event();
            self.advance(dt);
            match event {
                Event::CheckpointDue => {
                    self.activity = Activity::Checkpoint {
                        remaining: self.cfg.t_ckpt.get(),
                    };
                }
                Event::CheckpointEnd => {
                    self.committed += self.uncommitted;
                    self.uncommitted = 0.0;
                    self.progress = 0.0;
                    self.checkpoints += 1;
                    self.rec.commit();
                    self.activity = Activity::Running;
                }
                Event::Done => break,
                Event::StageEnd => match self.base {
                    Base::SlowRecovery { .. } => self.base = Base::Healthy,
                    Base::Degraded { .. } => {
                        self.base = Base::Healthy;
                        let t_r = Self::sample(self.models.t_r.as_ref(), self.rng);
                        self.activity = Activity::Repair { remaining: t_r };
                    }
                    Base::Healthy => unreachable!("healthy running has no end"),
                },
                Event::RepairEnd => {
                    let t_sr = Self::sample(self.models.t_sr.as_ref(), self.rng);
                    self.base = if t_sr > 0.0 {
                        Base::SlowRecovery { remaining: t_sr }
                    } else {
                        Base::Healthy
                    };
                    self.activity = Activity::Running;
                }
                Event::FailStop => self.fail_stop()?,
                Event::FailSlow => self.fail_slow()?,
            }
        }
        Ok(Run {
            segments: self.rec.segments,
            work_done: self.committed + self.uncommitted,
            fail_stop_events: self.fail_stop_events,
            fail_slow_events: self.fail_slow_events,
            checkpoints: self.checkpoints,
        })
    }
}

pub(super) fn finish(run: Run) -> Result<SimResult> {
    let events: Vec<TraceEvent> = run
        .segments
        .iter()
        .map(|s| {
            Ok(TraceEvent {
                t_start: TimeSeconds::new(s.start)?,
                t_end: TimeSeconds::new(s.end)?,
                stage: s.stage,
                rate: Ratio::new(s.rate)?,
                note: None,
            })
        })
        .collect::<Result<_>>()?;
    let tl = trace_to_timeline(&events)?;

    let mut counts = BTreeMap::new();
    for seg in tl.segments() {
        *counts.entry(seg.stage).or_insert(0u64) += 1;
    }
    let split = split_periods(&tl);
    let period_means = PeriodMeans {
        fail_stop: ClassMeans::from_split(&split, FailureClass::FailStop),
        fail_slow: ClassMeans::from_split(&split, FailureClass::FailSlow),
    };

    Ok(SimResult {
        t_obs: timeline::observed_time(&tl).get(),
        t_opt: timeline::integrate_optimal_time(&tl).get(),
        tor: timeline::tor_of_timeline(&tl).get(),
        work_done: run.work_done,
        fail_stop_events: run.fail_stop_events,
        fail_slow_events: run.fail_slow_events,
        checkpoints_completed: run.checkpoints,
        counts,
        period_means,
        timeline: tl,
        events,
    })
}
