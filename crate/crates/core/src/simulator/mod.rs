//! Discrete-event simulation of a training run with stochastic failures.
//!
//! Work accrues at `r(t) * w_opt`. A checkpoint save starts after every
//! `ckpt_interval` seconds of progress-accruing time (running time since the
//! last commit or restart) and pauses work for `t_ckpt`. A fail-stop failure
//! throws away everything since the last completed checkpoint; the discarded
//! span is relabelled `RollbackWaste` and followed by `Repair` and
//! `SlowRecovery`. A fail-slow failure degrades the run to `r_fs` for a sampled
//! `t_fs`, then `Repair`, then `SlowRecovery`. The run stops once contributed
//! work reaches `total_work`; a checkpoint due at that same instant is still
//! saved.
//!
//! Failure arrivals are Poisson over exposure time (everything except repair;
//! fail-slow exposure also excludes degraded running time), or follow an
//! explicit [`ArrivalSchedule`].
//!
//! # Randomness
//!
//! Each replication draws from one ChaCha8 stream:
//! `ChaCha8Rng::seed_from_u64(seed)` with `set_stream(replication)`.
//! [`simulate`] is replication 0. Draws are consumed in event order, so a
//! result is a pure function of the config and the replication index.

mod arrivals;
mod check;
mod deterministic;
pub mod dist;
mod engine;
mod monte_carlo;

use std::collections::BTreeMap;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Ratio, StageKind, TimeSeconds, WorkRate};
use crate::timeline::RateTimeline;
use crate::trace::{PeriodSplit, StageSums, TraceEvent};

pub use arrivals::ArrivalSchedule;
pub use check::{realized_period_tor_check, realized_tor_from_sums};
pub use deterministic::deterministic_config;
pub use dist::{duration_families, DurationFamily, DurationModel, DurationSpec};
pub use monte_carlo::{monte_carlo, MonteCarloSummary, RunSummary, SUMMARY_SCHEMA_VERSION};

pub type SimRng = rand_chacha::ChaCha8Rng;

pub const DEFAULT_WATCHDOG_PERIODS: u64 = 1_000;

fn default_watchdog() -> u64 {
    DEFAULT_WATCHDOG_PERIODS
}

fn full_rate() -> Ratio {
    Ratio::ONE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub w_opt: WorkRate,
    pub total_work: f64,
    /// Progress-accruing time between checkpoint starts.
    pub ckpt_interval: f64,
    #[serde(default)]
    pub t_ckpt: TimeSeconds,
    /// Fail-stop failures per exposure second.
    #[serde(default)]
    pub fail_stop_rate: f64,
    #[serde(default)]
    pub fail_slow_rate: f64,
    #[serde(default)]
    pub t_r_dist: DurationSpec,
    #[serde(default)]
    pub t_sr_dist: DurationSpec,
    #[serde(default)]
    pub t_fs_dist: DurationSpec,
    #[serde(default = "full_rate")]
    pub r_sr: Ratio,
    #[serde(default = "full_rate")]
    pub r_fs: Ratio,
    #[serde(default)]
    pub seed: u64,
    /// Replaces Poisson fail-stop arrivals when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fail_stop_schedule: Option<ArrivalSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fail_slow_schedule: Option<ArrivalSchedule>,
    /// Consecutive zero-progress failure periods before the run is declared diverged.
    #[serde(default = "default_watchdog")]
    pub watchdog_periods: u64,
}

pub(crate) struct Prepared {
    pub t_r: Box<dyn DurationModel>,
    pub t_sr: Box<dyn DurationModel>,
    pub t_fs: Box<dyn DurationModel>,
}

impl SimConfig {
    /// Failure-free config with the given work and checkpoint cadence.
    pub fn failure_free(w_opt: f64, total_work: f64, ckpt_interval: f64, t_ckpt: f64) -> Result<Self> {
        let cfg = SimConfig {
            w_opt: WorkRate::new(w_opt)?,
            total_work,
            ckpt_interval,
            t_ckpt: TimeSeconds::checked("t_ckpt", t_ckpt)?,
            fail_stop_rate: 0.0,
            fail_slow_rate: 0.0,
            t_r_dist: DurationSpec::default(),
            t_sr_dist: DurationSpec::default(),
            t_fs_dist: DurationSpec::default(),
            r_sr: Ratio::ONE,
            r_fs: Ratio::ONE,
            seed: 0,
            fail_stop_schedule: None,
            fail_slow_schedule: None,
            watchdog_periods: DEFAULT_WATCHDOG_PERIODS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.prepare().map(|_| ())
    }

    pub(crate) fn prepare(&self) -> Result<Prepared> {
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::validation(field, format!("must be finite and positive, got {v}")))
            }
        };
        let non_negative = |field: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::validation(field, format!("must be finite and non-negative, got {v}")))
            }
        };
        positive("total_work", self.total_work)?;
        positive("ckpt_interval", self.ckpt_interval)?;
        non_negative("fail_stop_rate", self.fail_stop_rate)?;
        non_negative("fail_slow_rate", self.fail_slow_rate)?;
        if self.watchdog_periods == 0 {
            return Err(Error::validation("watchdog_periods", "must be at least 1"));
        }
        if let Some(s) = &self.fail_stop_schedule {
            s.validate("fail_stop_schedule")?;
        }
        if let Some(s) = &self.fail_slow_schedule {
            s.validate("fail_slow_schedule")?;
        }
        Ok(Prepared {
            t_r: self.t_r_dist.build("t_r_dist")?,
            t_sr: self.t_sr_dist.build("t_sr_dist")?,
            t_fs: self.t_fs_dist.build("t_fs_dist")?,
        })
    }

    pub(crate) fn rng_for(&self, replication: u64) -> SimRng {
        let mut rng = SimRng::seed_from_u64(self.seed);
        rng.set_stream(replication);
        rng
    }
}

/// Realized per-period averages for one failure class, over complete periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMeans {
    pub periods: u64,
    pub t_sr: f64,
    pub r_sr: f64,
    pub t_h: f64,
    pub n_ckpt: f64,
    pub ckpt_time: f64,
    pub t_rb: f64,
    pub t_fs: f64,
    pub r_fs: f64,
    pub t_r: f64,
    pub mtbf: f64,
    /// Totals the means were taken over.
    pub totals: StageSums,
}

impl ClassMeans {
    fn from_split(split: &PeriodSplit, class: crate::model::FailureClass) -> Option<ClassMeans> {
        let mut periods = 0u64;
        let mut totals = StageSums::default();
        for p in split.complete_of(class) {
            periods += 1;
            totals = totals.merge(&p.sums);
        }
        if periods == 0 {
            return None;
        }
        let n = periods as f64;
        let mean = totals.scaled(n);
        Some(ClassMeans {
            periods,
            t_sr: mean.t_sr,
            r_sr: totals.r_sr(),
            t_h: mean.t_h,
            n_ckpt: totals.n_ckpt as f64 / n,
            ckpt_time: mean.t_ckpt_total,
            t_rb: mean.t_rb,
            t_fs: mean.t_fs,
            r_fs: totals.r_fs(),
            t_r: mean.t_r,
            mtbf: mean.mtbf(class),
            totals,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PeriodMeans {
    pub fail_stop: Option<ClassMeans>,
    pub fail_slow: Option<ClassMeans>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub t_obs: f64,
    pub t_opt: f64,
    pub tor: f64,
    /// Work contributed at termination, from the simulator's own accumulator.
    pub work_done: f64,
    pub fail_stop_events: u64,
    pub fail_slow_events: u64,
    pub checkpoints_completed: u64,
    /// Number of segments per stage in the realized timeline.
    pub counts: BTreeMap<StageKind, u64>,
    pub period_means: PeriodMeans,
    pub timeline: RateTimeline,
    #[serde(skip)]
    events: Vec<TraceEvent>,
}

impl SimResult {
    /// The realized run as trace events with absolute timestamps; parsing
    /// them back reproduces [`SimResult::timeline`] exactly.
    pub fn trace_events(&self) -> &[TraceEvent] {
        &self.events
    }
}

/// Runs replication 0 of `cfg`.
pub fn simulate(cfg: &SimConfig) -> Result<SimResult> {
    simulate_replication(cfg, 0)
}

/// Runs one replication on its own RNG stream.
pub fn simulate_replication(cfg: &SimConfig, replication: u64) -> Result<SimResult> {
    let prepared = cfg.prepare()?;
    let mut rng = cfg.rng_for(replication);
    let run = engine::Engine::new(cfg, &prepared, &mut rng).run()?;
    engine::finish(run)
}
