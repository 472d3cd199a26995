use serde::{Deserialize, Serialize};

use super::dist::exponential_gap;
use super::SimRng;
use crate::error::{Error, Result};

/// Deterministic failure injection, in exposure seconds (wall time outside
/// repair). Without a schedule, arrivals are Poisson at the configured rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArrivalSchedule {
    /// Arrivals at `first`, `first + interval`, `first + 2 * interval`, ...
    Periodic { first: f64, interval: f64 },
    /// Arrivals at the listed exposure times (ascending).
    At { times: Vec<f64> },
}

impl ArrivalSchedule {
    pub fn validate(&self, field: &str) -> Result<()> {
        let bad = |reason: String| Err(Error::validation(field, reason));
        match self {
            ArrivalSchedule::Periodic { first, interval } => {
                if !(first.is_finite() && *first >= 0.0) {
                    return bad(format!("`first` must be finite and non-negative, got {first}"));
                }
                if !(interval.is_finite() && *interval > 0.0) {
                    return bad(format!("`interval` must be finite and positive, got {interval}"));
                }
            }
            ArrivalSchedule::At { times } => {
                if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                    return bad("times must be finite and non-negative".into());
                }
                if times.windows(2).any(|w| w[1] < w[0]) {
                    return bad("times must be ascending".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Source {
    Poisson { rate: f64 },
    Periodic { first: f64, interval: f64, fired: u64 },
    At { times: Vec<f64>, fired: usize },
}

/// Failure arrivals measured against an exposure clock.
#[derive(Debug, Clone)]
pub(crate) struct ArrivalClock {
    source: Source,
    exposure: f64,
    next: f64,
}

impl ArrivalClock {
    pub fn new(rate: f64, schedule: Option<&ArrivalSchedule>, rng: &mut SimRng) -> Self {
        let source = match schedule {
            None => Source::Poisson { rate },
            Some(ArrivalSchedule::Periodic { first, interval }) => Source::Periodic {
                first: *first,
                interval: *interval,
                fired: 0,
            },
            Some(ArrivalSchedule::At { times }) => Source::At {
                times: times.clone(),
                fired: 0,
            },
        };
        let mut clock = ArrivalClock {
            source,
            exposure: 0.0,
            next: f64::INFINITY,
        };
        clock.schedule_next(rng);
        clock
    }

    fn schedule_next(&mut self, rng: &mut SimRng) {
        self.next = match &mut self.source {
            Source::Poisson { rate } => self.exposure + exponential_gap(*rate, rng),
            Source::Periodic { first, interval, fired } => *first + *fired as f64 * *interval,
            Source::At { times, fired } => times.get(*fired).copied().unwrap_or(f64::INFINITY),
        };
    }

    pub fn remaining(&self) -> f64 {
        (self.next - self.exposure).max(0.0)
    }

    pub fn advance(&mut self, dt: f64) {
        self.exposure += dt;
    }

    /// Records that the pending arrival happened and schedules the next one.
    pub fn fire(&mut self, rng: &mut SimRng) {
        match &mut self.source {
            Source::Periodic { fired, .. } => *fired += 1,
            Source::At { fired, .. } => *fired += 1,
            Source::Poisson { .. } => {}
        }
        self.schedule_next(rng);
    }
}
