use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{realized_tor_from_sums, simulate_replication, SimConfig};
use crate::error::{Error, Result};
use crate::model::FailureClass;
use crate::num::RunningMean;
use crate::trace::StageSums;

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub replication: u64,
    pub tor: f64,
    pub t_obs: f64,
    pub t_opt: f64,
    pub fail_stop_events: u64,
    pub fail_slow_events: u64,
    /// Complete failure-repair periods of the run's failure class.
    pub complete_periods: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergedRun {
    pub replication: u64,
    pub stalled_periods: u64,
    pub elapsed: f64,
    pub committed_work: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub schema_version: u32,
    pub replications: u64,
    /// Replications that finished; statistics cover only these.
    pub completed: u64,
    pub mean_tor: f64,
    /// Sample standard deviation (0 for a single replication).
    pub stddev: f64,
    pub std_error: f64,
    /// Two-sided 95% Student-t interval for the mean.
    pub ci95: [f64; 2],
    /// Closed form at realized per-period means pooled over all completed
    /// replications. `None` when failure classes are mixed.
    pub realized_tor: Option<f64>,
    pub complete_periods: u64,
    pub runs: Vec<RunSummary>,
    pub diverged: Vec<DivergedRun>,
}

enum Outcome {
    Done {
        run: RunSummary,
        periods: Option<StageSums>,
        whole: StageSums,
    },
    Diverged(DivergedRun),
}

fn replicate(cfg: &SimConfig, k: u64) -> Result<Outcome> {
    match simulate_replication(cfg, k) {
        Ok(res) => {
            let means = if res.fail_slow_events > 0 {
                res.period_means.fail_slow
            } else {
                res.period_means.fail_stop
            };
            Ok(Outcome::Done {
                run: RunSummary {
                    replication: k,
                    tor: res.tor,
                    t_obs: res.t_obs,
                    t_opt: res.t_opt,
                    fail_stop_events: res.fail_stop_events,
                    fail_slow_events: res.fail_slow_events,
                    complete_periods: means.map_or(0, |m| m.periods),
                },
                periods: means.map(|m| m.totals),
                whole: StageSums::of_timeline(&res.timeline),
            })
        }
        Err(Error::Diverged {
            stalled_periods,
            elapsed,
            committed_work,
        }) => Ok(Outcome::Diverged(DivergedRun {
            replication: k,
            stalled_periods,
            elapsed,
            committed_work,
        })),
        Err(e) => Err(e),
    }
}

/// Runs `replications` independent replications in parallel.
///
/// Replication `k` runs on stream `k` of `cfg.seed`, and results are reduced
/// in replication order, so the summary does not depend on scheduling.
/// Diverged replications are listed and left out of the statistics; the call
/// fails only when every replication diverges.
pub fn monte_carlo(cfg: &SimConfig, replications: u64) -> Result<MonteCarloSummary> {
    if replications == 0 {
        return Err(Error::validation("replications", "must be at least 1"));
    }
    cfg.validate()?;
    let outcomes = (0..replications)
        .into_par_iter()
        .map(|k| replicate(cfg, k))
        .collect::<Result<Vec<_>>>()?;

    let mut runs = Vec::new();
    let mut diverged = Vec::new();
    let mut period_sums: Option<StageSums> = None;
    let mut whole_sums = StageSums::default();
    let (mut any_stop, mut any_slow) = (false, false);
    for outcome in outcomes {
        match outcome {
            Outcome::Done { run, periods, whole } => {
                any_stop |= run.fail_stop_events > 0;
                any_slow |= run.fail_slow_events > 0;
                if let Some(p) = periods {
                    period_sums = Some(period_sums.unwrap_or_default().merge(&p));
                }
                whole_sums = whole_sums.merge(&whole);
                runs.push(run);
            }
            Outcome::Diverged(d) => diverged.push(d),
        }
    }
    if runs.is_empty() {
        let d = diverged[0];
        return Err(Error::Diverged {
            stalled_periods: d.stalled_periods,
            elapsed: d.elapsed,
            committed_work: d.committed_work,
        });
    }

    let mut mean = RunningMean::default();
    runs.iter().for_each(|r| mean.push(r.tor));
    let mean_tor = mean.mean().expect("at least one run");
    let n = runs.len() as f64;
    let stddev = if runs.len() > 1 {
        let ss: f64 = crate::num::compensated_sum(runs.iter().map(|r| (r.tor - mean_tor).powi(2)));
        (ss / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let std_error = stddev / n.sqrt();
    let half = if runs.len() > 1 && std_error > 0.0 {
        let t = StudentsT::new(0.0, 1.0, n - 1.0)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        t * std_error
    } else {
        0.0
    };

    let class = if any_slow {
        FailureClass::FailSlow
    } else {
        FailureClass::FailStop
    };
    let realized_tor = if any_stop && any_slow {
        None
    } else {
        let sums = period_sums.unwrap_or(whole_sums);
        Some(realized_tor_from_sums(class, &sums)?.get())
    };

    Ok(MonteCarloSummary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        replications,
        completed: runs.len() as u64,
        mean_tor,
        stddev,
        std_error,
        ci95: [mean_tor - half, mean_tor + half],
        realized_tor,
        complete_periods: runs.iter().map(|r| r.complete_periods).sum(),
        runs,
        diverged,
    })
}
