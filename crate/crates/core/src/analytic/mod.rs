//! Closed-form TOR for single failure-repair periods and for mixtures of
//! failure types.

mod mixture;

pub use mixture::{mixture_rules, MixtureRule, TimeComposite, WeightedMean};

use crate::error::{Error, Result};
use crate::model::{
    mtbf_fail_slow, mtbf_fail_stop, FailSlowPeriod, FailStopPeriod, FailureMixture, PeriodSpec,
    Ratio, StageKind, TimeSeconds,
};
use crate::num::compensated_sum;
use crate::timeline::{RateTimeline, Segment};

/// Relative tolerance for accepting a caller-supplied MTBF.
pub const MTBF_MATCH_TOLERANCE: f64 = 1e-9;

/// Stage-by-stage timeline of one period.
///
/// Checkpoint saves are consolidated into one `CheckpointSave` segment of
/// length `n_ckpt * t_ckpt`; TOR depends only on time per rate level, so the
/// placement of the pauses does not matter.
pub fn period_to_timeline(p: &PeriodSpec) -> RateTimeline {
    let seg = |d: f64, r: f64, stage| Segment::new(d, r, stage).expect("validated period");
    let segments = match p {
        PeriodSpec::FailStop(p) => vec![
            seg(p.t_sr.get(), p.r_sr.get(), StageKind::SlowRecovery),
            seg(p.t_h.get(), 1.0, StageKind::HealthyRun),
            seg(p.checkpoint_time(), 0.0, StageKind::CheckpointSave),
            seg(p.t_rb.get(), 0.0, StageKind::RollbackWaste),
            seg(p.t_r.get(), 0.0, StageKind::Repair),
        ],
        PeriodSpec::FailSlow(p) => vec![
            seg(p.t_sr.get(), p.r_sr.get(), StageKind::SlowRecovery),
            seg(p.t_h.get(), 1.0, StageKind::HealthyRun),
            seg(p.checkpoint_time(), 0.0, StageKind::CheckpointSave),
            seg(p.t_fs.get(), p.r_fs.get(), StageKind::FailSlowDegraded),
            seg(p.t_r.get(), 0.0, StageKind::Repair),
        ],
    };
    RateTimeline::new(segments).expect("validated periods have positive duration")
}

fn ratio(numerator: f64, denominator: f64) -> Result<Ratio> {
    if denominator <= 0.0 {
        return Err(Error::UndefinedMetric(format!(
            "observed time is {denominator}"
        )));
    }
    Ok(Ratio::saturating(numerator / denominator))
}

/// `(t_sr * r_sr + t_h) / (t_sr + t_h + n_ckpt * t_ckpt + t_rb + t_r)`.
pub fn tor_fail_stop(p: &FailStopPeriod) -> Result<Ratio> {
    let num = compensated_sum([p.t_sr.get() * p.r_sr.get(), p.t_h.get()]);
    let den = compensated_sum([
        p.t_sr.get(),
        p.t_h.get(),
        p.checkpoint_time(),
        p.t_rb.get(),
        p.t_r.get(),
    ]);
    ratio(num, den)
}

/// `(t_sr * r_sr + t_h + t_fs * r_fs) / (t_sr + t_h + n_ckpt * t_ckpt + t_fs + t_r)`.
pub fn tor_fail_slow(p: &FailSlowPeriod) -> Result<Ratio> {
    let num = compensated_sum([
        p.t_sr.get() * p.r_sr.get(),
        p.t_h.get(),
        p.t_fs.get() * p.r_fs.get(),
    ]);
    let den = compensated_sum([
        p.t_sr.get(),
        p.t_h.get(),
        p.checkpoint_time(),
        p.t_fs.get(),
        p.t_r.get(),
    ]);
    ratio(num, den)
}

pub fn tor_period(p: &PeriodSpec) -> Result<Ratio> {
    match p {
        PeriodSpec::FailStop(p) => tor_fail_stop(p),
        PeriodSpec::FailSlow(p) => tor_fail_slow(p),
    }
}

fn check_mtbf(given: TimeSeconds, expected: TimeSeconds) -> Result<()> {
    let (g, e) = (given.get(), expected.get());
    if (g - e).abs() > MTBF_MATCH_TOLERANCE * e.abs() {
        return Err(Error::validation(
            "mtbf",
            format!("{g} does not match the period's MTBF {e}"),
        ));
    }
    Ok(())
}

/// The MTBF form of the fail-stop ratio:
/// `(MTBF - t_sr (1 - r_sr) - t_rb - n_ckpt t_ckpt) / (MTBF + t_r)`.
///
/// `mtbf` must match [`mtbf_fail_stop`] of the same period.
pub fn tor_from_mtbf_fail_stop(mtbf: TimeSeconds, p: &FailStopPeriod) -> Result<Ratio> {
    check_mtbf(mtbf, mtbf_fail_stop(p))?;
    let m = mtbf.get();
    let num = compensated_sum([
        m,
        -p.t_sr.get() * (1.0 - p.r_sr.get()),
        -p.t_rb.get(),
        -p.checkpoint_time(),
    ]);
    ratio(num, m + p.t_r.get())
}

/// The MTBF form of the fail-slow ratio:
/// `(MTBF - t_sr (1 - r_sr) - n_ckpt t_ckpt + t_fs r_fs) / (MTBF + t_fs + t_r)`.
pub fn tor_from_mtbf_fail_slow(mtbf: TimeSeconds, p: &FailSlowPeriod) -> Result<Ratio> {
    check_mtbf(mtbf, mtbf_fail_slow(p))?;
    let m = mtbf.get();
    let num = compensated_sum([
        m,
        -p.t_sr.get() * (1.0 - p.r_sr.get()),
        -p.checkpoint_time(),
        p.t_fs.get() * p.r_fs.get(),
    ]);
    ratio(num, compensated_sum([m, p.t_fs.get(), p.t_r.get()]))
}

/// Occurrence-weighted mean of per-component TORs (weights normalised).
pub fn tor_mixture_weighted(m: &FailureMixture) -> Result<Ratio> {
    WeightedMean.combine(m)
}

/// Weights read as period counts: `sum w_i T_opt,i / sum w_i T_obs,i`.
pub fn tor_mixture_time_composite(m: &FailureMixture) -> Result<Ratio> {
    TimeComposite.combine(m)
}

/// Optimal-time content of one period (the closed-form numerator).
pub fn period_optimal_time(p: &PeriodSpec) -> f64 {
    match p {
        PeriodSpec::FailStop(p) => compensated_sum([p.t_sr.get() * p.r_sr.get(), p.t_h.get()]),
        PeriodSpec::FailSlow(p) => compensated_sum([
            p.t_sr.get() * p.r_sr.get(),
            p.t_h.get(),
            p.t_fs.get() * p.r_fs.get(),
        ]),
    }
}
