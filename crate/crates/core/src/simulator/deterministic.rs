use super::arrivals::ArrivalSchedule;
use super::dist::DurationSpec;
use super::{SimConfig, DEFAULT_WATCHDOG_PERIODS};
use crate::error::{Error, Result};
use crate::model::{mtbf_fail_slow, mtbf_fail_stop, PeriodSpec, Ratio, WorkRate};

/// A config whose simulation repeats `period` exactly `periods` times.
///
/// Fixed durations, `w_opt = 1` and a periodic failure schedule are chosen so
/// that failures land right after the `n_ckpt`-th checkpoint (fail-stop: after
/// `t_rb` further running time). The run starts with the failure effects of a
/// period and ends on its last checkpoint, so
/// its TOR equals the closed form of `period`.
///
/// Fail-stop needs `n_ckpt >= 1` and `t_rb` shorter than both one checkpoint
/// interval `(t_sr + t_h) / n_ckpt` and the period's optimal time
/// `t_sr * r_sr + t_h`; otherwise the last failure would land after the work
/// is done. Fail-slow needs `n_ckpt >= 1`.
pub fn deterministic_config(period: &PeriodSpec, periods: u64) -> Result<SimConfig> {
    if periods == 0 {
        return Err(Error::validation("periods", "must be at least 1"));
    }
    let n = periods as f64;
    let base = |total_work: f64, ckpt_interval: f64, t_ckpt, r_sr, r_fs| SimConfig {
        w_opt: WorkRate::new(1.0).expect("unit rate"),
        total_work,
        ckpt_interval,
        t_ckpt,
        fail_stop_rate: 0.0,
        fail_slow_rate: 0.0,
        t_r_dist: DurationSpec::default(),
        t_sr_dist: DurationSpec::default(),
        t_fs_dist: DurationSpec::default(),
        r_sr,
        r_fs,
        seed: 0,
        fail_stop_schedule: None,
        fail_slow_schedule: None,
        watchdog_periods: DEFAULT_WATCHDOG_PERIODS,
    };
    let cfg = match period {
        PeriodSpec::FailStop(p) => {
            let q = p.params();
            if q.n_ckpt == 0 {
                return Err(Error::validation("n_ckpt", "deterministic mode needs at least one checkpoint"));
            }
            let interval = (q.t_sr + q.t_h) / q.n_ckpt as f64;
            let work = q.t_sr * q.r_sr + q.t_h;
            let bound = interval.min(work);
            if q.t_rb >= bound {
                return Err(Error::validation(
                    "t_rb",
                    format!("must be shorter than both the checkpoint interval {interval} and the period's optimal time {work}"),
                ));
            }
            let mut cfg = base(
                n * work,
                interval,
                p.t_ckpt,
                p.r_sr,
                Ratio::ONE,
            );
            cfg.t_r_dist = DurationSpec::fixed(q.t_r);
            cfg.t_sr_dist = DurationSpec::fixed(q.t_sr);
            cfg.fail_stop_schedule = Some(ArrivalSchedule::Periodic {
                first: q.t_rb,
                interval: mtbf_fail_stop(p).get(),
            });
            cfg
        }
        PeriodSpec::FailSlow(p) => {
            let q = p.params();
            if q.n_ckpt == 0 {
                return Err(Error::validation("n_ckpt", "deterministic mode needs at least one checkpoint"));
            }
            let interval = (q.t_sr + q.t_h + q.t_fs) / q.n_ckpt as f64;
            let mut cfg = base(
                n * (q.t_sr * q.r_sr + q.t_h + q.t_fs * q.r_fs),
                interval,
                p.t_ckpt,
                p.r_sr,
                p.r_fs,
            );
            cfg.t_r_dist = DurationSpec::fixed(q.t_r);
            cfg.t_sr_dist = DurationSpec::fixed(q.t_sr);
            cfg.t_fs_dist = DurationSpec::fixed(q.t_fs);
            cfg.fail_slow_schedule = Some(ArrivalSchedule::Periodic {
                first: 0.0,
                interval: mtbf_fail_slow(p).get(),
            });
            cfg
        }
    };
    cfg.validate()?;
    Ok(cfg)
}
