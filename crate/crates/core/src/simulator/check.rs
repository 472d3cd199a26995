use super::SimResult;
use crate::analytic::tor_period;
use crate::error::{Error, Result};
use crate::model::{FailureClass, Ratio};
use crate::trace::StageSums;

/// Closed form evaluated at the run's realized per-period means.
///
/// Uses the complete periods of the run's failure class. A run without any
/// complete period (including a failure-free run) falls back to the sums of
/// the whole timeline, which reproduces `res.tor`.
pub fn realized_period_tor_check(res: &SimResult) -> Result<Ratio> {
    let class = match (res.fail_stop_events, res.fail_slow_events) {
        (s, f) if s > 0 && f > 0 => {
            return Err(Error::Unsupported(format!(
                "run mixes {s} fail-stop and {f} fail-slow failures; use the timeline TOR"
            )))
        }
        (_, f) if f > 0 => FailureClass::FailSlow,
        _ => FailureClass::FailStop,
    };
    let means = match class {
        FailureClass::FailStop => res.period_means.fail_stop,
        FailureClass::FailSlow => res.period_means.fail_slow,
    };
    match means {
        Some(m) => realized_tor_from_sums(class, &m.totals),
        None => realized_tor_from_sums(class, &StageSums::of_timeline(&res.timeline)),
    }
}

/// Closed form of `class` at the given stage totals. Means and totals give the
/// same ratio, since both sides of the closed form are linear in stage times.
pub fn realized_tor_from_sums(class: FailureClass, sums: &StageSums) -> Result<Ratio> {
    tor_period(&sums.as_period(class)?)
}
