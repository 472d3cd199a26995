//! Domain types shared by every estimator: units, stage labels and the
//! parameter bundles describing one failure-repair period.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-negative, finite duration in seconds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TimeSeconds(f64);

impl TimeSeconds {
    pub const ZERO: TimeSeconds = TimeSeconds(0.0);

    pub fn new(value: f64) -> Result<Self> {
        Self::checked("time", value)
    }

    pub(crate) fn checked(field: &str, value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            // normalises -0.0
            Ok(TimeSeconds(value + 0.0))
        } else {
            Err(Error::validation(
                field,
                format!("expected a finite, non-negative number of seconds, got {value}"),
            ))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for TimeSeconds {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        TimeSeconds::new(value)
    }
}

impl From<TimeSeconds> for f64 {
    fn from(t: TimeSeconds) -> f64 {
        t.0
    }
}

impl fmt::Display for TimeSeconds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// A dimensionless value in `[0, 1]`: performance preservation ratios and TOR itself.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Ratio(f64);

impl Ratio {
    pub const ZERO: Ratio = Ratio(0.0);
    pub const ONE: Ratio = Ratio(1.0);

    pub fn new(value: f64) -> Result<Self> {
        Self::checked("ratio", value)
    }

    pub(crate) fn checked(field: &str, value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Ratio(value + 0.0))
        } else {
            Err(Error::validation(
                field,
                format!("expected a ratio in [0, 1], got {value}"),
            ))
        }
    }

    /// Clamps tiny floating excursions outside `[0, 1]` produced by arithmetic
    /// on already-valid inputs.
    pub(crate) fn saturating(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        Ratio(value.clamp(0.0, 1.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Ratio {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Ratio::new(value)
    }
}

impl From<Ratio> for f64 {
    fn from(r: Ratio) -> f64 {
        r.0
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Optimal work rate (work units per second), strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct WorkRate(f64);

impl WorkRate {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(WorkRate(value))
        } else {
            Err(Error::validation(
                "w_opt",
                format!("expected a finite, positive work rate, got {value}"),
            ))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for WorkRate {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        WorkRate::new(value)
    }
}

impl From<WorkRate> for f64 {
    fn from(w: WorkRate) -> f64 {
        w.0
    }
}

/// What the system is doing during an interval of wall time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StageKind {
    SlowRecovery,
    HealthyRun,
    CheckpointSave,
    RollbackWaste,
    FailSlowDegraded,
    Repair,
}

impl StageKind {
    pub const ALL: [StageKind; 6] = [
        StageKind::SlowRecovery,
        StageKind::HealthyRun,
        StageKind::CheckpointSave,
        StageKind::RollbackWaste,
        StageKind::FailSlowDegraded,
        StageKind::Repair,
    ];

    /// The rate a stage is pinned to, if any. Slow recovery and fail-slow
    /// degradation carry a configurable rate.
    pub fn fixed_rate(self) -> Option<f64> {
        match self {
            StageKind::HealthyRun => Some(1.0),
            StageKind::CheckpointSave | StageKind::RollbackWaste | StageKind::Repair => Some(0.0),
            StageKind::SlowRecovery | StageKind::FailSlowDegraded => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StageKind::SlowRecovery => "SlowRecovery",
            StageKind::HealthyRun => "HealthyRun",
            StageKind::CheckpointSave => "CheckpointSave",
            StageKind::RollbackWaste => "RollbackWaste",
            StageKind::FailSlowDegraded => "FailSlowDegraded",
            StageKind::Repair => "Repair",
        }
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StageKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StageKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::validation("stage", format!("unknown stage `{s}`")))
    }
}

/// Raw, unvalidated fail-stop parameters. This is also the JSON shape.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailStopParams {
    #[serde(default)]
    pub t_sr: f64,
    #[serde(default)]
    pub r_sr: f64,
    #[serde(default)]
    pub t_h: f64,
    #[serde(default)]
    pub n_ckpt: u64,
    #[serde(default)]
    pub t_ckpt: f64,
    #[serde(default)]
    pub t_rb: f64,
    #[serde(default)]
    pub t_r: f64,
}

impl FailStopParams {
    pub fn build(self) -> Result<FailStopPeriod> {
        FailStopPeriod::try_from(self)
    }
}

/// One fail-stop failure-repair period: slow recovery, healthy run,
/// checkpointing, roll-back waste, repair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FailStopParams", into = "FailStopParams")]
pub struct FailStopPeriod {
    pub t_sr: TimeSeconds,
    pub r_sr: Ratio,
    pub t_h: TimeSeconds,
    pub n_ckpt: u64,
    pub t_ckpt: TimeSeconds,
    pub t_rb: TimeSeconds,
    pub t_r: TimeSeconds,
}

impl FailStopPeriod {
    /// Total checkpoint time `n_ckpt * t_ckpt`.
    pub fn checkpoint_time(&self) -> f64 {
        self.n_ckpt as f64 * self.t_ckpt.get()
    }

    /// Observed length of the period.
    pub fn duration(&self) -> f64 {
        self.t_sr.get() + self.t_h.get() + self.checkpoint_time() + self.t_rb.get() + self.t_r.get()
    }

    pub fn params(&self) -> FailStopParams {
        FailStopParams::from(*self)
    }
}

impl TryFrom<FailStopParams> for FailStopPeriod {
    type Error = Error;

    fn try_from(p: FailStopParams) -> Result<Self> {
        let period = FailStopPeriod {
            t_sr: TimeSeconds::checked("t_sr", p.t_sr)?,
            r_sr: Ratio::checked("r_sr", p.r_sr)?,
            t_h: TimeSeconds::checked("t_h", p.t_h)?,
            n_ckpt: p.n_ckpt,
            t_ckpt: TimeSeconds::checked("t_ckpt", p.t_ckpt)?,
            t_rb: TimeSeconds::checked("t_rb", p.t_rb)?,
            t_r: TimeSeconds::checked("t_r", p.t_r)?,
        };
        check_duration(period.duration())?;
        Ok(period)
    }
}

impl From<FailStopPeriod> for FailStopParams {
    fn from(p: FailStopPeriod) -> Self {
        FailStopParams {
            t_sr: p.t_sr.get(),
            r_sr: p.r_sr.get(),
            t_h: p.t_h.get(),
            n_ckpt: p.n_ckpt,
            t_ckpt: p.t_ckpt.get(),
            t_rb: p.t_rb.get(),
            t_r: p.t_r.get(),
        }
    }
}

/// Raw, unvalidated fail-slow parameters. This is also the JSON shape.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailSlowParams {
    #[serde(default)]
    pub t_sr: f64,
    #[serde(default)]
    pub r_sr: f64,
    #[serde(default)]
    pub t_h: f64,
    #[serde(default)]
    pub n_ckpt: u64,
    #[serde(default)]
    pub t_ckpt: f64,
    #[serde(default)]
    pub t_fs: f64,
    #[serde(default)]
    pub r_fs: f64,
    #[serde(default)]
    pub t_r: f64,
}

impl FailSlowParams {
    pub fn build(self) -> Result<FailSlowPeriod> {
        FailSlowPeriod::try_from(self)
    }
}

/// One fail-slow period: the run keeps going at a degraded rate `r_fs` for
/// `t_fs` before the repair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FailSlowParams", into = "FailSlowParams")]
pub struct FailSlowPeriod {
    pub t_sr: TimeSeconds,
    pub r_sr: Ratio,
    pub t_h: TimeSeconds,
    pub n_ckpt: u64,
    pub t_ckpt: TimeSeconds,
    pub t_fs: TimeSeconds,
    pub r_fs: Ratio,
    pub t_r: TimeSeconds,
}

impl FailSlowPeriod {
    pub fn checkpoint_time(&self) -> f64 {
        self.n_ckpt as f64 * self.t_ckpt.get()
    }

    pub fn duration(&self) -> f64 {
        self.t_sr.get() + self.t_h.get() + self.checkpoint_time() + self.t_fs.get() + self.t_r.get()
    }

    pub fn params(&self) -> FailSlowParams {
        FailSlowParams::from(*self)
    }
}

impl TryFrom<FailSlowParams> for FailSlowPeriod {
    type Error = Error;

    fn try_from(p: FailSlowParams) -> Result<Self> {
        let period = FailSlowPeriod {
            t_sr: TimeSeconds::checked("t_sr", p.t_sr)?,
            r_sr: Ratio::checked("r_sr", p.r_sr)?,
            t_h: TimeSeconds::checked("t_h", p.t_h)?,
            n_ckpt: p.n_ckpt,
            t_ckpt: TimeSeconds::checked("t_ckpt", p.t_ckpt)?,
            t_fs: TimeSeconds::checked("t_fs", p.t_fs)?,
            r_fs: Ratio::checked("r_fs", p.r_fs)?,
            t_r: TimeSeconds::checked("t_r", p.t_r)?,
        };
        check_duration(period.duration())?;
        Ok(period)
    }
}

impl From<FailSlowPeriod> for FailSlowParams {
    fn from(p: FailSlowPeriod) -> Self {
        FailSlowParams {
            t_sr: p.t_sr.get(),
            r_sr: p.r_sr.get(),
            t_h: p.t_h.get(),
            n_ckpt: p.n_ckpt,
            t_ckpt: p.t_ckpt.get(),
            t_fs: p.t_fs.get(),
            r_fs: p.r_fs.get(),
            t_r: p.t_r.get(),
        }
    }
}

fn check_duration(total: f64) -> Result<()> {
    if !total.is_finite() {
        return Err(Error::validation("period", "total duration overflows"));
    }
    if total <= 0.0 {
        return Err(Error::UndefinedMetric(
            "period has zero observed duration".into(),
        ));
    }
    Ok(())
}

/// Which failure class a period (or a realized stretch of a run) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureClass {
    FailStop,
    FailSlow,
}

impl fmt::Display for FailureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureClass::FailStop => "fail-stop",
            FailureClass::FailSlow => "fail-slow",
        })
    }
}

/// Either period kind, tagged by `"kind"` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PeriodSpec {
    FailStop(FailStopPeriod),
    FailSlow(FailSlowPeriod),
}

impl PeriodSpec {
    pub fn class(&self) -> FailureClass {
        match self {
            PeriodSpec::FailStop(_) => FailureClass::FailStop,
            PeriodSpec::FailSlow(_) => FailureClass::FailSlow,
        }
    }

    pub fn mtbf(&self) -> TimeSeconds {
        match self {
            PeriodSpec::FailStop(p) => mtbf_fail_stop(p),
            PeriodSpec::FailSlow(p) => mtbf_fail_slow(p),
        }
    }

    pub fn duration(&self) -> f64 {
        match self {
            PeriodSpec::FailStop(p) => p.duration(),
            PeriodSpec::FailSlow(p) => p.duration(),
        }
    }
}

impl From<FailStopPeriod> for PeriodSpec {
    fn from(p: FailStopPeriod) -> Self {
        PeriodSpec::FailStop(p)
    }
}

impl From<FailSlowPeriod> for PeriodSpec {
    fn from(p: FailSlowPeriod) -> Self {
        PeriodSpec::FailSlow(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub spec: PeriodSpec,
    /// Occurrence rate or relative frequency; normalised by consumers.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
struct RawMixture {
    components: Vec<MixtureComponent>,
}

/// Occurrence-weighted set of period specs for systems with several failure types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixture")]
pub struct FailureMixture {
    components: Vec<MixtureComponent>,
}

impl FailureMixture {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::validation(
                "components",
                "a mixture needs at least one component",
            ));
        }
        for (i, c) in components.iter().enumerate() {
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(Error::validation(
                    format!("components[{i}].weight"),
                    format!("weights must be finite and positive, got {}", c.weight),
                ));
            }
        }
        Ok(FailureMixture { components })
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn total_weight(&self) -> f64 {
        crate::num::compensated_sum(self.components.iter().map(|c| c.weight))
    }
}

impl TryFrom<RawMixture> for FailureMixture {
    type Error = Error;
    fn try_from(raw: RawMixture) -> Result<Self> {
        FailureMixture::new(raw.components)
    }
}

/// Fail-stop MTBF: `t_sr + t_h + n_ckpt * t_ckpt + t_rb`. Repair time is excluded.
pub fn mtbf_fail_stop(p: &FailStopPeriod) -> TimeSeconds {
    TimeSeconds(p.t_sr.get() + p.t_h.get() + p.checkpoint_time() + p.t_rb.get())
}

/// Fail-slow MTBF: `t_sr + t_h + n_ckpt * t_ckpt`.
///
/// The degraded interval `t_fs` is not part of it, so this is the time from
/// the end of a repair to the onset of the next degradation rather than a
/// full failure-to-failure gap.
pub fn mtbf_fail_slow(p: &FailSlowPeriod) -> TimeSeconds {
    TimeSeconds(p.t_sr.get() + p.t_h.get() + p.checkpoint_time())
}
