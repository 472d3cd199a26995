//! Training Overhead Ratio (TOR): the ratio of optimal to observed training
//! time for fault-tolerant training systems.
//!
//! TOR is computed three independent ways and cross-checked:
//!
//! * [`analytic`]: closed forms for one fail-stop or fail-slow failure-repair
//!   period, and occurrence-weighted mixtures of them;
//! * [`simulator`]: a discrete-event simulation of a run with random
//!   failures, checkpoints, roll-back and recovery;
//! * [`trace`]: reconstruction of r(t) from a pre-classified event log.
//!
//! All three meet in [`timeline`], where r(t) is piecewise constant and its
//! integral is an exact sum.

pub mod analytic;
pub mod error;
pub mod model;
pub mod num;
pub mod registry;
pub mod timeline;

pub use error::{Error, Result};
pub use model::{
    mtbf_fail_slow, mtbf_fail_stop, FailSlowParams, FailSlowPeriod, FailStopParams,
    FailStopPeriod, FailureClass, FailureMixture, MixtureComponent, PeriodSpec, Ratio, StageKind,
    TimeSeconds, WorkRate,
};
pub use timeline::{RateTimeline, Segment};
pub mod trace;
pub mod simulator;
pub mod cli;
