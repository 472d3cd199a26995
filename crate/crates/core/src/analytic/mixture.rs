use std::sync::Arc;

use crate::error::Result;
use crate::model::{FailureMixture, Ratio};
use crate::num::CompensatedSum;
use crate::registry::{Named, Registry};

use super::{period_optimal_time, ratio, tor_period};

/// A way of folding per-failure-type periods into one system TOR.
pub trait MixtureRule: Named + Send + Sync {
    fn combine(&self, mixture: &FailureMixture) -> Result<Ratio>;
}

/// Per-component TORs averaged with normalised occurrence weights.
#[derive(Debug, Clone, Copy, Default)]
pub struct WeightedMean;

impl Named for WeightedMean {
    fn name(&self) -> &'static str {
        "weighted"
    }
    fn description(&self) -> &'static str {
        "occurrence-weighted mean of per-component TOR"
    }
}

impl MixtureRule for WeightedMean {
    fn combine(&self, mixture: &FailureMixture) -> Result<Ratio> {
        let mut num = CompensatedSum::new();
        let mut den = CompensatedSum::new();
        for c in mixture.components() {
            num.add(c.weight * tor_period(&c.spec)?.get());
            den.add(c.weight);
        }
        ratio(num.value(), den.value())
    }
}

/// Weights read as period counts; TOR of the concatenated timeline.
#[derive(Debug, Clone, Copy, Default)]
pub struct TimeComposite;

impl Named for TimeComposite {
    fn name(&self) -> &'static str {
        "composite"
    }
    fn description(&self) -> &'static str {
        "weights as period counts: total optimal time over total observed time"
    }
}

impl MixtureRule for TimeComposite {
    fn combine(&self, mixture: &FailureMixture) -> Result<Ratio> {
        let mut num = CompensatedSum::new();
        let mut den = CompensatedSum::new();
        for c in mixture.components() {
            num.add(c.weight * period_optimal_time(&c.spec));
            den.add(c.weight * c.spec.duration());
        }
        ratio(num.value(), den.value())
    }
}

pub fn mixture_rules() -> Registry<dyn MixtureRule> {
    let mut r: Registry<dyn MixtureRule> = Registry::new("mixture rule");
    r.register(Arc::new(WeightedMean)).register(Arc::new(TimeComposite));
    r
}
