//! Duration models for repair, slow-recovery and degradation times.
//!
//! In configs a duration is `{"kind": "<name>", ...params}`; the kind is
//! looked up in [`duration_families`].

use std::fmt::Debug;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::registry::{Named, Registry};

use super::SimRng;

pub trait DurationModel: Debug + Send + Sync {
    fn sample(&self, rng: &mut SimRng) -> f64;
    fn mean(&self) -> f64;
}

/// Builds a [`DurationModel`] from its JSON parameters.
pub trait DurationFamily: Named + Send + Sync {
    fn build(&self, params: &Map<String, Value>) -> Result<Box<dyn DurationModel>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationSpec {
    pub kind: String,
    #[serde(flatten)]
    pub params: Map<String, Value>,
}

impl DurationSpec {
    pub fn fixed(value: f64) -> Self {
        let mut params = Map::new();
        params.insert("value".into(), Value::from(value));
        DurationSpec {
            kind: "fixed".into(),
            params,
        }
    }

    pub fn exponential(mean: f64) -> Self {
        let mut params = Map::new();
        params.insert("mean".into(), Value::from(mean));
        DurationSpec {
            kind: "exponential".into(),
            params,
        }
    }

    pub fn lognormal(median: f64, sigma: f64) -> Self {
        let mut params = Map::new();
        params.insert("median".into(), Value::from(median));
        params.insert("sigma".into(), Value::from(sigma));
        DurationSpec {
            kind: "lognormal".into(),
            params,
        }
    }

    pub fn build(&self, field: &str) -> Result<Box<dyn DurationModel>> {
        let family = duration_families().get(&self.kind).map_err(|e| {
            Error::validation(field, e.to_string())
        })?;
        family
            .build(&self.params)
            .map_err(|e| Error::validation(field, e.to_string()))
    }
}

impl Default for DurationSpec {
    fn default() -> Self {
        DurationSpec::fixed(0.0)
    }
}

fn params<T: DeserializeOwned>(p: &Map<String, Value>) -> Result<T> {
    Ok(serde_json::from_value(Value::Object(p.clone()))?)
}

fn non_negative(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::validation(name, format!("must be finite and non-negative, got {v}")))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Fixed(pub f64);

impl DurationModel for Fixed {
    fn sample(&self, _: &mut SimRng) -> f64 {
        self.0
    }
    fn mean(&self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Exponential {
    mean: f64,
    dist: Option<Exp<f64>>,
}

impl Exponential {
    pub fn new(mean: f64) -> Result<Self> {
        let mean = non_negative("mean", mean)?;
        let dist = if mean > 0.0 {
            Some(Exp::new(1.0 / mean).map_err(|e| Error::validation("mean", e.to_string()))?)
        } else {
            None
        };
        Ok(Exponential { mean, dist })
    }
}

impl DurationModel for Exponential {
    fn sample(&self, rng: &mut SimRng) -> f64 {
        self.dist.map_or(0.0, |d| d.sample(rng))
    }
    fn mean(&self) -> f64 {
        self.mean
    }
}

/// Log-normal parameterised by its median `exp(mu)` and shape `sigma`.
#[derive(Debug, Clone, Copy)]
pub struct LogNormalDuration {
    median: f64,
    sigma: f64,
    dist: LogNormal<f64>,
}

impl LogNormalDuration {
    pub fn new(median: f64, sigma: f64) -> Result<Self> {
        if !(median.is_finite() && median > 0.0) {
            return Err(Error::validation("median", format!("must be positive, got {median}")));
        }
        let sigma = non_negative("sigma", sigma)?;
        let dist = LogNormal::new(median.ln(), sigma)
            .map_err(|e| Error::validation("sigma", e.to_string()))?;
        Ok(LogNormalDuration { median, sigma, dist })
    }
}

impl DurationModel for LogNormalDuration {
    fn sample(&self, rng: &mut SimRng) -> f64 {
        self.dist.sample(rng)
    }
    fn mean(&self) -> f64 {
        self.median * (self.sigma * self.sigma / 2.0).exp()
    }
}

struct FixedFamily;
struct ExponentialFamily;
struct LogNormalFamily;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixedParams {
    value: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExponentialParams {
    mean: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LogNormalParams {
    median: f64,
    sigma: f64,
}

impl Named for FixedFamily {
    fn name(&self) -> &'static str {
        "fixed"
    }
    fn description(&self) -> &'static str {
        "constant duration `value`"
    }
}

impl DurationFamily for FixedFamily {
    fn build(&self, p: &Map<String, Value>) -> Result<Box<dyn DurationModel>> {
        let FixedParams { value } = params(p)?;
        Ok(Box::new(Fixed(non_negative("value", value)?)))
    }
}

impl Named for ExponentialFamily {
    fn name(&self) -> &'static str {
        "exponential"
    }
    fn description(&self) -> &'static str {
        "exponential with the given `mean`"
    }
}

impl DurationFamily for ExponentialFamily {
    fn build(&self, p: &Map<String, Value>) -> Result<Box<dyn DurationModel>> {
        let ExponentialParams { mean } = params(p)?;
        Ok(Box::new(Exponential::new(mean)?))
    }
}

impl Named for LogNormalFamily {
    fn name(&self) -> &'static str {
        "lognormal"
    }
    fn description(&self) -> &'static str {
        "log-normal with `median` and log-space standard deviation `sigma`"
    }
}

impl DurationFamily for LogNormalFamily {
    fn build(&self, p: &Map<String, Value>) -> Result<Box<dyn DurationModel>> {
        let LogNormalParams { median, sigma } = params(p)?;
        Ok(Box::new(LogNormalDuration::new(median, sigma)?))
    }
}

pub fn duration_families() -> Registry<dyn DurationFamily> {
    let mut r: Registry<dyn DurationFamily> = Registry::new("duration model");
    r.register(Arc::new(FixedFamily))
        .register(Arc::new(ExponentialFamily))
        .register(Arc::new(LogNormalFamily));
    r
}

/// Exponential inter-arrival sampling for Poisson failure processes.
pub(crate) fn exponential_gap(rate: f64, rng: &mut SimRng) -> f64 {
    if rate > 0.0 {
        // 1 - U is in (0, 1], so the log is finite
        -(1.0 - rng.random::<f64>()).ln() / rate
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn registry_builds_each_family() {
        let mut rng = SimRng::seed_from_u64(1);
        assert_eq!(DurationSpec::fixed(4.0).build("t_r").unwrap().sample(&mut rng), 4.0);
        let exp = DurationSpec::exponential(2.0).build("t_r").unwrap();
        let n = 20_000;
        let mean = (0..n).map(|_| exp.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 0.1, "{mean}");
        let ln = DurationSpec::lognormal(3.0, 0.0).build("t_r").unwrap();
        assert!((ln.sample(&mut rng) - 3.0).abs() < 1e-12);
        assert!((DurationSpec::lognormal(1.0, 1.0).build("x").unwrap().mean() - 0.5f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn bad_specs_name_the_field() {
        let spec: DurationSpec = serde_json::from_str(r#"{"kind":"weibull","shape":2}"#).unwrap();
        let err = spec.build("t_sr_dist").unwrap_err().to_string();
        assert!(err.contains("t_sr_dist") && err.contains("weibull"), "{err}");

        let spec: DurationSpec = serde_json::from_str(r#"{"kind":"exponential","median":2}"#).unwrap();
        assert!(spec.build("t_r_dist").is_err());
        assert!(DurationSpec::fixed(-1.0).build("t_r_dist").is_err());
    }
}
