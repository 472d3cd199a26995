#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tor_core::simulator::{DurationSpec, SimConfig};
use tor_core::{FailSlowParams, FailSlowPeriod, FailStopParams, FailStopPeriod, Ratio};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_fail_stop(rng: &mut impl Rng) -> FailStopPeriod {
    FailStopParams {
        t_sr: rng.random_range(0.0..100.0),
        r_sr: rng.random_range(0.0..=1.0),
        t_h: rng.random_range(1e-3..1_000.0),
        n_ckpt: rng.random_range(0..10),
        t_ckpt: rng.random_range(0.0..10.0),
        t_rb: rng.random_range(0.0..100.0),
        t_r: rng.random_range(0.0..100.0),
    }
    .build()
    .expect("valid fail-stop period")
}

pub fn random_fail_slow(rng: &mut impl Rng) -> FailSlowPeriod {
    FailSlowParams {
        t_sr: rng.random_range(0.0..100.0),
        r_sr: rng.random_range(0.0..=1.0),
        t_h: rng.random_range(1e-3..1_000.0),
        n_ckpt: rng.random_range(0..10),
        t_ckpt: rng.random_range(0.0..10.0),
        t_fs: rng.random_range(0.0..200.0),
        r_fs: rng.random_range(0.0..=1.0),
        t_r: rng.random_range(0.0..100.0),
    }
    .build()
    .expect("valid fail-slow period")
}

/// Every duration strictly positive and `r_sr < 1`, so each perturbation
/// moves the ratio strictly.
pub fn random_strict_fail_stop(rng: &mut impl Rng) -> FailStopPeriod {
    FailStopParams {
        t_sr: rng.random_range(1.0..100.0),
        r_sr: rng.random_range(0.0..0.99),
        t_h: rng.random_range(1.0..1_000.0),
        n_ckpt: rng.random_range(0..10),
        t_ckpt: rng.random_range(0.1..10.0),
        t_rb: rng.random_range(1.0..100.0),
        t_r: rng.random_range(1.0..100.0),
    }
    .build()
    .expect("valid fail-stop period")
}

pub fn random_strict_fail_slow(rng: &mut impl Rng) -> FailSlowPeriod {
    FailSlowParams {
        t_sr: rng.random_range(1.0..100.0),
        r_sr: rng.random_range(0.0..0.99),
        t_h: rng.random_range(1.0..1_000.0),
        n_ckpt: rng.random_range(0..10),
        t_ckpt: rng.random_range(0.1..10.0),
        t_fs: rng.random_range(1.0..200.0),
        r_fs: rng.random_range(0.0..0.99),
        t_r: rng.random_range(1.0..100.0),
    }
    .build()
    .expect("valid fail-slow period")
}

fn random_duration(rng: &mut impl Rng, max_mean: f64) -> DurationSpec {
    let mean = rng.random_range(0.0..max_mean);
    match rng.random_range(0..3) {
        0 => DurationSpec::fixed(mean),
        1 => DurationSpec::exponential(mean),
        _ => DurationSpec::lognormal(mean, rng.random_range(0.1..1.0)),
    }
}

/// Stochastic config with both failure classes and random duration families,
/// sized so that failures are rare next to the checkpoint interval.
pub fn random_sim_config(rng: &mut impl Rng) -> SimConfig {
    let w_opt = rng.random_range(0.5..5.0);
    let ckpt_interval = rng.random_range(10.0..100.0);
    let mut cfg = SimConfig::failure_free(
        w_opt,
        w_opt * rng.random_range(200.0..3_000.0),
        ckpt_interval,
        rng.random_range(0.0..5.0),
    )
    .expect("valid config");
    cfg.fail_stop_rate = 1.0 / (ckpt_interval * rng.random_range(2.0..20.0));
    cfg.fail_slow_rate = if rng.random_bool(0.5) {
        1.0 / (ckpt_interval * rng.random_range(2.0..20.0))
    } else {
        0.0
    };
    cfg.t_r_dist = random_duration(rng, 20.0);
    cfg.t_sr_dist = random_duration(rng, 20.0);
    cfg.t_fs_dist = random_duration(rng, 40.0);
    cfg.r_sr = Ratio::new(rng.random_range(0.0..=1.0)).unwrap();
    cfg.r_fs = Ratio::new(rng.random_range(0.1..=1.0)).unwrap();
    cfg.seed = rng.random();
    cfg
}

/// Fail-stop config with Fixed durations and Poisson arrivals.
pub fn fixed_duration_fail_stop(total_work: f64, seed: u64) -> SimConfig {
    let mut cfg = SimConfig::failure_free(1.0, total_work, 60.0, 2.0).unwrap();
    cfg.fail_stop_rate = 1.0 / 300.0;
    cfg.t_r_dist = DurationSpec::fixed(10.0);
    cfg.t_sr_dist = DurationSpec::fixed(5.0);
    cfg.r_sr = Ratio::new(0.5).unwrap();
    cfg.seed = seed;
    cfg
}

/// Fail-stop period whose simulated replay runs on exact binary fractions.
pub fn integer_fail_stop() -> FailStopPeriod {
    FailStopParams {
        t_sr: 2.0,
        r_sr: 0.5,
        t_h: 88.0,
        n_ckpt: 3,
        t_ckpt: 1.0,
        t_rb: 5.0,
        t_r: 10.0,
    }
    .build()
    .unwrap()
}

pub fn integer_fail_slow() -> FailSlowPeriod {
    FailSlowParams {
        t_sr: 2.0,
        r_sr: 0.5,
        t_h: 90.0,
        n_ckpt: 3,
        t_ckpt: 1.0,
        t_fs: 10.0,
        r_fs: 0.25,
        t_r: 5.0,
    }
    .build()
    .unwrap()
}

pub fn worked_fail_stop() -> FailStopPeriod {
    FailStopParams {
        t_sr: 2.0,
        r_sr: 0.5,
        t_h: 90.0,
        n_ckpt: 3,
        t_ckpt: 1.0,
        t_rb: 5.0,
        t_r: 10.0,
    }
    .build()
    .unwrap()
}

pub fn worked_fail_slow() -> FailSlowPeriod {
    FailSlowParams {
        t_sr: 2.0,
        r_sr: 0.5,
        t_h: 90.0,
        n_ckpt: 3,
        t_ckpt: 1.0,
        t_fs: 10.0,
        r_fs: 0.4,
        t_r: 5.0,
    }
    .build()
    .unwrap()
}
