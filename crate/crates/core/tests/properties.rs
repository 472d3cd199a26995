use proptest::prelude::*;

use tor_core::analytic::{
    period_to_timeline, tor_fail_slow, tor_fail_stop, tor_from_mtbf_fail_slow, tor_from_mtbf_fail_stop,
    tor_mixture_time_composite, tor_mixture_weighted,
};
use tor_core::simulator::{simulate, DurationSpec, SimConfig};
use tor_core::timeline::{
    concat, integrate_optimal_time, observed_time, read_csv, repeat, stage_breakdown, tor_of_timeline, write_csv,
};
use tor_core::trace::{estimate_mtbf, parse_trace, trace_to_timeline, write_jsonl, TraceEvent};
use tor_core::{
    mtbf_fail_slow, mtbf_fail_stop, FailSlowParams, FailSlowPeriod, FailStopParams, FailStopPeriod, FailureMixture,
    MixtureComponent, PeriodSpec, RateTimeline, Ratio, StageKind, TimeSeconds,
};

fn fail_stop() -> impl Strategy<Value = FailStopPeriod> {
    (
        0.0..100.0f64,
        0.0..=1.0f64,
        1e-3..1_000.0f64,
        0u64..10,
        0.0..10.0f64,
        0.0..100.0f64,
        0.0..100.0f64,
    )
        .prop_map(|(t_sr, r_sr, t_h, n_ckpt, t_ckpt, t_rb, t_r)| {
            FailStopParams { t_sr, r_sr, t_h, n_ckpt, t_ckpt, t_rb, t_r }.build().unwrap()
        })
}

fn fail_slow() -> impl Strategy<Value = FailSlowPeriod> {
    (
        0.0..100.0f64,
        0.0..=1.0f64,
        1e-3..1_000.0f64,
        0u64..10,
        0.0..10.0f64,
        0.0..200.0f64,
        0.0..=1.0f64,
        0.0..100.0f64,
    )
        .prop_map(|(t_sr, r_sr, t_h, n_ckpt, t_ckpt, t_fs, r_fs, t_r)| {
            FailSlowParams { t_sr, r_sr, t_h, n_ckpt, t_ckpt, t_fs, r_fs, t_r }.build().unwrap()
        })
}

fn period() -> impl Strategy<Value = PeriodSpec> {
    prop_oneof![fail_stop().prop_map(PeriodSpec::from), fail_slow().prop_map(PeriodSpec::from)]
}

fn stage() -> impl Strategy<Value = StageKind> {
    proptest::sample::select(StageKind::ALL.to_vec())
}

fn segment() -> impl Strategy<Value = (f64, f64, StageKind)> {
    (1e-3..100.0f64, 0.0..=1.0f64, stage()).prop_map(|(d, r, s)| (d, s.fixed_rate().unwrap_or(r), s))
}

fn timeline() -> impl Strategy<Value = RateTimeline> {
    proptest::collection::vec(segment(), 1..30).prop_map(|parts| RateTimeline::from_parts(parts).unwrap())
}

fn events_of(tl: &RateTimeline) -> Vec<TraceEvent> {
    tl.windows()
        .map(|(a, b, s)| TraceEvent {
            t_start: TimeSeconds::new(a).unwrap(),
            t_end: TimeSeconds::new(b).unwrap(),
            stage: s.stage,
            rate: s.rate,
            note: None,
        })
        .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

proptest! {
    #[test]
    fn closed_form_matches_timeline(p in period()) {
        let tl = period_to_timeline(&p);
        let closed = match p {
            PeriodSpec::FailStop(q) => tor_fail_stop(&q).unwrap(),
            PeriodSpec::FailSlow(q) => tor_fail_slow(&q).unwrap(),
        };
        prop_assert!(close(closed.get(), tor_of_timeline(&tl).get(), 1e-12));
        prop_assert!((0.0..=1.0).contains(&closed.get()));
    }

    #[test]
    fn mtbf_forms_agree(a in fail_stop(), b in fail_slow()) {
        let via_stop = tor_from_mtbf_fail_stop(mtbf_fail_stop(&a), &a).unwrap().get();
        prop_assert!(close(via_stop, tor_fail_stop(&a).unwrap().get(), 1e-12));
        let via_slow = tor_from_mtbf_fail_slow(mtbf_fail_slow(&b), &b).unwrap().get();
        prop_assert!(close(via_slow, tor_fail_slow(&b).unwrap().get(), 1e-12));
        prop_assert!(mtbf_fail_stop(&a).get().is_finite() && mtbf_fail_slow(&b).get() >= 0.0);
    }

    #[test]
    fn mtbf_ignores_unrelated_fields(a in fail_stop(), b in fail_slow(), t in 0.0..500.0f64, r in 0.0..=1.0f64) {
        let mut q = a.params();
        q.t_r = t;
        prop_assert_eq!(mtbf_fail_stop(&q.build().unwrap()), mtbf_fail_stop(&a));
        let mut q = b.params();
        q.t_r = t;
        q.t_fs = t * 2.0;
        q.r_fs = r;
        prop_assert_eq!(mtbf_fail_slow(&q.build().unwrap()), mtbf_fail_slow(&b));
    }

    #[test]
    fn fail_stop_monotonicity(a in fail_stop(), bump in 0.1..10.0f64) {
        let base = tor_fail_stop(&a).unwrap().get();
        let tor = |f: &dyn Fn(&mut FailStopParams)| {
            let mut q = a.params();
            f(&mut q);
            tor_fail_stop(&q.build().unwrap()).unwrap().get()
        };
        prop_assert!(tor(&|q| q.t_r += bump) <= base);
        prop_assert!(tor(&|q| q.t_rb += bump) <= base);
        prop_assert!(tor(&|q| q.t_ckpt += bump) <= base);
        prop_assert!(tor(&|q| q.n_ckpt += 1) <= base);
        prop_assert!(tor(&|q| q.r_sr = (q.r_sr + 0.1).min(1.0)) >= base);
        prop_assert!(tor(&|q| q.t_h += bump) >= base);
    }

    #[test]
    fn weighted_mixture_is_a_convex_combination(
        parts in proptest::collection::vec((period(), 0.01..10.0f64), 1..6)
    ) {
        let tors: Vec<f64> = parts.iter().map(|(p, _)| tor_core::analytic::tor_period(p).unwrap().get()).collect();
        let m = FailureMixture::new(parts.iter().map(|&(spec, weight)| MixtureComponent { spec, weight }).collect()).unwrap();
        let w = tor_mixture_weighted(&m).unwrap().get();
        let lo = tors.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = tors.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(w >= lo - 1e-12 && w <= hi + 1e-12);
    }

    #[test]
    fn composite_mixture_matches_concatenation(a in period(), b in period(), k in 1usize..4) {
        // Integer weights: the composite equals `k` copies of `a` then one `b`.
        let m = FailureMixture::new(vec![
            MixtureComponent { spec: a, weight: k as f64 },
            MixtureComponent { spec: b, weight: 1.0 },
        ]).unwrap();
        let tl = concat(&[repeat(&period_to_timeline(&a), k).unwrap(), period_to_timeline(&b)]).unwrap();
        prop_assert!(close(tor_mixture_time_composite(&m).unwrap().get(), tor_of_timeline(&tl).get(), 1e-12));
    }

    #[test]
    fn composite_equals_weighted_for_equal_lengths(a in fail_stop(), r in 0.0..=1.0f64, w in 0.1..5.0f64) {
        // Same stage durations, different slow-recovery rate: equal observed time.
        let mut q = a.params();
        q.r_sr = r;
        let b = q.build().unwrap();
        let m = FailureMixture::new(vec![
            MixtureComponent { spec: a.into(), weight: 1.0 },
            MixtureComponent { spec: b.into(), weight: w },
        ]).unwrap();
        prop_assert!(close(tor_mixture_time_composite(&m).unwrap().get(), tor_mixture_weighted(&m).unwrap().get(), 1e-12));
    }

    #[test]
    fn timeline_tor_is_bounded(tl in timeline()) {
        let tor = tor_of_timeline(&tl).get();
        prop_assert!((0.0..=1.0).contains(&tor));
        let opt = integrate_optimal_time(&tl).get();
        let obs = observed_time(&tl).get();
        prop_assert!(opt <= obs);
        let all_full = tl.segments().iter().all(|s| s.rate == Ratio::ONE);
        prop_assert_eq!(opt == obs, all_full);
    }

    #[test]
    fn lost_time_accounts_for_the_gap(tl in timeline()) {
        let lost: f64 = stage_breakdown(&tl).values().map(|t| t.lost_time).sum();
        let gap = observed_time(&tl).get() - integrate_optimal_time(&tl).get();
        prop_assert!(close(lost, gap, 1e-9 * observed_time(&tl).get()));
    }

    #[test]
    fn splitting_preserves_tor(tl in timeline(), frac in 0.0..1.0f64) {
        let at = frac * observed_time(&tl).get();
        let split = tl.split_at(at);
        prop_assert!(split.len() >= tl.len());
        prop_assert!(close(tor_of_timeline(&split).get(), tor_of_timeline(&tl).get(), 1e-12));
    }

    #[test]
    fn repetition_preserves_tor(tl in timeline(), n in 1usize..20) {
        let rep = repeat(&tl, n).unwrap();
        prop_assert!(close(tor_of_timeline(&rep).get(), tor_of_timeline(&tl).get(), 1e-12));
    }

    #[test]
    fn csv_round_trip(tl in timeline()) {
        let mut buf = Vec::new();
        write_csv(&tl, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), tl.len());
        prop_assert!(close(tor_of_timeline(&back).get(), tor_of_timeline(&tl).get(), 1e-12));
    }

    #[test]
    fn trace_tor_ignores_resplitting(tl in timeline(), cuts in proptest::collection::vec(0.0..1.0f64, 0..5)) {
        let total = observed_time(&tl).get();
        let split = cuts.iter().fold(tl.clone(), |acc, c| acc.split_at(c * total));
        let a = trace_to_timeline(&events_of(&tl)).unwrap();
        let b = trace_to_timeline(&events_of(&split)).unwrap();
        prop_assert!(close(tor_of_timeline(&a).get(), tor_of_timeline(&b).get(), 1e-12));
    }

    #[test]
    fn jsonl_round_trip(tl in timeline()) {
        let events = events_of(&tl);
        let mut buf = Vec::new();
        write_jsonl(&events, &mut buf).unwrap();
        let back = parse_trace(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &events);
    }

    #[test]
    fn repeated_period_traces_recover_mtbf(p in period(), n in 1usize..12) {
        let tl = repeat(&period_to_timeline(&p), n).unwrap();
        let est = estimate_mtbf(&events_of(&tl)).unwrap();
        let expected = p.mtbf().get();
        let (got, t_r) = match p {
            PeriodSpec::FailStop(q) => (est.fail_stop_mtbf, q.t_r.get()),
            PeriodSpec::FailSlow(q) => (est.fail_slow_mtbf, q.t_r.get()),
        };
        // A zero-length repair leaves no period boundary to find.
        if t_r > 0.0 {
            let got = got.unwrap();
            prop_assert!(close(got, expected, 1e-9 * expected.max(1.0)), "{} vs {}", got, expected);
        }
    }
}

fn sim_config() -> impl Strategy<Value = SimConfig> {
    (
        0.5..4.0f64,
        100.0..2_000.0f64,
        10.0..100.0f64,
        0.0..5.0f64,
        2.0..20.0f64,
        prop_oneof![Just(0.0), 2.0..20.0f64],
        (0.0..20.0f64, 0.0..20.0f64, 0.0..40.0f64),
        (0.0..=1.0f64, 0.1..=1.0f64),
        any::<u64>(),
    )
        .prop_map(|(w_opt, work, interval, t_ckpt, stop, slow, (t_r, t_sr, t_fs), (r_sr, r_fs), seed)| {
            let mut cfg = SimConfig::failure_free(w_opt, work * w_opt, interval, t_ckpt).unwrap();
            cfg.fail_stop_rate = 1.0 / (interval * stop);
            cfg.fail_slow_rate = if slow > 0.0 { 1.0 / (interval * slow) } else { 0.0 };
            cfg.t_r_dist = DurationSpec::exponential(t_r);
            cfg.t_sr_dist = DurationSpec::fixed(t_sr);
            cfg.t_fs_dist = DurationSpec::lognormal(t_fs.max(1e-3), 0.5);
            cfg.r_sr = Ratio::new(r_sr).unwrap();
            cfg.r_fs = Ratio::new(r_fs).unwrap();
            cfg.seed = seed;
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simulation_invariants(cfg in sim_config()) {
        let res = simulate(&cfg).unwrap();
        let work = integrate_optimal_time(&res.timeline).get() * cfg.w_opt.get();
        prop_assert!(close(work, cfg.total_work, 1e-9 * cfg.total_work));
        prop_assert!(close(res.tor, tor_of_timeline(&res.timeline).get(), 1e-12));
        prop_assert!(close(res.tor, res.t_opt / res.t_obs, 1e-9));
        for s in res.timeline.segments().iter().filter(|s| s.stage == StageKind::RollbackWaste) {
            prop_assert!(s.duration.get() <= cfg.ckpt_interval + cfg.t_ckpt.get() + 1e-9);
        }
        prop_assert_eq!(&simulate(&cfg).unwrap().timeline, &res.timeline);
        prop_assert_eq!(&trace_to_timeline(res.trace_events()).unwrap(), &res.timeline);
    }
}
