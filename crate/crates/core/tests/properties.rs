use proptest::prelude::*;
use wrps::flows::{check_cocycle, RandomOdeFlow, SdeLimitCycleFlow};
use wrps::paths::{
    sample_periodic, sample_two_sided_bm, BrownianSampler, PathSampler, PeriodPolicy, PeriodicPathEnsemble,
};
use wrps::stats::ks_two_sample;
use wrps::{FlowMap, Point, SamplePath};

fn bm(seed: u64) -> SamplePath {
    sample_two_sided_bm(seed, -6.0, 6.0, 1e-3).unwrap().with_period_tag(Some(1.7)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shift_is_a_flow(seed in 0u64..500, a in -2.0f64..2.0, b in -2.0f64..2.0, s in -1.5f64..1.5) {
        let p = bm(seed);
        let twice = p.shift(a).unwrap().shift(b).unwrap();
        let once = p.shift(a + b).unwrap();
        prop_assert!((twice.value(s).unwrap() - once.value(s).unwrap()).abs() <= 1e-12);
        prop_assert_eq!(twice.value(0.0).unwrap(), 0.0);
        prop_assert_eq!(twice.period_tag(), p.period_tag());
    }

    #[test]
    fn flows_satisfy_the_cocycle_law(
        seed in 0u64..500,
        s in -2.0f64..2.0,
        t in -2.0f64..2.0,
        rho in 0.0f64..2.0,
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let p = bm(seed);
        let x = Point::from_polar(rho, angle);
        for flow in [&RandomOdeFlow as &dyn FlowMap, &SdeLimitCycleFlow] {
            // Draws outside a flow's domain are not counterexamples.
            if let Ok(r) = check_cocycle(flow, &p, s, t, x) {
                prop_assert!(r <= 1e-8, "{}: {r}", flow.id());
            }
        }
    }

    #[test]
    fn flows_start_at_the_identity(seed in 0u64..500, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let p = bm(seed);
        let pt = Point::new(x, y);
        for flow in [&RandomOdeFlow as &dyn FlowMap, &SdeLimitCycleFlow] {
            prop_assert_eq!(flow.evaluate(0.0, &p, pt).unwrap(), pt);
        }
    }

    #[test]
    fn ensemble_paths_repeat_with_their_period(seed in 0u64..10_000) {
        let e = PeriodicPathEnsemble::standard();
        let p = sample_periodic(&e, seed, (-6.0, 6.0), 1e-3).unwrap();
        let period = p.period_tag().unwrap();
        let times = p.knot_times();
        for &s in times.iter().step_by(37).filter(|&&s| s + period <= p.window_hi()) {
            prop_assert!((p.value(s + period).unwrap() - p.value(s).unwrap()).abs() <= 1e-10);
        }
    }
}

#[test]
fn shift_preserves_the_increment_law() {
    let (a, b, t) = (0.2, 0.7, 0.37);
    let left = BrownianSampler::new(1, -1.0, 2.0, 1e-3, PeriodPolicy::None).unwrap();
    let right = left.with_seed(2);
    let mut plain = Vec::with_capacity(10_000);
    let mut shifted = Vec::with_capacity(10_000);
    for i in 0..10_000 {
        let p = left.sample(i).unwrap();
        plain.push(p.value(b).unwrap() - p.value(a).unwrap());
        let q = right.sample(i).unwrap().shift(t).unwrap();
        shifted.push(q.value(b).unwrap() - q.value(a).unwrap());
    }
    let ks = ks_two_sample(&plain, &shifted);
    assert!(ks.passes(0.01), "{ks:?}");
}
