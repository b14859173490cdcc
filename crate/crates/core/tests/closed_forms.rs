use approx::assert_relative_eq;
use ehaoi_core::engine::{average_penalty, avg_aoi_from_moments, avg_peak_from_stats};
use ehaoi_core::{closed_form_penalty, fcfs, lcfs, update_stats, Discipline, Error, PenaltySpec, SystemParams};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = SystemParams> {
    (0.05f64..0.95, 0usize..30, 1usize..30, 0.2f64..5.0)
        .prop_map(|(theta, k, b, r)| SystemParams::from_theta(theta, r, k, b).unwrap())
}

fn discipline() -> impl Strategy<Value = Discipline> {
    prop_oneof![Just(Discipline::Fcfs), Just(Discipline::Lcfs)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distributions_are_well_formed(p in params(), d in discipline()) {
        let s = update_stats(&p, d).unwrap();
        prop_assert!(s.valid_rate > 0.0 && s.valid_rate <= p.lambda * (1.0 + 1e-15));
        prop_assert_eq!(s.peak.atom_at_zero, 0.0);
        s.peak.check().unwrap();
        s.sojourn.check().unwrap();
    }

    #[test]
    fn closed_forms_match_engine(p in params(), d in discipline(), beta in 0.1f64..20.0, alpha in -1.0f64..1.0) {
        let s = update_stats(&p, d).unwrap();
        let lin = closed_form_penalty(&p, d, &PenaltySpec::linear()).unwrap();
        prop_assert!((avg_aoi_from_moments(&s).unwrap() - lin).abs() <= 1e-8 * lin);
        let step = PenaltySpec::step(beta).unwrap();
        let closed = closed_form_penalty(&p, d, &step).unwrap();
        let engine = average_penalty(&s, &step).unwrap().value;
        prop_assert!((closed - engine).abs() <= 1e-8 * closed.max(1e-6), "{} vs {}", closed, engine);
        if alpha.abs() > 1e-3 && alpha < 0.9 * p.lambda {
            let e = PenaltySpec::exponential(alpha).unwrap();
            let closed = closed_form_penalty(&p, d, &e).unwrap();
            let engine = average_penalty(&s, &e).unwrap().value;
            prop_assert!((closed - engine).abs() <= 1e-7 * closed, "{} vs {}", closed, engine);
        }
    }

    #[test]
    fn peak_mean_is_interval_plus_sojourn(p in params(), d in discipline()) {
        let s = update_stats(&p, d).unwrap();
        let expect = 1.0 / s.valid_rate + s.sojourn.mean().unwrap();
        prop_assert!((avg_peak_from_stats(&s).unwrap() - expect).abs() <= 1e-9 * expect);
    }

    #[test]
    fn lcfs_never_worse_than_fcfs(p in params(), beta in 0.1f64..20.0) {
        prop_assert!(lcfs::avg_aoi(&p).unwrap() <= fcfs::avg_aoi(&p).unwrap() * (1.0 + 1e-12));
        prop_assert!(lcfs::violation_prob(&p, beta).unwrap() <= fcfs::violation_prob(&p, beta).unwrap() + 1e-12);
    }

    #[test]
    fn peak_tail_bounds_violation(p in params(), beta in 0.0f64..30.0) {
        let (peak, aoi) = fcfs::peak_violation_bound_check(&p, beta).unwrap();
        prop_assert!(peak + 1e-12 >= aoi);
    }

    #[test]
    fn min_battery_brackets(lambda in 0.1f64..0.9, k in 0usize..10, slack in 0.01f64..3.0) {
        let delta = (1.0 + slack) / lambda;
        match fcfs::min_battery_for_aoi(lambda, 1.0, k, delta) {
            Ok(b) => {
                let p = SystemParams::new(lambda, 1.0, k, b).unwrap();
                prop_assert!(fcfs::avg_aoi(&p).unwrap() <= delta);
                if b > 1 {
                    prop_assert!(fcfs::avg_aoi(&p.with_battery(b - 1).unwrap()).unwrap() > delta);
                }
            }
            Err(Error::Infeasible(_)) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}

#[test]
fn buffer_zero_is_finite() {
    for theta in [0.1, 0.5, 0.9] {
        let p = SystemParams::from_theta(theta, 1.0, 0, 2).unwrap();
        for d in Discipline::ALL {
            for spec in [PenaltySpec::linear(), PenaltySpec::step(1.0).unwrap(), PenaltySpec::exponential(-0.5).unwrap()] {
                assert!(closed_form_penalty(&p, d, &spec).unwrap().is_finite());
            }
        }
    }
}

#[test]
fn extreme_capacities_stay_finite() {
    for theta in [0.01, 0.5, 0.99] {
        let p = SystemParams::from_theta(theta, 1.0, 500, 500).unwrap();
        for d in Discipline::ALL {
            let s = update_stats(&p, d).unwrap();
            let c = closed_form_penalty(&p, d, &PenaltySpec::linear()).unwrap();
            assert!(c.is_finite() && c > 0.0);
            assert!(s.valid_rate.is_finite());
        }
    }
}

#[test]
fn lcfs_valid_rate_falls_with_buffer() {
    let mut prev = f64::INFINITY;
    for k in 0..=20 {
        let v = lcfs::valid_rate(&SystemParams::from_theta(0.5, 1.0, k, 1).unwrap()).unwrap();
        assert!(v < prev);
        prev = v;
    }
}

#[test]
fn custom_penalty_uses_engine_only() {
    let p = SystemParams::from_theta(0.5, 1.0, 3, 2).unwrap();
    let sq = PenaltySpec::custom("sq", |x| x * x, 0.0, 1.0).unwrap();
    assert!(matches!(
        closed_form_penalty(&p, Discipline::Fcfs, &sq),
        Err(Error::UnsupportedPenalty(_))
    ));
    // g = x^2 gives lambda~ (E[A^3] - E[T^3]) / 3
    let s = update_stats(&p, Discipline::Fcfs).unwrap();
    let expect = s.valid_rate * (s.peak.moment(3).unwrap() - s.sojourn.moment(3).unwrap()) / 3.0;
    let got = average_penalty(&s, &sq).unwrap();
    assert_relative_eq!(got.value, expect, max_relative = 1e-7);
}
