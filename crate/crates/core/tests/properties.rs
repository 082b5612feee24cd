mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use tmsv_core::bayes::wrap_half_period;
use tmsv_core::fock_oracle::thin;
use tmsv_core::policy::predicted_average_sharpness;
use tmsv_core::signal::{parity_fock, port_distribution};
use tmsv_core::*;

fn outcome() -> impl Strategy<Value = Outcome> {
    prop_oneof![Just(Outcome::Even), Just(Outcome::Odd)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thinning_even_mass(s in 0usize..=30, eta in 0.0f64..=1.0) {
        let mut point = vec![0.0; s + 1];
        point[s] = 1.0;
        let thinned = thin(&point, eta).unwrap();
        let even: f64 = thinned.iter().step_by(2).sum();
        let closed = 0.5 * (1.0 + (1.0 - 2.0 * eta).powi(s as i32));
        prop_assert!((even - closed).abs() < 1e-12);
        prop_assert!((common::thinned_even_mass(s, eta) - closed).abs() < 1e-12);
        prop_assert!((thinned.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn port_distribution_normalised_with_fock_parity(n in 0usize..40, delta in -PI..PI) {
        let d = port_distribution(n, delta);
        prop_assert!(d.probs.iter().all(|&p| p >= -1e-14));
        prop_assert!((d.total() - 1.0).abs() < 1e-10);
        prop_assert!((d.parity_moment() - parity_fock(n, delta)).abs() < 1e-10);
    }

    #[test]
    fn signal_is_even_and_pi_periodic(nb in 0.1f64..8.0, eta in 0.0f64..=1.0, delta in -PI..PI) {
        let t = Table::build(&TableParams::new(nb, eta)).unwrap();
        let g = t.signal(delta);
        prop_assert!((g - t.signal(-delta)).abs() < 1e-13);
        prop_assert!((g - t.signal(delta + PI)).abs() < 1e-12);
        let pe = t.even_probability(0.3, 0.3 + delta);
        prop_assert!((0.0..=1.0).contains(&pe));
    }

    #[test]
    fn single_precision_table_tracks_double(nb in 0.5f64..5.0, eta in 0.5f64..=1.0, delta in 0.0f64..PI) {
        let params = TableParams::new(nb, eta);
        let t64 = Table::build(&params).unwrap();
        let t32 = Table32::build(&params).unwrap();
        prop_assert!((f64::from(t32.signal(delta as f32)) - t64.signal(delta)).abs() < 1e-4);
    }

    #[test]
    fn updates_keep_posterior_valid(
        steps in prop::collection::vec((outcome(), 0.0f64..PI), 1..12),
        nb in 0.5f64..4.0,
        eta in 0.8f64..=1.0,
    ) {
        let t = Table::build(&TableParams::new(nb, eta)).unwrap();
        let mut post = Posterior::flat();
        for (o, th) in steps {
            post = post.update(o, th, &t).unwrap();
        }
        prop_assert!(post.coefficients().iter().all(|a| a.norm() <= 1.0 + 1e-9));
        let s = post.sharpness();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&s));
        let curve = post.density_curve(512.max(2 * post.order() + 1)).unwrap();
        let step = PI / curve.len() as f64;
        let integral: f64 = curve.iter().map(|(_, d)| d * step).sum();
        prop_assert!((integral - 1.0).abs() < 1e-6);
        prop_assert!(curve.iter().all(|&(_, d)| d >= -1e-6));
    }

    #[test]
    fn updates_commute(
        o1 in outcome(), th1 in 0.0f64..PI,
        o2 in outcome(), th2 in 0.0f64..PI,
        nb in 0.5f64..3.0,
    ) {
        let t = Table::build(&TableParams::new(nb, 0.95)).unwrap();
        let p = Posterior::flat().update(Outcome::Even, 0.7, &t).unwrap();
        let a = p.update(o1, th1, &t).unwrap().update(o2, th2, &t).unwrap();
        let b = p.update(o2, th2, &t).unwrap().update(o1, th1, &t).unwrap();
        let n = a.order().max(b.order()) as isize;
        for k in 1..=n {
            prop_assert!((a.coefficient(k) - b.coefficient(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn estimate_follows_shift(
        steps in prop::collection::vec((outcome(), 0.0f64..PI), 3..8),
        shift in -PI..PI,
    ) {
        let t = Table::build(&TableParams::new(1.0, 1.0)).unwrap();
        let mut post = Posterior::flat();
        for (o, th) in steps {
            post = post.update(o, th, &t).unwrap();
        }
        prop_assume!(post.sharpness() > 1e-6);
        let before = post.estimate().unwrap();
        let after = post.shifted(shift).estimate().unwrap();
        prop_assert!(common::circular_distance(after, before + shift) < 1e-9);
    }

    #[test]
    fn wrapped_error_in_half_period(est in -10.0f64..10.0, truth in -FRAC_PI_2..FRAC_PI_2) {
        let e = wrapped_error(est, truth);
        prop_assert!(e > -FRAC_PI_2 && e <= FRAC_PI_2);
        prop_assert!(common::circular_distance(e, est - truth) < 1e-12);
        prop_assert_eq!(wrap_half_period(e), e);
    }

    #[test]
    fn predicted_sharpness_bounded_and_periodic(
        steps in prop::collection::vec((outcome(), 0.0f64..PI), 0..6),
        theta in 0.0f64..PI,
    ) {
        let t = Table::build(&TableParams::new(2.0, 0.9)).unwrap();
        let mut post = Posterior::flat();
        for (o, th) in steps {
            post = post.update(o, th, &t).unwrap();
        }
        let v = predicted_average_sharpness(&post, &t, theta);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        prop_assert!((v - predicted_average_sharpness(&post, &t, theta + PI)).abs() < 1e-12);
    }
}
