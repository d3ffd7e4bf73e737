mod common;

use common::{coefficient, pair, rel, trapezoid};
use impulsive_logistic::coefficients::compute_b_with;
use impulsive_logistic::quadrature::CompositeRule;
use impulsive_logistic::{compute_a, compute_b, CoefficientPair, PeriodicCoefficient};
use proptest::prelude::*;

/// Reference for B: trapezoid rule on the exact integrand. Only valid for
/// coefficients without jumps.
fn b_reference(pair: &CoefficientPair, t0: f64, panels: usize) -> f64 {
    let end = t0 + 1.0;
    let kernel = |s: f64| {
        let r = pair.r.eval(s) / pair.k.eval(s);
        r * (-pair.r.antiderivative_between(s, end).unwrap()).exp()
    };
    trapezoid(t0, end, panels, kernel)
}

#[test]
fn b_sinusoid_matches_brute_force() {
    let pair = CoefficientPair::new(
        PeriodicCoefficient::sinusoid(0.7, 0.2, 0.0).unwrap(),
        PeriodicCoefficient::constant(100.0).unwrap(),
    )
    .unwrap();
    let reference = b_reference(&pair, 0.5, 1_000_000);
    let b = compute_b(&pair, 0.5).unwrap();
    assert!(rel(b, reference) <= 1e-10, "B = {b}, reference = {reference}");
}

#[test]
fn b_sinusoid_carrying_capacity_matches_brute_force() {
    let pair = CoefficientPair::new(
        PeriodicCoefficient::sinusoid(1.1, 0.6, 0.4).unwrap(),
        PeriodicCoefficient::sinusoid(40.0, 15.0, -1.0).unwrap(),
    )
    .unwrap();
    let reference = b_reference(&pair, 1.3, 1_000_000);
    assert!(rel(compute_b(&pair, 1.3).unwrap(), reference) <= 1e-10);
}

#[test]
fn b_constant_closed_form() {
    // B = (1 - e^{-r0}) / K0 for constant coefficients
    for (r0, k0) in [(0.3, 7.0), (std::f64::consts::LN_2, 100.0), (2.5, 0.5)] {
        let pair = CoefficientPair::new(
            PeriodicCoefficient::constant(r0).unwrap(),
            PeriodicCoefficient::constant(k0).unwrap(),
        )
        .unwrap();
        let expected = -(-r0).exp_m1() / k0;
        assert!(rel(compute_b(&pair, 0.7).unwrap(), expected) <= 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eval_has_period_one(c in coefficient(1.0), t in -50.0f64..50.0, n in -20i32..20) {
        let shifted = t + n as f64;
        // skip points where the shift rounds across a jump
        prop_assume!(c.breakpoints().iter().all(|&b| {
            let f = t - t.floor();
            (f - b).abs() > 1e-9 && (1.0 - f).abs() > 1e-9
        }));
        let (a, b) = (c.eval(t), c.eval(shifted));
        prop_assert!((a - b).abs() <= 1e-9 * a.abs());
    }

    #[test]
    fn eval_is_positive(c in coefficient(1.0), t in -10.0f64..10.0) {
        prop_assert!(c.eval(t) > 0.0);
        prop_assert!(c.eval_right(t) > 0.0);
    }

    #[test]
    fn antiderivative_is_additive(c in coefficient(1.0), a in -5.0f64..5.0, d1 in 0.0f64..3.0, d2 in 0.0f64..3.0) {
        let (b, e) = (a + d1, a + d1 + d2);
        let whole = c.antiderivative_between(a, e).unwrap();
        let parts = c.antiderivative_between(a, b).unwrap() + c.antiderivative_between(b, e).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * (1.0 + whole.abs()));
    }

    #[test]
    fn antiderivative_matches_quadrature(c in coefficient(1.0), a in -3.0f64..3.0, len in 0.0f64..2.5) {
        let b = a + len;
        let pair = CoefficientPair::new(c.clone(), c.clone()).unwrap();
        let splits = pair.breakpoints_in(a, b);
        let numeric = CompositeRule::default().integrate(a, b, &splits, |t| c.eval(t));
        let exact = c.antiderivative_between(a, b).unwrap();
        prop_assert!((numeric - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn a_is_window_invariant(c in coefficient(1.0), start in -20.0f64..20.0) {
        let window = c.antiderivative_between(start, start + 1.0).unwrap().exp();
        prop_assert!(rel(window, compute_a(&c)) <= 1e-12);
        prop_assert!(compute_a(&c) > 1.0);
    }

    #[test]
    fn b_is_window_invariant(p in pair(), t0 in 0.05f64..5.0, k in 1u32..=5) {
        let base = compute_b(&p, t0).unwrap();
        let shifted = compute_b(&p, t0 + k as f64).unwrap();
        prop_assert!(base > 0.0);
        prop_assert!(rel(shifted, base) <= 1e-12, "base {} shifted {}", base, shifted);
    }

    #[test]
    fn b_refinement_within_estimate(p in pair(), t0 in 0.05f64..3.0) {
        let est = compute_b_with(&p, t0, &CompositeRule::with_panels(8)).unwrap();
        let finer = compute_b_with(&p, t0, &CompositeRule::with_panels(16)).unwrap();
        prop_assert!((finer.value - est.value).abs() <= est.error);
    }
}
