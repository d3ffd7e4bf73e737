#![allow(dead_code)]

use impulsive_logistic::{CoefficientPair, ModelParams, PeriodicCoefficient};
use proptest::prelude::*;
use std::f64::consts::LN_2;

pub fn golden(e: f64) -> ModelParams {
    let pair = CoefficientPair::new(
        PeriodicCoefficient::constant(LN_2).unwrap(),
        PeriodicCoefficient::constant(100.0).unwrap(),
    )
    .unwrap();
    ModelParams::new(pair, e, 0.5).unwrap()
}

pub fn sinusoid_case(e: f64) -> ModelParams {
    let pair = CoefficientPair::new(
        PeriodicCoefficient::sinusoid(0.7, 0.2, 0.0).unwrap(),
        PeriodicCoefficient::constant(100.0).unwrap(),
    )
    .unwrap();
    ModelParams::new(pair, e, 0.5).unwrap()
}

/// Composite trapezoid rule, used as a brute-force reference.
pub fn trapezoid<F: Fn(f64) -> f64>(a: f64, b: f64, panels: usize, f: F) -> f64 {
    let h = (b - a) / panels as f64;
    let inner: f64 = (1..panels).map(|i| f(a + h * i as f64)).sum();
    h * (0.5 * f(a) + inner + 0.5 * f(b))
}

pub fn coefficient(scale: f64) -> impl Strategy<Value = PeriodicCoefficient> {
    let constant = (0.2f64..2.0).prop_map(move |v| PeriodicCoefficient::constant(v * scale).unwrap());
    let sinusoid = (0.3f64..2.0, 0.0f64..0.9, -3.0f64..3.0).prop_map(move |(m, frac, phase)| {
        PeriodicCoefficient::sinusoid(m * scale, m * scale * frac, phase).unwrap()
    });
    let piecewise = (1usize..4)
        .prop_flat_map(move |pieces| {
            (
                proptest::collection::vec(0.05f64..0.95, pieces - 1),
                proptest::collection::vec(0.2f64..2.0, pieces),
            )
        })
        .prop_filter_map("distinct breakpoints", move |(mut cuts, values)| {
            cuts.sort_by(f64::total_cmp);
            if cuts.windows(2).any(|w| w[1] - w[0] < 0.02) {
                return None;
            }
            let mut bps = vec![0.0];
            bps.extend(cuts);
            bps.push(1.0);
            PeriodicCoefficient::piecewise(bps, values.into_iter().map(|v| v * scale).collect()).ok()
        });
    prop_oneof![constant, sinusoid, piecewise]
}

pub fn pair() -> impl Strategy<Value = CoefficientPair> {
    (coefficient(1.0), coefficient(50.0)).prop_map(|(r, k)| CoefficientPair::new(r, k).unwrap())
}

pub fn params() -> impl Strategy<Value = ModelParams> {
    (pair(), 0.0f64..0.9, 0.05f64..3.0).prop_map(|(pair, e, t0)| ModelParams::new(pair, e, t0).unwrap())
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
