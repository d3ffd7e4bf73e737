//! Period-1 piecewise-continuous coefficient functions `r(t)` and `K(t)`.
//!
//! Every coefficient is positive, has period exactly 1 and at most finitely
//! many jumps per period. At a jump the function takes its left limit, so
//! a piecewise-constant coefficient with breakpoints `0 = b0 < b1 < ... < bm = 1`
//! equals `c_i` on `(b_{i-1}, b_i]`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{CompositeRule, Estimate};

/// Reduces `t` to `[0, 1)`.
pub fn fractional(t: f64) -> f64 {
    let f = t - t.floor();
    // t slightly below an integer can round up to exactly 1.0
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PeriodicCoefficient {
    Constant {
        value: f64,
    },
    /// `mean + amp * sin(2*pi*t + phase)`
    Sinusoid {
        mean: f64,
        amp: f64,
        #[serde(default)]
        phase: f64,
    },
    #[serde(rename = "piecewise")]
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

impl PeriodicCoefficient {
    pub fn constant(value: f64) -> Result<Self> {
        let c = Self::Constant { value };
        c.validate()?;
        Ok(c)
    }

    pub fn sinusoid(mean: f64, amp: f64, phase: f64) -> Result<Self> {
        let c = Self::Sinusoid { mean, amp, phase };
        c.validate()?;
        Ok(c)
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let c = Self::PiecewiseConstant {
            breakpoints,
            values,
        };
        c.validate()?;
        Ok(c)
    }

    /// Checks positivity, finiteness and breakpoint ordering.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidCoefficient(msg));
        match self {
            Self::Constant { value } => {
                if !(value.is_finite() && *value > 0.0) {
                    return bad(format!("constant value must be positive and finite, got {value}"));
                }
            }
            Self::Sinusoid { mean, amp, phase } => {
                if !(mean.is_finite() && amp.is_finite() && phase.is_finite()) {
                    return bad("sinusoid parameters must be finite".into());
                }
                if *mean <= amp.abs() {
                    return bad(format!(
                        "sinusoid must stay positive: mean {mean} must exceed |amp| {}",
                        amp.abs()
                    ));
                }
            }
            Self::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                if breakpoints.len() < 2 {
                    return bad("piecewise coefficient needs at least two breakpoints".into());
                }
                if values.len() + 1 != breakpoints.len() {
                    return bad(format!(
                        "piecewise coefficient has {} breakpoints but {} values (expected {})",
                        breakpoints.len(),
                        values.len(),
                        breakpoints.len() - 1
                    ));
                }
                if breakpoints[0] != 0.0 || breakpoints[breakpoints.len() - 1] != 1.0 {
                    return bad("piecewise breakpoints must start at 0 and end at 1".into());
                }
                if breakpoints.windows(2).any(|w| w[0].is_nan() || w[0] >= w[1]) {
                    return bad("piecewise breakpoints must be strictly increasing".into());
                }
                if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                    return bad(format!("piecewise values must be positive and finite, got {v}"));
                }
            }
        }
        Ok(())
    }

    /// Value at `t`, using the left limit at jumps.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Sinusoid { mean, amp, phase } => mean + amp * (TAU * fractional(t) + phase).sin(),
            Self::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let f = fractional(t);
                if f == 0.0 {
                    // t is an integer: the left limit comes from the last piece
                    return values[values.len() - 1];
                }
                let i = breakpoints[1..].partition_point(|&b| b < f);
                values[i.min(values.len() - 1)]
            }
        }
    }

    /// Right limit at `t`. Differs from [`eval`](Self::eval) only at jumps.
    pub fn eval_right(&self, t: f64) -> f64 {
        match self {
            Self::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let f = fractional(t);
                let i = breakpoints[1..].partition_point(|&b| b <= f);
                values[i.min(values.len() - 1)]
            }
            _ => self.eval(t),
        }
    }

    /// Interior breakpoints in `[0, 1)` at which the coefficient may jump.
    /// `0` is included for piecewise coefficients (the period boundary).
    pub fn breakpoints(&self) -> &[f64] {
        match self {
            Self::PiecewiseConstant { breakpoints, .. } => &breakpoints[..breakpoints.len() - 1],
            _ => &[],
        }
    }

    /// Exact `∫_0^t c(τ) dτ` for `t` in `[0, 1]`.
    fn integral_within_period(&self, f: f64) -> f64 {
        match self {
            Self::Constant { value } => value * f,
            Self::Sinusoid { mean, amp, phase } => {
                mean * f - amp / TAU * ((TAU * f + phase).cos() - phase.cos())
            }
            Self::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let mut acc = 0.0;
                for (w, v) in breakpoints.windows(2).zip(values) {
                    if f <= w[0] {
                        break;
                    }
                    acc += v * (f.min(w[1]) - w[0]);
                }
                acc
            }
        }
    }

    /// Exact integral over one full period.
    pub fn period_integral(&self) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Sinusoid { mean, .. } => *mean,
            Self::PiecewiseConstant { .. } => self.integral_within_period(1.0),
        }
    }

    /// Mean value over one period.
    pub fn mean(&self) -> f64 {
        self.period_integral()
    }

    /// Exact `∫_a^b c(τ) dτ`.
    pub fn antiderivative_between(&self, a: f64, b: f64) -> Result<f64> {
        if a > b {
            return Err(Error::ReversedInterval { a, b });
        }
        Ok(self.integral_unchecked(a, b))
    }

    pub(crate) fn integral_unchecked(&self, a: f64, b: f64) -> f64 {
        if let Self::Constant { value } = self {
            return value * (b - a);
        }
        let (na, nb) = (a.floor(), b.floor());
        let (fa, fb) = (a - na, b - nb);
        let whole = nb - na;
        whole * self.period_integral() + self.integral_within_period(fb)
            - self.integral_within_period(fa)
    }
}

/// Growth rate and carrying capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientPair {
    pub r: PeriodicCoefficient,
    #[serde(rename = "K")]
    pub k: PeriodicCoefficient,
}

impl CoefficientPair {
    pub fn new(r: PeriodicCoefficient, k: PeriodicCoefficient) -> Result<Self> {
        let pair = Self { r, k };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        self.r
            .validate()
            .map_err(|e| Error::InvalidCoefficient(format!("r: {e}")))?;
        self.k
            .validate()
            .map_err(|e| Error::InvalidCoefficient(format!("K: {e}")))
    }

    /// `r(t) / K(t)`.
    pub fn ratio(&self, t: f64) -> f64 {
        self.r.eval(t) / self.k.eval(t)
    }

    /// Absolute times in `(a, b)` where either coefficient may jump, sorted.
    pub fn breakpoints_in(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if b <= a {
            return out;
        }
        let local: Vec<f64> = self
            .r
            .breakpoints()
            .iter()
            .chain(self.k.breakpoints())
            .copied()
            .collect();
        if local.is_empty() {
            return out;
        }
        let mut n = a.floor();
        while n < b {
            for &bp in &local {
                let t = n + bp;
                if t > a && t < b {
                    out.push(t);
                }
            }
            n += 1.0;
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `∫_a^b (r/K)(s) exp(-∫_s^b r) ds`, the kernel shared by `B` and the
    /// per-interval solution formula.
    pub fn damped_ratio_integral(&self, a: f64, b: f64, rule: &CompositeRule) -> f64 {
        let splits = self.breakpoints_in(a, b);
        rule.integrate(a, b, &splits, |s| {
            self.ratio(s) * (-self.r.integral_unchecked(s, b)).exp()
        })
    }

    pub(crate) fn damped_ratio_estimate(&self, a: f64, b: f64, rule: &CompositeRule) -> Estimate {
        let splits = self.breakpoints_in(a, b);
        rule.integrate_with_estimate(a, b, &splits, |s| {
            self.ratio(s) * (-self.r.integral_unchecked(s, b)).exp()
        })
    }
}

/// `A = exp ∫_0^1 r`.
pub fn compute_a(r: &PeriodicCoefficient) -> f64 {
    r.period_integral().exp()
}

/// `B = ∫_{t0}^{t0+1} (r/K)(s) exp(-∫_s^{t0+1} r) ds`.
pub fn compute_b(pair: &CoefficientPair, t0: f64) -> Result<f64> {
    Ok(compute_b_with(pair, t0, &CompositeRule::default())?.value)
}

/// `B` with an explicit quadrature rule and an error estimate.
pub fn compute_b_with(pair: &CoefficientPair, t0: f64, rule: &CompositeRule) -> Result<Estimate> {
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(Error::InvalidParams(format!("t0 must be positive, got {t0}")));
    }
    Ok(pair.damped_ratio_estimate(t0, t0 + 1.0, rule))
}
