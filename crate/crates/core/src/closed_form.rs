//! Analytic solution formulas of the impulsive logistic equation
//!
//! ```text
//! x' = r(t) (1 - x / K(t)) x,   t != t0 + k
//! x(t0 + k) = (1 - E) x((t0 + k)^-),   k = 1, 2, ...
//! ```
//!
//! On every impulse-free interval `[t0 + k, t0 + k + 1)` the solution is the
//! reciprocal of a linear combination of `exp(-∫ r)` and the damped ratio
//! integral `C(t) = ∫_{t0+k}^t (r/K)(s) exp(-∫_s^t r) ds`. All interval
//! formulas below share that structure; they differ only in the weights.

use serde::{Deserialize, Serialize};

use crate::coefficients::{compute_a, compute_b_with, CoefficientPair};
use crate::error::{Error, Result};
use crate::quadrature::CompositeRule;

/// Band around `q = 1` treated as the threshold itself: no periodic orbit,
/// and the geometric impulse sum takes its `q = 1` limit.
pub const THRESHOLD_TOL: f64 = 1e-12;

/// A full problem instance: coefficients, harvest fraction and anchor time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(flatten)]
    pub pair: CoefficientPair,
    #[serde(rename = "E")]
    pub harvest: f64,
    pub t0: f64,
}

impl ModelParams {
    pub fn new(pair: CoefficientPair, harvest: f64, t0: f64) -> Result<Self> {
        let p = Self { pair, harvest, t0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.pair.validate()?;
        if !(self.harvest.is_finite() && (0.0..1.0).contains(&self.harvest)) {
            return Err(Error::InvalidParams(format!(
                "harvest fraction E must lie in [0, 1), got {}",
                self.harvest
            )));
        }
        if !(self.t0.is_finite() && self.t0 > 0.0) {
            return Err(Error::InvalidParams(format!("t0 must be positive, got {}", self.t0)));
        }
        Ok(())
    }

    /// Time of the `k`-th impulse, `t0 + k`.
    pub fn impulse_time(&self, k: u64) -> f64 {
        self.t0 + k as f64
    }

    /// The same model anchored `k` periods later.
    pub fn shifted(&self, k: u64) -> Self {
        Self {
            t0: self.impulse_time(k),
            ..self.clone()
        }
    }

    /// Index `k` with `t` in `[t0 + k, t0 + k + 1)`, consistent with the
    /// floating-point impulse times returned by [`ModelParams::impulse_time`].
    pub fn interval_index(&self, t: f64) -> Result<u64> {
        if t.is_nan() || t < self.t0 {
            return Err(Error::BeforeStart { t, t0: self.t0 });
        }
        let mut k = (t - self.t0).floor().max(0.0) as u64;
        while t >= self.impulse_time(k + 1) {
            k += 1;
        }
        while k > 0 && t < self.impulse_time(k) {
            k -= 1;
        }
        Ok(k)
    }
}

/// Quantities derived once per model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionConstants {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    /// Growth factor `(1 - E) A`.
    pub q: f64,
    /// Post-impulse value of the periodic orbit, when one exists.
    pub x0_star: Option<f64>,
}

impl SolutionConstants {
    pub fn has_periodic_solution(&self) -> bool {
        self.x0_star.is_some()
    }
}

pub fn derive_constants(params: &ModelParams) -> Result<SolutionConstants> {
    constants_with(params, &CompositeRule::default())
}

fn constants_with(params: &ModelParams, rule: &CompositeRule) -> Result<SolutionConstants> {
    params.validate()?;
    let a = compute_a(&params.pair.r);
    let b = compute_b_with(&params.pair, params.t0, rule)?.value;
    let q = (1.0 - params.harvest) * a;
    let x0_star = (q > 1.0 + THRESHOLD_TOL).then(|| (q - 1.0) / (a * b));
    Ok(SolutionConstants { a, b, q, x0_star })
}

/// A validated model together with its cached constants.
#[derive(Debug, Clone)]
pub struct Model {
    params: ModelParams,
    constants: SolutionConstants,
    rule: CompositeRule,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        Self::with_rule(params, CompositeRule::default())
    }

    pub fn with_rule(params: ModelParams, rule: CompositeRule) -> Result<Self> {
        let constants = constants_with(&params, &rule)?;
        Ok(Self {
            params,
            constants,
            rule,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn constants(&self) -> &SolutionConstants {
        &self.constants
    }

    fn require_periodic(&self) -> Result<f64> {
        self.constants
            .x0_star
            .ok_or(Error::NoPeriodicSolution { q: self.constants.q })
    }

    /// `(∫_{t0+k}^t r, C(t))` for `t` in the closed interval `[t0+k, t0+k+1]`.
    fn interval_terms(&self, k: u64, t: f64) -> (f64, f64) {
        let start = self.params.impulse_time(k);
        let growth = self.params.pair.r.integral_unchecked(start, t);
        let damped = self.params.pair.damped_ratio_integral(start, t, &self.rule);
        (growth, damped)
    }

    /// Per-interval solution formula on interval `k`, valid on its closure.
    fn solution_on_interval(&self, x0: f64, k: u64, t: f64) -> f64 {
        let SolutionConstants { a, b, q, .. } = self.constants;
        let (growth, damped) = self.interval_terms(k, t);
        let kf = k as f64;
        let ln_q = q.ln();
        // q^-k e^-R / x0, assembled in log space
        let initial = (-kf * ln_q - growth - x0.ln()).exp();
        let impulse_sum = if (q - 1.0).abs() < THRESHOLD_TOL {
            kf
        } else {
            -(-kf * ln_q).exp_m1() / (q - 1.0)
        };
        let harvested = a * b * impulse_sum * (-growth).exp();
        1.0 / (initial + harvested + damped)
    }

    fn periodic_on_interval(&self, k: u64, t: f64) -> f64 {
        let SolutionConstants { a, b, q, .. } = self.constants;
        let (growth, damped) = self.interval_terms(k, t);
        (q - 1.0) / (a * b * (-growth).exp() + (q - 1.0) * damped)
    }

    fn check_x0(x0: f64) -> Result<()> {
        if x0.is_finite() && x0 > 0.0 {
            Ok(())
        } else {
            Err(Error::NonPositiveInitial(x0))
        }
    }

    /// Solution with `x(t0) = x0`, evaluated at `t >= t0`. At an impulse time
    /// the post-impulse value is returned.
    pub fn solution_at(&self, x0: f64, t: f64) -> Result<f64> {
        Self::check_x0(x0)?;
        let k = self.params.interval_index(t)?;
        Ok(self.solution_on_interval(x0, k, t))
    }

    /// Pre-impulse value `x((t0 + k)^-)` of the solution with `x(t0) = x0`.
    pub fn solution_left_limit(&self, x0: f64, k: u64) -> Result<f64> {
        Self::check_x0(x0)?;
        if k == 0 {
            return Err(Error::InvalidArgument("impulse index must be at least 1".into()));
        }
        Ok(self.solution_on_interval(x0, k - 1, self.params.impulse_time(k)))
    }

    /// The positive period-1 solution, evaluated at `t >= t0`.
    pub fn periodic_solution_at(&self, t: f64) -> Result<f64> {
        self.require_periodic()?;
        let k = self.params.interval_index(t)?;
        Ok(self.periodic_on_interval(k, t))
    }

    /// Left limit of the periodic solution at the `k`-th impulse, from the
    /// interval formula evaluated at its right end.
    pub fn periodic_left_limit(&self, k: u64) -> Result<f64> {
        self.require_periodic()?;
        if k == 0 {
            return Err(Error::InvalidArgument("impulse index must be at least 1".into()));
        }
        Ok(self.periodic_on_interval(k - 1, self.params.impulse_time(k)))
    }

    /// The earlier published periodic formula
    /// `(q - 1) / (A ∫_t^{t+1} (r/K)(s) exp(-∫_s^{t+1} r) ds)`.
    /// It is continuous at impulse times and so cannot satisfy the jump
    /// condition when `E > 0`; it is kept to make that failure checkable.
    pub fn legacy_periodic_at(&self, t: f64) -> Result<f64> {
        self.require_periodic()?;
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("t must be finite, got {t}")));
        }
        let SolutionConstants { a, q, .. } = self.constants;
        let window = self.params.pair.damped_ratio_integral(t, t + 1.0, &self.rule);
        Ok((q - 1.0) / (a * window))
    }

    /// Exact `(pre, post)` values of the periodic orbit at impulse `k`.
    pub fn one_sided_limits(&self, k: u64) -> Result<(f64, f64)> {
        let post = self.require_periodic()?;
        if k == 0 {
            return Err(Error::InvalidArgument("impulse index must be at least 1".into()));
        }
        let pre = post / (1.0 - self.params.harvest);
        Ok((pre, post))
    }

    /// Post-impulse state one period after starting from `x0` just after an impulse.
    pub fn poincare_map(&self, x0: f64) -> Result<f64> {
        Self::check_x0(x0)?;
        let SolutionConstants { a, b, .. } = self.constants;
        Ok((1.0 - self.params.harvest) * a * x0 / (1.0 + x0 * a * b))
    }

    /// Time average of the periodic orbit over one period.
    pub fn periodic_mean(&self) -> Result<f64> {
        self.require_periodic()?;
        let (lo, hi) = (self.params.t0, self.params.impulse_time(1));
        let splits = self.params.pair.breakpoints_in(lo, hi);
        let outer = CompositeRule::with_panels(16);
        Ok(outer.integrate(lo, hi, &splits, |t| self.periodic_on_interval(0, t)))
    }
}
