//! Fixed-step RK4 integration of the impulsive logistic equation.
//!
//! Impulse times sit exactly on step boundaries, and every coefficient
//! breakpoint becomes an extra step boundary, so each RK4 step only sees a
//! smooth right-hand side. The jump `x <- (1 - E) x` is applied algebraically.

use serde::{Deserialize, Serialize};

use crate::closed_form::ModelParams;
use crate::coefficients::PeriodicCoefficient;
use crate::error::{Error, Result};

/// Step size control. `step` must divide the unit interval evenly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub step: f64,
    /// When set, the step is halved until two successive resolutions agree
    /// to this relative tolerance at every impulse and at the end time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_target: Option<f64>,
}

impl Default for StepControl {
    fn default() -> Self {
        Self::fixed(1.0 / 256.0)
    }
}

impl StepControl {
    pub fn fixed(step: f64) -> Self {
        Self {
            step,
            error_target: None,
        }
    }

    /// Number of steps per unit interval.
    pub fn steps_per_unit(&self) -> Result<u64> {
        let h = self.step;
        if !(h.is_finite() && h > 0.0 && h <= 1.0) {
            return Err(Error::InvalidStep(format!("step must lie in (0, 1], got {h}")));
        }
        let n = (1.0 / h).round();
        if (n * h - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidStep(format!(
                "step {h} does not divide the unit interval into an integer number of steps"
            )));
        }
        if let Some(eps) = self.error_target {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::InvalidStep(format!("error target must be positive, got {eps}")));
            }
        }
        Ok(n as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpulseEvent {
    pub k: u64,
    pub time: f64,
    pub pre_value: f64,
    pub post_value: f64,
}

/// Integrated states between two consecutive impulses (or the end time).
/// The last node of a segment that ends at an impulse holds the pre-impulse value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub k: u64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub k: u64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ModelParams,
    pub x0: f64,
    pub step: f64,
    pub segments: Vec<Segment>,
    pub events: Vec<ImpulseEvent>,
    /// Largest relative change against the previous halving, when step
    /// halving was requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halving_error: Option<f64>,
}

impl Trajectory {
    pub fn start(&self) -> f64 {
        self.params.t0
    }

    pub fn end(&self) -> f64 {
        let last = self.segments.last().expect("trajectory has at least one segment");
        last.times[last.times.len() - 1]
    }

    pub fn final_value(&self) -> f64 {
        let last = self.segments.last().expect("trajectory has at least one segment");
        last.values[last.values.len() - 1]
    }

    /// All samples in time order. A segment's terminal pre-impulse node is
    /// omitted; the post-impulse value at the same time opens the next segment.
    pub fn samples(&self) -> Vec<Sample> {
        let n = self.segments.len();
        let mut out = Vec::new();
        for (i, seg) in self.segments.iter().enumerate() {
            let keep = if i + 1 < n { seg.times.len() - 1 } else { seg.times.len() };
            out.extend(
                seg.times[..keep]
                    .iter()
                    .zip(&seg.values[..keep])
                    .map(|(&t, &x)| Sample { t, k: seg.k, x }),
            );
        }
        out
    }

    /// Value at `t` by monotone cubic interpolation within the segment
    /// containing `t`. At an impulse time the post-impulse value is returned.
    pub fn sample(&self, t: f64) -> Result<f64> {
        let (start, end) = (self.start(), self.end());
        if !(t >= start && t <= end) {
            return Err(Error::OutsideSpan { t, start, end });
        }
        let idx = self.segments.partition_point(|s| s.times[0] <= t);
        let seg = &self.segments[idx.saturating_sub(1)];
        Ok(monotone_cubic(&seg.times, &seg.values, t))
    }
}

/// Closed-form flow of `x' = r0 (1 - x/K0) x` over `dt >= 0`.
pub fn exact_constant_flow(r0: f64, k0: f64, x_start: f64, dt: f64) -> f64 {
    let growth = (r0 * dt).exp_m1();
    k0 * x_start * (growth + 1.0) / (k0 + x_start * growth)
}

/// Exact impulsive solution for constant coefficients: whole periods of flow
/// followed by the jump, then the remaining partial period. `elapsed` is `t - t0`.
pub fn exact_constant_solution(r0: f64, k0: f64, harvest: f64, x0: f64, elapsed: f64) -> f64 {
    let whole = elapsed.floor().max(0.0);
    let mut x = x0;
    for _ in 0..whole as u64 {
        x = (1.0 - harvest) * exact_constant_flow(r0, k0, x, 1.0);
    }
    exact_constant_flow(r0, k0, x, elapsed - whole)
}

// Steps never straddle a jump, so piecewise-constant coefficients are read at
// the step midpoint. Reading them at a step end would let rounding of the
// fractional part pick the neighbouring piece.
fn coefficient_on_step(c: &PeriodicCoefficient, t: f64, mid: f64) -> f64 {
    match c {
        PeriodicCoefficient::PiecewiseConstant { .. } => c.eval(mid),
        _ => c.eval(t),
    }
}

fn rhs(params: &ModelParams, t: f64, x: f64, mid: f64) -> f64 {
    let r = coefficient_on_step(&params.pair.r, t, mid);
    let k = coefficient_on_step(&params.pair.k, t, mid);
    r * (1.0 - x / k) * x
}

fn rk4_step(params: &ModelParams, t: f64, x: f64, h: f64) -> f64 {
    let half = 0.5 * h;
    let mid = t + half;
    let k1 = rhs(params, t, x, mid);
    let k2 = rhs(params, mid, x + half * k1, mid);
    let k3 = rhs(params, mid, x + half * k2, mid);
    let k4 = rhs(params, t + h, x + h * k3, mid);
    x + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
}

/// Integrates from `x(t0) = x0` up to `t_end`, applying every impulse with
/// `t0 + k <= t_end`.
pub fn integrate(params: &ModelParams, x0: f64, t_end: f64, ctrl: &StepControl) -> Result<Trajectory> {
    params.validate()?;
    if !(x0.is_finite() && x0 > 0.0) {
        return Err(Error::NonPositiveInitial(x0));
    }
    if !(t_end.is_finite() && t_end > params.t0) {
        return Err(Error::InvalidArgument(format!(
            "t_end = {t_end} must exceed t0 = {}",
            params.t0
        )));
    }
    let n = ctrl.steps_per_unit()?;
    let mut traj = integrate_fixed(params, x0, t_end, n)?;
    let Some(target) = ctrl.error_target else {
        return Ok(traj);
    };
    let mut n = n;
    for _ in 0..12 {
        let finer = integrate_fixed(params, x0, t_end, 2 * n)?;
        let change = checkpoint_change(&traj, &finer);
        traj = finer;
        traj.halving_error = Some(change);
        n *= 2;
        if change <= target {
            break;
        }
    }
    Ok(traj)
}

fn checkpoint_change(coarse: &Trajectory, fine: &Trajectory) -> f64 {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    coarse
        .events
        .iter()
        .zip(&fine.events)
        .map(|(c, f)| rel(c.pre_value, f.pre_value))
        .chain(std::iter::once(rel(coarse.final_value(), fine.final_value())))
        .fold(0.0, f64::max)
}

fn integrate_fixed(params: &ModelParams, x0: f64, t_end: f64, steps_per_unit: u64) -> Result<Trajectory> {
    let h = 1.0 / steps_per_unit as f64;
    let mut segments = Vec::new();
    let mut events = Vec::new();
    let mut x = x0;
    let mut k = 0u64;
    loop {
        let start = params.impulse_time(k);
        let next_impulse = params.impulse_time(k + 1);
        let end = next_impulse.min(t_end);

        let mut nodes: Vec<f64> = (1..steps_per_unit)
            .map(|i| start + i as f64 * h)
            .filter(|&t| t < end)
            .collect();
        nodes.extend(params.pair.breakpoints_in(start, end));
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-13);
        nodes.retain(|&t| t > start && t < end);
        nodes.push(end);

        let mut times = Vec::with_capacity(nodes.len() + 1);
        let mut values = Vec::with_capacity(nodes.len() + 1);
        times.push(start);
        values.push(x);
        let mut t = start;
        for &next in &nodes {
            x = rk4_step(params, t, x, next - t);
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::StepFailure { t: next, x });
            }
            t = next;
            times.push(t);
            values.push(x);
        }
        segments.push(Segment { k, times, values });

        if next_impulse > t_end {
            break;
        }
        let pre_value = x;
        let post_value = (1.0 - params.harvest) * pre_value;
        k += 1;
        events.push(ImpulseEvent {
            k,
            time: next_impulse,
            pre_value,
            post_value,
        });
        x = post_value;
        if next_impulse == t_end {
            segments.push(Segment {
                k,
                times: vec![next_impulse],
                values: vec![post_value],
            });
            break;
        }
    }
    Ok(Trajectory {
        params: params.clone(),
        x0,
        step: h,
        segments,
        events,
        halving_error: None,
    })
}

/// Fritsch-Carlson monotone cubic Hermite interpolation.
fn monotone_cubic(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n == 1 {
        return ys[0];
    }
    let i = xs.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
    if x == xs[i] {
        return ys[i];
    }
    let d0 = pchip_slope(xs, ys, i);
    let d1 = pchip_slope(xs, ys, i + 1);
    let h = xs[i + 1] - xs[i];
    let s = (x - xs[i]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * ys[i] + h10 * h * d0 + h01 * ys[i + 1] + h11 * h * d1
}

fn pchip_slope(xs: &[f64], ys: &[f64], i: usize) -> f64 {
    let n = xs.len();
    let secant = |j: usize| (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]);
    if n == 2 {
        return secant(0);
    }
    if i == 0 || i == n - 1 {
        // one-sided three-point estimate, clipped to preserve shape
        let (j0, j1) = if i == 0 { (0, 1) } else { (n - 2, n - 3) };
        let (h0, h1) = (xs[j0 + 1] - xs[j0], xs[j1 + 1] - xs[j1]);
        let (m0, m1) = (secant(j0), secant(j1));
        let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if d.signum() != m0.signum() {
            return 0.0;
        }
        if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
            return 3.0 * m0;
        }
        return d;
    }
    let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
    let (m0, m1) = (secant(i - 1), secant(i));
    if m0 * m1 <= 0.0 {
        return 0.0;
    }
    let w0 = 2.0 * h1 + h0;
    let w1 = h1 + 2.0 * h0;
    (w0 + w1) / (w0 / m0 + w1 / m1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{CoefficientPair, PeriodicCoefficient};
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    fn golden(e: f64) -> ModelParams {
        let pair = CoefficientPair::new(
            PeriodicCoefficient::constant(LN_2).unwrap(),
            PeriodicCoefficient::constant(100.0).unwrap(),
        )
        .unwrap();
        ModelParams::new(pair, e, 0.5).unwrap()
    }

    #[test]
    fn exact_flow_examples() {
        assert_eq!(exact_constant_flow(LN_2, 100.0, 37.0, 0.0), 37.0);
        assert_relative_eq!(exact_constant_flow(LN_2, 100.0, 100.0, 3.3), 100.0, max_relative = 1e-15);
        assert_relative_eq!(exact_constant_flow(LN_2, 100.0, 50.0, 1.0), 200.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn equilibrium_is_preserved() {
        let traj = integrate(&golden(0.0), 100.0, 5.5, &StepControl::default()).unwrap();
        for s in traj.samples() {
            assert_relative_eq!(s.x, 100.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn one_period_without_harvest() {
        let traj = integrate(&golden(0.0), 50.0, 1.5, &StepControl::default()).unwrap();
        assert_eq!(traj.events.len(), 1);
        assert!((traj.events[0].pre_value - 200.0 / 3.0).abs() <= 1e-8);
    }

    #[test]
    fn jump_on_the_periodic_orbit() {
        let traj = integrate(&golden(0.25), 50.0, 2.0, &StepControl::default()).unwrap();
        let ev = traj.events[0];
        assert_eq!(ev.k, 1);
        assert_eq!(ev.time, 1.5);
        assert!((ev.pre_value - 200.0 / 3.0).abs() <= 1e-8);
        assert!((ev.post_value - 50.0).abs() <= 1e-8);
        assert_eq!(ev.post_value, 0.75 * ev.pre_value);
    }

    #[test]
    fn end_on_impulse_records_post_value() {
        let traj = integrate(&golden(0.25), 50.0, 2.5, &StepControl::default()).unwrap();
        assert_eq!(traj.events.len(), 2);
        assert_eq!(traj.end(), 2.5);
        assert_eq!(traj.final_value(), traj.events[1].post_value);
        assert_eq!(traj.sample(2.5).unwrap(), traj.events[1].post_value);
        assert_eq!(traj.sample(1.5).unwrap(), traj.events[0].post_value);
    }

    #[test]
    fn samples_strictly_increase() {
        let traj = integrate(&golden(0.25), 10.0, 4.2, &StepControl::fixed(1.0 / 16.0)).unwrap();
        let samples = traj.samples();
        assert!(samples.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(samples.last().unwrap().t, 4.2);
    }

    #[test]
    fn interpolation_tracks_exact_flow() {
        let traj = integrate(&golden(0.25), 20.0, 3.5, &StepControl::fixed(1.0 / 64.0)).unwrap();
        for i in 0..300 {
            let t = 0.5 + 3.0 * i as f64 / 300.0 + 1e-3;
            let exact = exact_constant_solution(LN_2, 100.0, 0.25, 20.0, t - 0.5);
            assert_relative_eq!(traj.sample(t).unwrap(), exact, max_relative = 1e-6);
        }
        assert!(traj.sample(0.4).is_err());
        assert!(traj.sample(3.6).is_err());
    }

    #[test]
    fn step_must_divide_unit() {
        assert!(StepControl::fixed(0.3).steps_per_unit().is_err());
        assert!(StepControl::fixed(0.0).steps_per_unit().is_err());
        assert!(StepControl::fixed(-0.25).steps_per_unit().is_err());
        assert_eq!(StepControl::fixed(0.1).steps_per_unit().unwrap(), 10);
    }

    #[test]
    fn invalid_arguments() {
        let p = golden(0.25);
        let ctrl = StepControl::default();
        assert!(matches!(integrate(&p, 0.0, 2.0, &ctrl), Err(Error::NonPositiveInitial(_))));
        assert!(integrate(&p, 1.0, 0.5, &ctrl).is_err());
        assert!(integrate(&p, 1.0, 0.2, &ctrl).is_err());
    }

    #[test]
    fn huge_step_reports_failure() {
        // starting far above K with a unit step overshoots below zero
        let pair = CoefficientPair::new(
            PeriodicCoefficient::constant(8.0).unwrap(),
            PeriodicCoefficient::constant(1.0).unwrap(),
        )
        .unwrap();
        let p = ModelParams::new(pair, 0.1, 0.5).unwrap();
        assert!(matches!(
            integrate(&p, 50.0, 3.0, &StepControl::fixed(1.0)),
            Err(Error::StepFailure { .. })
        ));
    }

    #[test]
    fn halving_meets_target() {
        let ctrl = StepControl {
            step: 0.5,
            error_target: Some(1e-9),
        };
        let traj = integrate(&golden(0.25), 30.0, 3.5, &ctrl).unwrap();
        assert!(traj.halving_error.unwrap() <= 1e-9);
        assert!(traj.step < 0.5);
    }

    #[test]
    fn piecewise_breakpoints_become_nodes() {
        let pair = CoefficientPair::new(
            PeriodicCoefficient::piecewise(vec![0.0, 0.3, 1.0], vec![1.0, 2.0]).unwrap(),
            PeriodicCoefficient::constant(10.0).unwrap(),
        )
        .unwrap();
        let p = ModelParams::new(pair, 0.2, 0.5).unwrap();
        let traj = integrate(&p, 5.0, 2.5, &StepControl::fixed(0.25)).unwrap();
        let times: Vec<f64> = traj.samples().iter().map(|s| s.t).collect();
        assert!(times.iter().any(|&t| (t - 1.3).abs() < 1e-12));
        assert!(times.iter().any(|&t| (t - 1.0).abs() < 1e-12));
    }
}
