//! Verification checks over the analytic formulas.
//!
//! Each check produces a [`VerificationReport`]: a list of residuals with the
//! bound each one must satisfy, plus the metadata needed to re-run it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::closed_form::Model;
use crate::coefficients::PeriodicCoefficient;
use crate::error::{Error, Result};
use crate::integrator::{integrate, StepControl};

/// Offsets used to extrapolate one-sided limits at impulse times.
pub const LIMIT_OFFSETS: [f64; 3] = [1e-4, 5e-5, 2.5e-5];

/// Default tolerance for analytic-vs-analytic comparisons.
pub const ANALYTIC_TOL: f64 = 1e-6;
/// Default tolerance for analytic-vs-RK comparisons.
pub const ORACLE_TOL: f64 = 1e-5;
/// Default tolerance for the shift-periodicity check.
pub const PERIODICITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// residual <= tolerance
    AtMost,
    /// residual >= tolerance
    AtLeast,
    /// residual < tolerance
    Below,
}

impl Bound {
    fn holds(self, residual: f64, tolerance: f64) -> bool {
        match self {
            Bound::AtMost => residual <= tolerance,
            Bound::AtLeast => residual >= tolerance,
            Bound::Below => residual < tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
}

impl PointRecord {
    pub fn new(
        label: impl Into<String>,
        location: impl Into<Option<f64>>,
        residual: f64,
        tolerance: f64,
        bound: Bound,
    ) -> Self {
        Self {
            label: label.into(),
            location: location.into(),
            residual,
            tolerance,
            bound,
            passed: bound.holds(residual, tolerance),
            values: BTreeMap::new(),
        }
    }

    pub fn with_value(mut self, name: &str, value: f64) -> Self {
        self.values.insert(name.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub passed: bool,
    pub records: Vec<PointRecord>,
    pub metadata: BTreeMap<String, Value>,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, records: Vec<PointRecord>, metadata: BTreeMap<String, Value>) -> Self {
        let passed = records.iter().all(|r| r.passed);
        Self {
            check: check.into(),
            passed,
            records,
            metadata,
        }
    }

    /// Largest residual among records whose label starts with `prefix`.
    pub fn max_residual(&self, prefix: &str) -> Option<f64> {
        self.records
            .iter()
            .filter(|r| r.label.starts_with(prefix))
            .map(|r| r.residual)
            .reduce(f64::max)
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} [{}]\n",
            self.check,
            if self.passed { "PASS" } else { "FAIL" }
        );
        for r in &self.records {
            let op = match r.bound {
                Bound::AtMost => "<=",
                Bound::AtLeast => ">=",
                Bound::Below => "<",
            };
            out.push_str(&format!(
                "  {:<4} {:<28} t={:<22} residual={:<24e} {} {:e}\n",
                if r.passed { "ok" } else { "FAIL" },
                r.label,
                r.location.map_or_else(|| "-".to_string(), |t| t.to_string()),
                r.residual,
                op,
                r.tolerance
            ));
        }
        out
    }
}

/// Which periodic formula to test at impulse times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    Corrected,
    Legacy,
}

fn params_metadata(model: &Model) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("params".into(), json!(model.params()));
    m.insert("constants".into(), json!(model.constants()));
    m
}

/// Limit of `f(δ)` as `δ -> 0+` by quadratic extrapolation through three
/// offsets. For halving offsets this is two rounds of Richardson extrapolation.
pub fn richardson_limit<F: Fn(f64) -> Result<f64>>(f: F, offsets: [f64; 3]) -> Result<f64> {
    let [d0, d1, d2] = offsets;
    let (f0, f1, f2) = (f(d0)?, f(d1)?, f(d2)?);
    let l0 = d1 * d2 / ((d0 - d1) * (d0 - d2));
    let l1 = d0 * d2 / ((d1 - d0) * (d1 - d2));
    let l2 = d0 * d1 / ((d2 - d0) * (d2 - d1));
    Ok(l0 * f0 + l1 * f1 + l2 * f2)
}

/// Checks the jump condition `x(τ_k) = (1 - E) x(τ_k^-)` for the chosen formula.
///
/// For the legacy formula two records are produced per impulse: the
/// continuity residual `|post - pre| / pre`, which must be within `tol`, and
/// the jump violation `|post - (1-E) pre| / pre`, which must reach `E / 2`.
pub fn verify_impulse_condition(model: &Model, which: Formula, ks: &[u64], tol: f64) -> Result<VerificationReport> {
    if model.constants().x0_star.is_none() {
        return Err(Error::NoPeriodicSolution { q: model.constants().q });
    }
    let e = model.params().harvest;
    let eval = |t: f64| match which {
        Formula::Corrected => model.periodic_solution_at(t),
        Formula::Legacy => model.legacy_periodic_at(t),
    };
    let mut records = Vec::new();
    for &k in ks {
        if k == 0 {
            return Err(Error::InvalidArgument("impulse index must be at least 1".into()));
        }
        let tau = model.params().impulse_time(k);
        let pre = richardson_limit(|d| eval(tau - d), LIMIT_OFFSETS)?;
        let post = eval(tau)?;
        let violation = (post - (1.0 - e) * pre).abs() / pre;
        match which {
            Formula::Corrected => {
                records.push(
                    PointRecord::new(format!("jump k={k}"), tau, violation, tol, Bound::AtMost)
                        .with_value("pre", pre)
                        .with_value("post", post),
                );
            }
            Formula::Legacy => {
                let continuity = (post - pre).abs() / pre;
                records.push(
                    PointRecord::new(format!("continuity k={k}"), tau, continuity, tol, Bound::AtMost)
                        .with_value("pre", pre)
                        .with_value("post", post),
                );
                if e > 0.0 {
                    records.push(PointRecord::new(
                        format!("jump violation k={k}"),
                        tau,
                        violation,
                        0.5 * e,
                        Bound::AtLeast,
                    ));
                }
            }
        }
    }
    let mut meta = params_metadata(model);
    meta.insert("formula".into(), json!(which));
    meta.insert("ks".into(), json!(ks));
    meta.insert("tol".into(), json!(tol));
    meta.insert("limit_offsets".into(), json!(LIMIT_OFFSETS));
    let name = match which {
        Formula::Corrected => "impulse_condition_corrected",
        Formula::Legacy => "impulse_condition_legacy",
    };
    Ok(VerificationReport::new(name, records, meta))
}

/// Checks `x*(t + 1) = x*(t)` at `t = t0 + k + offset` for `k < periods`.
pub fn verify_periodicity(model: &Model, grid: &[f64], periods: u64, tol: f64) -> Result<VerificationReport> {
    if let Some(bad) = grid.iter().find(|o| !(0.0..1.0).contains(*o)) {
        return Err(Error::InvalidArgument(format!("grid offset {bad} is outside [0, 1)")));
    }
    let mut records = Vec::with_capacity(grid.len() * periods as usize);
    for k in 0..periods {
        for &offset in grid {
            // both points built from impulse times so they sit on the same side of a jump
            let t = model.params().impulse_time(k) + offset;
            let here = model.periodic_solution_at(t)?;
            let next = model.periodic_solution_at(model.params().impulse_time(k + 1) + offset)?;
            records.push(PointRecord::new(
                format!("shift k={k}"),
                t,
                (next - here).abs() / here,
                tol,
                Bound::AtMost,
            ));
        }
    }
    let mut meta = params_metadata(model);
    meta.insert("grid".into(), json!(grid));
    meta.insert("periods".into(), json!(periods));
    meta.insert("tol".into(), json!(tol));
    Ok(VerificationReport::new("periodicity", records, meta))
}

/// Evenly spaced offsets `i / n` in `[0, 1)`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

/// Compares the per-interval formula against the RK4 trajectory from `x0`,
/// and the periodic formula against a trajectory started at `x0_star` when
/// the periodic solution exists. One record per period holds the largest
/// relative deviation in that period, including the pre-impulse values.
pub fn compare_solutions(
    model: &Model,
    x0: f64,
    horizon_periods: u64,
    ctrl: &StepControl,
    tol: f64,
) -> Result<VerificationReport> {
    if horizon_periods == 0 {
        return Err(Error::InvalidArgument("horizon must be at least one period".into()));
    }
    let params = model.params();
    let t_end = params.impulse_time(horizon_periods);

    let mut records = deviation_records(
        model,
        "solution",
        (x0, t_end),
        ctrl,
        tol,
        |t| model.solution_at(x0, t),
        |k| model.solution_left_limit(x0, k),
    )?;
    if let Some(x_star) = model.constants().x0_star {
        records.extend(deviation_records(
            model,
            "periodic",
            (x_star, t_end),
            ctrl,
            tol,
            |t| model.periodic_solution_at(t),
            |k| model.periodic_left_limit(k),
        )?);
    }

    let mut meta = params_metadata(model);
    meta.insert("x0".into(), json!(x0));
    meta.insert("horizon_periods".into(), json!(horizon_periods));
    meta.insert("step_control".into(), json!(ctrl));
    meta.insert("tol".into(), json!(tol));
    Ok(VerificationReport::new("compare_solutions", records, meta))
}

fn deviation_records<F, G>(
    model: &Model,
    name: &str,
    (x0, t_end): (f64, f64),
    ctrl: &StepControl,
    tol: f64,
    analytic: F,
    analytic_pre: G,
) -> Result<Vec<PointRecord>>
where
    F: Fn(f64) -> Result<f64>,
    G: Fn(u64) -> Result<f64>,
{
    let traj = integrate(model.params(), x0, t_end, ctrl)?;
    let mut worst: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    let mut note = |k: u64, t: f64, dev: f64| {
        let entry = worst.entry(k).or_insert((t, dev));
        if dev > entry.1 {
            *entry = (t, dev);
        }
    };
    for s in traj.samples() {
        let exact = analytic(s.t)?;
        note(s.k, s.t, (s.x - exact).abs() / exact);
    }
    for ev in &traj.events {
        let exact = analytic_pre(ev.k)?;
        note(ev.k - 1, ev.time, (ev.pre_value - exact).abs() / exact);
    }
    Ok(worst
        .into_iter()
        .map(|(k, (t, dev))| PointRecord::new(format!("{name} period={k}"), t, dev, tol, Bound::AtMost))
        .collect())
}

/// Critical harvest fraction `E* = 1 - 1/A`. The positive periodic
/// solution exists exactly for `E < E*`.
pub fn critical_harvest(r: &PeriodicCoefficient) -> f64 {
    -(-r.period_integral()).exp_m1()
}

/// Scans the sign of `P(x) - x` on a log-spaced grid over `[x_min, x_max]`.
///
/// Passes when there is exactly one crossing matching `x0_star` (to 1e-6
/// relative) if the periodic solution exists, and no crossing with `P(x) < x`
/// everywhere otherwise.
pub fn fixed_point_scan(model: &Model, x_min: f64, x_max: f64, n: usize) -> Result<VerificationReport> {
    if !(x_min > 0.0 && x_max > x_min && x_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scan range must satisfy 0 < x_min < x_max, got [{x_min}, {x_max}]"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("scan needs at least two grid points".into()));
    }
    let gap = |x: f64| model.poincare_map(x).map(|p| p - x);
    let (lmin, lmax) = (x_min.ln(), x_max.ln());
    let grid: Vec<f64> = (0..n)
        .map(|i| (lmin + (lmax - lmin) * i as f64 / (n - 1) as f64).exp())
        .collect();
    let gaps = grid.iter().map(|&x| gap(x)).collect::<Result<Vec<_>>>()?;

    let mut crossings = Vec::new();
    for i in 0..n - 1 {
        let (g0, g1) = (gaps[i], gaps[i + 1]);
        if g0 == 0.0 {
            crossings.push(grid[i]);
        } else if g0 * g1 < 0.0 {
            let (mut lo, mut hi) = (grid[i], grid[i + 1]);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if gap(mid)?.signum() == g0.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            crossings.push(0.5 * (lo + hi));
        }
    }
    if gaps[n - 1] == 0.0 {
        crossings.push(grid[n - 1]);
    }

    let x_star = model.constants().x0_star;
    let expected = usize::from(x_star.is_some());
    let mut records = vec![PointRecord::new(
        "crossing count",
        None,
        (crossings.len() as f64 - expected as f64).abs(),
        0.0,
        Bound::AtMost,
    )
    .with_value("crossings", crossings.len() as f64)];
    match x_star {
        Some(x_star) => {
            for (i, &c) in crossings.iter().enumerate() {
                records.push(
                    PointRecord::new(
                        format!("crossing {i}"),
                        c,
                        (c - x_star).abs() / x_star,
                        1e-6,
                        Bound::AtMost,
                    )
                    .with_value("x0_star", x_star),
                );
            }
        }
        None => {
            let worst = grid
                .iter()
                .zip(&gaps)
                .map(|(x, g)| g / x)
                .fold(f64::NEG_INFINITY, f64::max);
            records.push(PointRecord::new("map below identity", None, worst, 0.0, Bound::Below));
        }
    }

    let mut meta = params_metadata(model);
    meta.insert("x_min".into(), json!(x_min));
    meta.insert("x_max".into(), json!(x_max));
    meta.insert("n".into(), json!(n));
    Ok(VerificationReport::new("fixed_point_scan", records, meta))
}

/// Relative distance to the periodic orbit's anchor under repeated
/// application of the period map. Observational only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub x0_star: f64,
    pub seeds: Vec<f64>,
    /// `distances[i][j] = |P^j(seeds[i]) - x0_star| / x0_star`
    pub distances: Vec<Vec<f64>>,
}

pub fn convergence_experiment(model: &Model, seeds: &[f64], periods: usize) -> Result<ConvergenceTable> {
    let x_star = model
        .constants()
        .x0_star
        .ok_or(Error::NoPeriodicSolution { q: model.constants().q })?;
    let mut distances = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut x = seed;
        let mut row = Vec::with_capacity(periods + 1);
        row.push((x - x_star).abs() / x_star);
        for _ in 0..periods {
            x = model.poincare_map(x)?;
            row.push((x - x_star).abs() / x_star);
        }
        distances.push(row);
    }
    Ok(ConvergenceTable {
        x0_star: x_star,
        seeds: seeds.to_vec(),
        distances,
    })
}
