//! Subcommand implementations. Each returns the rendered output and whether
//! the command's success contract holds; `main` handles files and exit codes.

use std::fmt::Write as _;

use anyhow::{anyhow, bail};
use impulsive_logistic::analysis::{
    compare_solutions, critical_harvest, fixed_point_scan, uniform_grid, verify_impulse_condition,
    verify_periodicity, Formula, VerificationReport,
};
use impulsive_logistic::{integrate, Error, Model, ModelParams};
use serde::Serialize;
use serde_json::json;

use crate::config::ScenarioConfig;

/// Grid density of the periodicity check.
pub const PERIODICITY_GRID: usize = 64;
/// Number of points in the fixed-point scan.
pub const SCAN_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub success: bool,
}

impl Output {
    fn ok(body: String) -> Self {
        Self { body, success: true }
    }
}

/// Shortest representation that round-trips.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn unsupported(cmd: &str, format: Format) -> anyhow::Error {
    anyhow!("`{cmd}` does not support --format {format:?}")
}

/// Starting value used when the config gives none: the periodic orbit's
/// anchor if it exists, otherwise the mean carrying capacity.
pub fn initial_value(cfg: &ScenarioConfig, model: &Model) -> f64 {
    cfg.x0
        .or(model.constants().x0_star)
        .unwrap_or_else(|| cfg.k.mean())
}

#[derive(Debug, Serialize)]
struct ConstantsView {
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    q: f64,
    x0_star: Option<f64>,
    #[serde(rename = "E_star")]
    e_star: f64,
}

pub fn cmd_constants(cfg: &ScenarioConfig, format: Format) -> anyhow::Result<Output> {
    let model = Model::new(cfg.params()?)?;
    let c = model.constants();
    let view = ConstantsView {
        a: c.a,
        b: c.b,
        q: c.q,
        x0_star: c.x0_star,
        e_star: critical_harvest(&cfg.r),
    };
    let star = view
        .x0_star
        .map_or_else(|| "none: (1-E)A <= 1".to_string(), num);
    let body = match format {
        Format::Json => json_string(&view),
        Format::Text => format!(
            "A       = {}\nB       = {}\n(1-E)A  = {}\nx0_star = {}\nE*      = {}\n",
            num(view.a),
            num(view.b),
            num(view.q),
            star,
            num(view.e_star)
        ),
        Format::Csv => format!(
            "A,B,q,x0_star,E_star\n{},{},{},{},{}\n",
            num(view.a),
            num(view.b),
            num(view.q),
            view.x0_star.map(num).unwrap_or_default(),
            num(view.e_star)
        ),
    };
    Ok(Output::ok(body))
}

#[derive(Debug, Serialize)]
struct SimulateRow {
    t: f64,
    k: u64,
    x_numeric: f64,
    x_closed_form: f64,
    rel_diff: f64,
    event: &'static str,
}

pub fn cmd_simulate(cfg: &ScenarioConfig, format: Format) -> anyhow::Result<Output> {
    let params = cfg.params()?;
    let model = Model::new(params.clone())?;
    let x0 = initial_value(cfg, &model);
    let t_end = params.impulse_time(cfg.horizon_periods);
    let traj = integrate(&params, x0, t_end, &cfg.step_control())?;

    let row = |t: f64, k: u64, numeric: f64, closed: f64, event: &'static str| SimulateRow {
        t,
        k,
        x_numeric: numeric,
        x_closed_form: closed,
        rel_diff: (numeric - closed).abs() / closed,
        event,
    };
    let mut rows = Vec::new();
    let mut events = traj.events.iter().peekable();
    for s in traj.samples() {
        let mut event = "";
        if let Some(ev) = events.next_if(|ev| ev.time == s.t) {
            let closed_pre = model.solution_left_limit(x0, ev.k)?;
            rows.push(row(ev.time, ev.k - 1, ev.pre_value, closed_pre, "pre"));
            event = "post";
        }
        rows.push(row(s.t, s.k, s.x, model.solution_at(x0, s.t)?, event));
    }

    let body = match format {
        Format::Csv => {
            let mut out = String::from("t,k,x_numeric,x_closed_form,rel_diff,event\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    num(r.t),
                    r.k,
                    num(r.x_numeric),
                    num(r.x_closed_form),
                    num(r.rel_diff),
                    r.event
                );
            }
            out
        }
        Format::Json => json_string(&rows),
        Format::Text => return Err(unsupported("simulate", format)),
    };
    Ok(Output::ok(body))
}

#[derive(Debug, Serialize)]
struct PeriodicRow {
    t: f64,
    k: u64,
    offset: f64,
    x_periodic: f64,
    event: &'static str,
}

fn require_periodic(params: &ModelParams) -> anyhow::Result<Model> {
    let model = Model::new(params.clone())?;
    if !model.constants().has_periodic_solution() {
        return Err(Error::NoPeriodicSolution {
            q: model.constants().q,
        }
        .into());
    }
    Ok(model)
}

pub fn cmd_periodic(cfg: &ScenarioConfig, format: Format) -> anyhow::Result<Output> {
    let params = cfg.params()?;
    let model = require_periodic(&params)?;
    let grid = uniform_grid(cfg.step_control().steps_per_unit()? as usize);
    let mut rows = Vec::new();
    for k in 0..cfg.horizon_periods {
        let start = params.impulse_time(k);
        for &offset in &grid {
            let t = start + offset;
            let mut event = "";
            if k > 0 && offset == 0.0 {
                rows.push(PeriodicRow {
                    t,
                    k: k - 1,
                    offset: 1.0,
                    x_periodic: model.periodic_left_limit(k)?,
                    event: "pre",
                });
                event = "post";
            }
            rows.push(PeriodicRow {
                t,
                k,
                offset,
                x_periodic: model.periodic_solution_at(t)?,
                event,
            });
        }
    }
    let last = cfg.horizon_periods;
    let t_end = params.impulse_time(last);
    rows.push(PeriodicRow {
        t: t_end,
        k: last - 1,
        offset: 1.0,
        x_periodic: model.periodic_left_limit(last)?,
        event: "pre",
    });
    rows.push(PeriodicRow {
        t: t_end,
        k: last,
        offset: 0.0,
        x_periodic: model.periodic_solution_at(t_end)?,
        event: "post",
    });

    let body = match format {
        Format::Csv => {
            let mut out = String::from("t,k,offset,x_periodic,event\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    num(r.t),
                    r.k,
                    num(r.offset),
                    num(r.x_periodic),
                    r.event
                );
            }
            out
        }
        Format::Json => json_string(&rows),
        Format::Text => return Err(unsupported("periodic", format)),
    };
    Ok(Output::ok(body))
}

/// Runs every applicable check. Without a periodic solution only the
/// oracle comparison and the (empty) fixed-point scan apply.
pub fn verification_reports(cfg: &ScenarioConfig) -> anyhow::Result<Vec<VerificationReport>> {
    let params = cfg.params()?;
    let model = Model::new(params)?;
    let tol = cfg.tolerances;
    let x0 = initial_value(cfg, &model);
    let mean_k = cfg.k.mean();
    let mut reports = vec![
        compare_solutions(&model, x0, cfg.horizon_periods, &cfg.step_control(), tol.oracle)?,
        fixed_point_scan(&model, 1e-3 * mean_k, 10.0 * mean_k, SCAN_POINTS)?,
    ];
    if model.constants().has_periodic_solution() {
        let ks: Vec<u64> = (1..=cfg.horizon_periods).collect();
        reports.push(verify_impulse_condition(&model, Formula::Corrected, &ks, tol.analytic)?);
        reports.push(verify_periodicity(
            &model,
            &uniform_grid(PERIODICITY_GRID),
            cfg.horizon_periods,
            tol.periodicity,
        )?);
    }
    reports.sort_by(|a, b| a.check.cmp(&b.check));
    Ok(reports)
}

fn render_reports(reports: &[VerificationReport], passed: bool, format: Format, cmd: &str) -> anyhow::Result<String> {
    match format {
        Format::Json => Ok(json_string(&json!({ "passed": passed, "reports": reports }))),
        Format::Text => {
            let mut out = String::new();
            for r in reports {
                out.push_str(&r.to_text());
            }
            let _ = writeln!(out, "overall: {}", if passed { "PASS" } else { "FAIL" });
            Ok(out)
        }
        Format::Csv => Err(unsupported(cmd, format)),
    }
}

pub fn cmd_verify(cfg: &ScenarioConfig, format: Format) -> anyhow::Result<Output> {
    let reports = verification_reports(cfg)?;
    let passed = reports.iter().all(|r| r.passed);
    Ok(Output {
        body: render_reports(&reports, passed, format, "verify")?,
        success: passed,
    })
}

/// Contrasts the corrected and the legacy periodic formula at the impulse
/// times. Succeeds when the corrected formula satisfies the jump condition
/// and the legacy one is continuous there, hence violates it.
pub fn cmd_counterexample(cfg: &ScenarioConfig, format: Format) -> anyhow::Result<Output> {
    let params = cfg.params()?;
    let model = require_periodic(&params)?;
    let ks: Vec<u64> = (1..=cfg.horizon_periods).collect();
    let tol = cfg.tolerances.analytic;
    let corrected = verify_impulse_condition(&model, Formula::Corrected, &ks, tol)?;
    let legacy = verify_impulse_condition(&model, Formula::Legacy, &ks, tol)?;
    let confirmed = corrected.passed && legacy.passed;
    let body = match format {
        Format::Json => json_string(&json!({
            "prediction_confirmed": confirmed,
            "corrected": corrected,
            "legacy": legacy,
        })),
        Format::Text => {
            let mut out = corrected.to_text();
            out.push_str(&legacy.to_text());
            let _ = writeln!(
                out,
                "legacy formula continuous at impulses, corrected formula jumps: {}",
                if confirmed { "confirmed" } else { "NOT confirmed" }
            );
            out
        }
        Format::Csv => return Err(unsupported("counterexample", format)),
    };
    Ok(Output {
        body,
        success: confirmed,
    })
}

/// Harvest fractions swept when none are given.
pub fn default_e_values() -> Vec<f64> {
    (0..20).map(|i| i as f64 / 20.0).collect()
}

#[derive(Debug, Serialize)]
struct SweepRow {
    #[serde(rename = "E")]
    e: f64,
    exists: bool,
    x0_star: Option<f64>,
    mean_periodic: Option<f64>,
}

pub fn cmd_sweep(cfg: &ScenarioConfig, e_values: &[f64], format: Format) -> anyhow::Result<Output> {
    if e_values.is_empty() {
        bail!("sweep needs at least one E value");
    }
    let base = cfg.params()?;
    let mut rows = Vec::with_capacity(e_values.len());
    for &e in e_values {
        let params = ModelParams::new(base.pair.clone(), e, base.t0)
            .map_err(|err| anyhow!("E value {e}: {err}"))?;
        let model = Model::new(params)?;
        let x0_star = model.constants().x0_star;
        let mean_periodic = match x0_star {
            Some(_) => Some(model.periodic_mean()?),
            None => None,
        };
        rows.push(SweepRow {
            e,
            exists: x0_star.is_some(),
            x0_star,
            mean_periodic,
        });
    }
    let body = match format {
        Format::Csv => {
            let mut out = String::from("E,exists,x0_star,mean_periodic\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    num(r.e),
                    r.exists,
                    r.x0_star.map(num).unwrap_or_default(),
                    r.mean_periodic.map(num).unwrap_or_default()
                );
            }
            out
        }
        Format::Json => json_string(&rows),
        Format::Text => return Err(unsupported("sweep", format)),
    };
    Ok(Output::ok(body))
}
