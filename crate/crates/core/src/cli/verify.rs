use std::fmt;
use std::path::Path;
use std::sync::Arc;

use super::config::{Resolved, RunConfig, ScheduleSpec};
use super::{ensure_dir, write_file, CliError};
use crate::catalog::digit_oracle;
use crate::error::Error;
use crate::ifs::graph_attractor_distance;
use crate::lp::{gamma_p_with, lp_condition_check, PNorm};
use crate::rb_operator::RbOperator;
use crate::trajectory::{
    convergence_report, invariant_ball_radius, tail_bound, uniform_grid, OperatorSchedule,
};

const JOINUP_TOL: f64 = 1e-12;
const PROBE_OFFSET: f64 = 1e-7;
const PROBE_TOL: f64 = 1e-9;
const NODE_TOL: f64 = 1e-12;
const RATE_SLACK: f64 = 0.05;
const BALL_TOL: f64 = 1e-12;
const BALL_GRID: usize = 513;
const BALL_MAX_DEPTH: usize = 40;
const CELL_TOL: f64 = 2.0;
const ORACLE_POINTS: usize = 257;
const LP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Note,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Note => "NOTE",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOutcome {
    pub text: String,
    pub failures: usize,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Log {
    text: String,
    failures: usize,
}

impl Log {
    fn line(&mut self, v: Verdict, check: &str, subject: &str, detail: impl fmt::Display) {
        if v == Verdict::Fail {
            self.failures += 1;
        }
        self.text.push_str(&format!("{v} {check} {subject}: {detail}\n"));
    }

    fn bounded(&mut self, check: &str, subject: &str, measured: f64, bound: f64) {
        let v = if measured <= bound { Verdict::Pass } else { Verdict::Fail };
        self.line(v, check, subject, format_args!("measured={measured:.6e} bound={bound:.6e}"));
    }

    fn error(&mut self, check: &str, subject: &str, e: &Error) {
        self.line(Verdict::Fail, check, subject, e);
    }
}

/// Runs the enabled suites; the outcome passes iff no line is a FAIL.
/// The report is written to `<out>/verify.txt` when `out` is given.
pub fn cmd_verify(cfg: &RunConfig, out: Option<&Path>) -> Result<VerifyOutcome, CliError> {
    let resolved = Resolved::new(cfg);
    let mut log = Log {
        text: String::new(),
        failures: 0,
    };
    for (name, op) in &resolved.operators {
        let subject = format!("operator={name}");
        match op {
            Ok(op) => {
                log.line(
                    Verdict::Pass,
                    "contraction",
                    &subject,
                    format_args!("measured={:.6e} bound=<1", op.lipschitz_sup()),
                );
                operator_suites(cfg, op, &subject, &mut log);
            }
            Err(Error::ContractionViolation { branch, sup }) => log.line(
                Verdict::Fail,
                "contraction",
                &subject,
                format_args!("branch={branch} sup={sup:.6e} bound=<1"),
            ),
            Err(e) => log.error("build", &subject, e),
        }
    }
    for spec in &cfg.schedules {
        schedule_suites(cfg, &resolved, spec, &mut log);
    }
    let summary = format!("{} FAIL line(s)\n", log.failures);
    log.text.push_str(&summary);
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_file(dir.join("verify.txt"), &log.text)?;
    }
    Ok(VerifyOutcome {
        text: log.text,
        failures: log.failures,
    })
}

fn operator_suites(cfg: &RunConfig, op: &RbOperator<f64>, subject: &str, log: &mut Log) {
    if cfg.verify.joinup {
        match op.joinup_check() {
            Ok(defects) => {
                let worst = defects.iter().map(|d| d.defect).fold(0.0, f64::max);
                log.bounded("joinup", subject, worst, JOINUP_TOL);
                let (g0, g1) = op.endpoint_values().expect("decidable operators declare endpoints");
                let probes = op.probe_joinup(|x| g0 + (g1 - g0) * x, PROBE_OFFSET);
                let worst = probes.iter().map(|d| d.defect).fold(0.0, f64::max);
                log.bounded("joinup-probe", subject, worst, PROBE_TOL);
            }
            Err(e @ Error::ContinuityUndecidable) => log.line(Verdict::Note, "joinup", subject, e),
            Err(e) => log.error("joinup", subject, &e),
        }
    }
    if cfg.verify.lp.enabled {
        for pv in &cfg.verify.lp.p {
            let p = pv.to_pnorm().expect("validated");
            let sub = format!("{subject} p={p}");
            match gamma_p_with(op, p, cfg.verify.lp.trials, cfg.seed) {
                Ok(r) => {
                    log.bounded("gamma-soundness", &sub, r.empirical, r.rigorous + LP_TOL);
                    log.bounded("gamma-contraction", &sub, r.rigorous, 1.0 - f64::EPSILON);
                    if p == PNorm::Infinity {
                        log.bounded("gamma-sup", &sub, (r.literal - op.lipschitz_sup()).abs(), 1e-12);
                    }
                    if r.literal_understates {
                        log.line(
                            Verdict::Note,
                            "gamma-literal",
                            &sub,
                            format_args!(
                                "literal={:.6e} below empirical={:.6e}; rigorous={:.6e} used",
                                r.literal, r.empirical, r.rigorous
                            ),
                        );
                    }
                }
                Err(e) => log.error("gamma-soundness", &sub, &e),
            }
        }
    }
}

fn schedule_suites(cfg: &RunConfig, resolved: &Resolved, spec: &ScheduleSpec, log: &mut Log) {
    let subject = format!("schedule={}", spec.name);
    let sched = match resolved.schedule(cfg, spec, 1) {
        Ok(s) => s,
        Err(e) => return log.error("schedule", &subject, &e),
    };
    let v = &cfg.verify;
    if v.interpolation {
        interpolation(&sched, &subject, log);
    }
    if v.cauchy {
        if let Err(e) = cauchy(cfg, resolved, spec, &subject, log) {
            log.error("cauchy", &subject, &e);
        }
    }
    if v.invariant_ball {
        if let Err(e) = ball(&sched, &subject, log) {
            log.error("invariant-ball", &subject, &e);
        }
    }
    if v.graph_attractor {
        if let Err(e) = graph_attractor(cfg, resolved, spec, &subject, log) {
            log.error("graph-attractor", &subject, &e);
        }
    }
    if v.oracle {
        oracle(&sched, &subject, log);
    }
    if v.lp.enabled {
        if let Some(m) = v.lp.m {
            for pv in &v.lp.p {
                let p = pv.to_pnorm().expect("validated");
                let sub = format!("{subject} p={p}");
                match lp_condition_check(&sched, p, m) {
                    Ok(r) => {
                        let verdict = if r.passes() { Verdict::Pass } else { Verdict::Fail };
                        let radius = r.radius.map_or("none".to_string(), |x| format!("{x:.6e}"));
                        log.line(
                            verdict,
                            "lp-condition",
                            &sub,
                            format_args!("q_max={:.6e} M={m:.6e} gamma={:.6e} radius={radius}", r.q_max, r.gamma),
                        );
                    }
                    Err(e) => log.error("lp-condition", &sub, &e),
                }
            }
        }
    }
}

fn interpolation(sched: &OperatorSchedule<f64>, subject: &str, log: &mut Log) {
    let nodes = match sched.level(1).interpolation_nodes() {
        Ok(n) => n,
        Err(_) => return,
    };
    let mut worst = 0.0f64;
    for k in [1, 5, 20, sched.depth()] {
        if k > sched.depth() {
            continue;
        }
        for &(x, y) in &nodes.knots {
            match sched.eval_truncated(x, k) {
                Ok(v) => worst = worst.max((v - y).abs()),
                Err(e) => return log.error("interpolation", subject, &e),
            }
        }
    }
    log.bounded("interpolation", subject, worst, NODE_TOL);
}

fn cauchy(
    cfg: &RunConfig,
    resolved: &Resolved,
    spec: &ScheduleSpec,
    subject: &str,
    log: &mut Log,
) -> crate::error::Result<()> {
    let depths = &cfg.report.depths;
    let last = depths.iter().copied().max().unwrap_or(1);
    let sched = resolved.schedule(cfg, spec, last + 1)?;
    let r = convergence_report(&sched, &uniform_grid(cfg.report.grid), depths)?;
    match r.fitted_rate {
        Some(rate) => log.bounded("cauchy-rate", subject, rate, sched.lipschitz() + RATE_SLACK),
        None => log.line(Verdict::Note, "cauchy-rate", subject, "distances at the rounding floor"),
    }
    Ok(())
}

fn ball(sched: &OperatorSchedule<f64>, subject: &str, log: &mut Log) -> crate::error::Result<()> {
    let r = invariant_ball_radius(sched)?;
    let grid = uniform_grid::<f64>(BALL_GRID);
    let mut worst = 0.0f64;
    for k in 1..=sched.depth().min(BALL_MAX_DEPTH) {
        worst = worst.max(sched.sample_truncated(&grid, k)?.sup_norm());
    }
    log.bounded("invariant-ball", subject, worst, r + BALL_TOL);
    Ok(())
}

fn graph_attractor(
    cfg: &RunConfig,
    resolved: &Resolved,
    spec: &ScheduleSpec,
    subject: &str,
    log: &mut Log,
) -> crate::error::Result<()> {
    let steps = cfg.raster.steps;
    let sched = resolved.schedule(cfg, spec, steps)?;
    let cells = graph_attractor_distance(&sched, steps, cfg.raster.width)?;
    log.bounded("graph-attractor", subject, cells, CELL_TOL);
    Ok(())
}

fn oracle(sched: &OperatorSchedule<f64>, subject: &str, log: &mut Log) {
    if !sched.is_stationary() {
        return;
    }
    let op: Arc<RbOperator<f64>> = sched.level_shared(1);
    let k = sched.depth();
    let radius = match invariant_ball_radius(sched) {
        Ok(r) => r,
        Err(e) => return log.error("oracle", subject, &e),
    };
    let tail = tail_bound(sched.lipschitz(), radius, k);
    let mut worst = 0.0f64;
    let mut bound = 0.0f64;
    for x in uniform_grid::<f64>(ORACLE_POINTS) {
        let o = match digit_oracle(&op, x, k) {
            Ok(o) => o,
            Err(e) => return log.line(Verdict::Note, "oracle", subject, format_args!("skipped: {e}")),
        };
        let v = match sched.eval_backward(x) {
            Ok(v) => v,
            Err(e) => return log.error("oracle", subject, &e),
        };
        worst = worst.max((v - o.value).abs());
        bound = bound.max(o.error_bound + tail + 1e-12);
    }
    log.bounded("oracle", subject, worst, bound);
}
