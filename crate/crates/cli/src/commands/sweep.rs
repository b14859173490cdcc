use std::io::Write;

use ehaoi_core::asymptotics::asymptotic_penalty;
use ehaoi_core::engine::{average_penalty, avg_peak_from_stats};
use ehaoi_core::{
    closed_form_penalty, update_stats, validate_params, Discipline, Error, PenaltySpec, SystemParams,
};
use rayon::prelude::*;

use super::{penalty_columns, penalty_spec, with_output};
use crate::args::{Metric, PenaltyArg, SweepArgs, SweptArg};
use crate::failure::{is_divergence, Failure};
use crate::record::{write_table, Record};

/// Column order of `sweep` rows.
pub const COLUMNS: [&str; 12] = [
    "theta", "lambda", "r", "K", "B", "discipline", "penalty", "alpha", "beta", "metric", "value", "method",
];

/// One grid point: system parameters and the penalty evaluated there.
#[derive(Debug, Clone)]
pub struct Point {
    pub params: SystemParams,
    pub penalty: PenaltySpec,
}

pub fn grid_values(from: f64, to: f64, steps: usize, log: bool) -> Result<Vec<f64>, Failure> {
    if steps < 2 {
        return Err(Failure::invalid("--steps must be at least 2"));
    }
    if !(from.is_finite() && to.is_finite()) {
        return Err(Failure::invalid("grid endpoints must be finite"));
    }
    if log && (from <= 0.0 || to <= 0.0) {
        return Err(Failure::invalid("a logarithmic grid needs positive endpoints"));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 / last;
            if i == steps - 1 {
                to
            } else if log {
                (from.ln() + t * (to.ln() - from.ln())).exp()
            } else {
                from + t * (to - from)
            }
        })
        .collect())
}

fn fixed_lambda(args: &SweepArgs, r: f64) -> Result<f64, Failure> {
    match (args.lambda, args.theta) {
        (Some(l), None) => Ok(l),
        (None, Some(t)) => Ok(t * r),
        (Some(_), Some(_)) => Err(Failure::invalid("give either --lambda or --theta, not both")),
        (None, None) => Err(Failure::invalid("this sweep needs --lambda or --theta")),
    }
}

fn capacity(v: f64, name: &str) -> Result<usize, Failure> {
    if v < 0.0 || v.fract() != 0.0 {
        return Err(Failure::invalid(format!("{name} grid values must be nonnegative integers, got {v}")));
    }
    Ok(v as usize)
}

pub fn points(args: &SweepArgs) -> Result<Vec<Point>, Failure> {
    let mut values = grid_values(args.from, args.to, args.steps, args.log)?;
    if matches!(args.param, SweptArg::K | SweptArg::B) {
        values.iter_mut().for_each(|v| *v = v.round());
        values.dedup();
    }
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        let (mut lambda, mut r, mut k, mut b) = (None, args.rate, args.buffer, args.battery);
        let (mut alpha, mut beta) = (args.penalty.alpha, args.penalty.beta);
        let mut kind = args.penalty.penalty;
        match args.param {
            SweptArg::Theta => lambda = Some(v * args.rate),
            SweptArg::Lambda => lambda = Some(v),
            SweptArg::R => r = v,
            SweptArg::K => k = capacity(v, "K")?,
            SweptArg::B => b = capacity(v, "B")?,
            SweptArg::Alpha => {
                alpha = Some(v);
                kind = PenaltyArg::Exp;
            }
            SweptArg::Beta => {
                beta = Some(v);
                kind = PenaltyArg::Step;
            }
        }
        let lambda = match lambda {
            Some(l) => l,
            None => fixed_lambda(args, r)?,
        };
        let params = validate_params(SystemParams {
            lambda,
            r,
            buffer: k,
            battery: b,
            mu: None,
        })
        .map_err(|e| Failure::from(e).with_context(&format!("grid point {v}")))?;
        out.push(Point {
            params,
            penalty: penalty_spec(kind, alpha, beta)?,
        });
    }
    Ok(out)
}

impl Failure {
    fn with_context(mut self, context: &str) -> Self {
        self.message = format!("{context}: {}", self.message);
        self
    }
}

fn metric_value(point: &Point, d: Discipline, metric: Metric) -> Result<(f64, &'static str), Error> {
    let p = &point.params;
    match metric {
        Metric::ValidRate => Ok((update_stats(p, d)?.valid_rate, "closed_form")),
        Metric::AvgAoi => Ok((closed_form_penalty(p, d, &PenaltySpec::linear())?, "closed_form")),
        Metric::AvgPeakAoi => Ok((avg_peak_from_stats(&update_stats(p, d)?)?, "closed_form")),
        Metric::MeanSojourn => Ok((update_stats(p, d)?.sojourn.mean()?, "closed_form")),
        Metric::AvgPenalty => Ok((closed_form_penalty(p, d, &point.penalty)?, "closed_form")),
        Metric::EnginePenalty => {
            let r = average_penalty(&update_stats(p, d)?, &point.penalty)?;
            Ok((r.value, r.method.as_str()))
        }
        Metric::AsymptoticPenalty => Ok((asymptotic_penalty(p, d, &point.penalty)?, "asymptotic")),
    }
}

fn row(point: &Point, d: Discipline, metric: Metric) -> Result<Record, Failure> {
    let (value, method) = match metric_value(point, d, metric) {
        Ok(v) => v,
        Err(e) if is_divergence(&e) => (f64::NAN, "diverged"),
        Err(e) => return Err(e.into()),
    };
    let p = &point.params;
    let (kind, alpha, beta) = penalty_columns(&point.penalty);
    let mut r = Record::new();
    r.push("theta", p.theta())
        .push("lambda", p.lambda)
        .push("r", p.r)
        .push("K", p.buffer)
        .push("B", p.battery)
        .push("discipline", d.as_str())
        .push("penalty", kind)
        .push("alpha", alpha)
        .push("beta", beta)
        .push("metric", metric.name())
        .push("value", value)
        .push("method", method);
    Ok(r)
}

/// All rows in grid order: points, then disciplines, then metrics.
pub fn rows(args: &SweepArgs) -> Result<Vec<Record>, Failure> {
    let points = points(args)?;
    let tasks: Vec<(usize, Discipline, Metric)> = (0..points.len())
        .flat_map(|i| {
            args.discipline
                .iter()
                .flat_map(move |d| args.metrics.iter().map(move |m| (i, (*d).into(), *m)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Failure::invalid(format!("cannot start {} worker threads: {e}", args.jobs)))?;
    pool.install(|| {
        tasks
            .par_iter()
            .map(|(i, d, m)| row(&points[*i], *d, *m))
            .collect()
    })
}

pub fn run(args: &SweepArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let rows = rows(args)?;
    with_output(&args.output, stdout, |out| write_table(out, rows, args.output.format))
}
