use std::io::Write;

use ehaoi_core::qbd::{analyze, QbdReport};
use ehaoi_core::{Error, SystemParams};

use super::{sweep::grid_values, with_output};
use crate::args::QbdArgs;
use crate::failure::{exit_code, Failure, EXIT_NOT_CONVERGED};
use crate::record::{write_record, write_table, Record};

/// Column order of `qbd` records.
pub const COLUMNS: [&str; 12] = [
    "lambda",
    "r",
    "mu",
    "B",
    "avg_peak_aoi",
    "mean_sojourn",
    "mean_queue_length",
    "level_zero_probability",
    "iterations",
    "residual",
    "spectral_radius",
    "status",
];

fn params(args: &QbdArgs, lambda: f64) -> Result<SystemParams, Failure> {
    Ok(SystemParams::new(lambda, args.rate, 0, args.battery)?.with_service_rate(args.mu)?)
}

fn record(p: &SystemParams, outcome: Result<QbdReport, Error>) -> Record {
    let mut r = Record::new();
    r.push("lambda", p.lambda)
        .push("r", p.r)
        .push("mu", p.mu.unwrap_or(f64::NAN))
        .push("B", p.battery);
    match outcome {
        Ok(q) => {
            r.push("avg_peak_aoi", q.avg_peak_aoi)
                .push("mean_sojourn", q.mean_sojourn)
                .push("mean_queue_length", q.mean_queue_length)
                .push("level_zero_probability", q.level_zero_probability)
                .push("iterations", q.iterations)
                .push("residual", q.residual)
                .push("spectral_radius", q.spectral_radius)
                .push("status", "converged");
        }
        Err(e) => {
            let (iterations, radius) = match &e {
                Error::NotConverged {
                    iterations,
                    spectral_radius,
                    ..
                } => (*iterations, *spectral_radius),
                _ => (0, f64::NAN),
            };
            r.push("avg_peak_aoi", f64::NAN)
                .push("mean_sojourn", f64::NAN)
                .push("mean_queue_length", f64::NAN)
                .push("level_zero_probability", f64::NAN)
                .push("iterations", iterations)
                .push("residual", f64::NAN)
                .push("spectral_radius", radius)
                .push("status", "not_converged");
        }
    }
    r
}

pub fn run(args: &QbdArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let format = args.output.format;
    if args.sweep_lambda {
        let (from, to) = (args.from.unwrap_or(f64::NAN), args.to.unwrap_or(f64::NAN));
        let points = grid_values(from, to, args.steps, false)?
            .into_iter()
            .map(|l| params(args, l))
            .collect::<Result<Vec<_>, _>>()?;
        let mut rows = Vec::with_capacity(points.len());
        for p in &points {
            let outcome = analyze(p, args.eps, args.max_iter);
            if let Err(e) = &outcome {
                if exit_code(e) != EXIT_NOT_CONVERGED {
                    return Err(e.clone().into());
                }
            }
            rows.push(record(p, outcome));
        }
        return with_output(&args.output, stdout, |out| write_table(out, rows, format));
    }
    let lambda = args
        .lambda
        .ok_or_else(|| Failure::invalid("--lambda is required unless --sweep-lambda is given"))?;
    let p = params(args, lambda)?;
    let report = analyze(&p, args.eps, args.max_iter)?;
    let r = record(&p, Ok(report));
    with_output(&args.output, stdout, |out| write_record(out, r, format))
}
