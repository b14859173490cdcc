use std::io::Write;

use ehaoi_core::engine::{average_penalty, avg_peak_from_stats};
use ehaoi_core::{closed_form_penalty, update_stats, Discipline, PenaltyKind, PenaltySpec};

use super::{agree, penalty_columns, penalty_from_args, system_params, with_output};
use crate::args::AnalyzeArgs;
use crate::failure::Failure;
use crate::record::{write_record, Record};

/// Column order of the `analyze` record.
pub const COLUMNS: [&str; 19] = [
    "discipline",
    "lambda",
    "r",
    "theta",
    "K",
    "B",
    "penalty",
    "alpha",
    "beta",
    "valid_rate",
    "avg_aoi",
    "avg_peak_aoi",
    "mean_sojourn",
    "avg_penalty",
    "engine_penalty",
    "engine_method",
    "engine_est_error",
    "violation_prob",
    "routes_agree",
];

pub fn record(args: &AnalyzeArgs) -> Result<Record, Failure> {
    let p = system_params(&args.system)?;
    let d: Discipline = args.system.discipline.into();
    let spec = penalty_from_args(&args.penalty)?;
    let stats = update_stats(&p, d)?;
    let avg_aoi = closed_form_penalty(&p, d, &PenaltySpec::linear())?;
    let avg_penalty = closed_form_penalty(&p, d, &spec)?;
    let engine = average_penalty(&stats, &spec)?;
    let violation = match spec.kind() {
        PenaltyKind::Step { .. } => Some(avg_penalty),
        _ => None,
    };
    let (kind, alpha, beta) = penalty_columns(&spec);
    let mut r = Record::new();
    r.push("discipline", d.as_str())
        .push("lambda", p.lambda)
        .push("r", p.r)
        .push("theta", p.theta())
        .push("K", p.buffer)
        .push("B", p.battery)
        .push("penalty", kind)
        .push("alpha", alpha)
        .push("beta", beta)
        .push("valid_rate", stats.valid_rate)
        .push("avg_aoi", avg_aoi)
        .push("avg_peak_aoi", avg_peak_from_stats(&stats)?)
        .push("mean_sojourn", stats.sojourn.mean()?)
        .push("avg_penalty", avg_penalty)
        .push("engine_penalty", engine.value)
        .push("engine_method", engine.method.as_str())
        .push("engine_est_error", engine.est_error)
        .push("violation_prob", violation)
        .push("routes_agree", agree(avg_penalty, engine.value));
    debug_assert_eq!(r.header(), COLUMNS);
    Ok(r)
}

pub fn run(args: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let r = record(args)?;
    with_output(&args.output, stdout, |out| write_record(out, r, args.output.format))
}
