use std::io::Write;

use ehaoi_core::engine::avg_peak_from_stats;
use ehaoi_core::sim::{run_sim, run_sim_with_log, Estimate, Horizon, Service, SimConfig, SimResult};
use ehaoi_core::{closed_form_penalty, qbd, update_stats, Discipline, PenaltyKind, PenaltySpec, SystemParams};

use super::{create_file, penalty_columns, penalty_from_args, system_params, with_output};
use crate::args::{ServiceArg, SimulateArgs};
use crate::failure::Failure;
use crate::record::{write_csv, Record, Value};

/// Column order of the comparison rows.
pub const COLUMNS: [&str; 5] = ["metric", "analytic", "simulated", "std_error", "relative_error"];

pub const DEFAULT_EVENTS: u64 = 1_000_000;

fn config(args: &SimulateArgs) -> Result<SimConfig, Failure> {
    let d: Discipline = args.system.discipline.into();
    let mut p = system_params(&args.system)?;
    match (args.service, args.mu) {
        (ServiceArg::Zero, Some(_)) => return Err(Failure::invalid("--mu needs --service exp")),
        (ServiceArg::Zero, None) => {}
        (ServiceArg::Exp, None) => return Err(Failure::invalid("--service exp needs --mu")),
        (ServiceArg::Exp, Some(mu)) => {
            if d == Discipline::Lcfs {
                return Err(Failure::unsupported(
                    "unsupported combination: LCFS with exponential service",
                ));
            }
            p = p.with_service_rate(mu)?;
        }
    }
    let spec = penalty_from_args(&args.penalty)?;
    let mut penalties = vec![PenaltySpec::linear()];
    if !matches!(spec.kind(), PenaltyKind::Linear) {
        penalties.push(spec);
    }
    let horizon = match (args.events, args.time, args.valid_updates) {
        (_, Some(t), _) => Horizon::Time(t),
        (_, _, Some(n)) => Horizon::ValidUpdates(n),
        (n, _, _) => Horizon::Events(n.unwrap_or(DEFAULT_EVENTS)),
    };
    let cfg = SimConfig::new(p, d)
        .with_horizon(horizon)
        .with_seed(args.seed)
        .with_warmup(args.warmup)
        .with_penalties(penalties);
    cfg.validate()?;
    Ok(cfg)
}

/// Closed-form counterparts, where they exist, keyed like the rows.
struct Analytic {
    valid_rate: Option<f64>,
    avg_aoi: Option<f64>,
    avg_penalty: Option<f64>,
    avg_peak_aoi: Option<f64>,
    mean_sojourn: Option<f64>,
    zero_sojourn_fraction: Option<f64>,
    level_zero_fraction: Option<f64>,
}

fn analytic(cfg: &SimConfig) -> Analytic {
    let p: &SystemParams = &cfg.params;
    match cfg.service {
        Service::Instantaneous => {
            let stats = update_stats(p, cfg.discipline).ok();
            let penalty = cfg.penalties.last().expect("linear is always present");
            Analytic {
                valid_rate: stats.as_ref().map(|s| s.valid_rate),
                avg_aoi: closed_form_penalty(p, cfg.discipline, &PenaltySpec::linear()).ok(),
                avg_penalty: closed_form_penalty(p, cfg.discipline, penalty).ok(),
                avg_peak_aoi: stats.as_ref().and_then(|s| avg_peak_from_stats(s).ok()),
                mean_sojourn: stats.as_ref().and_then(|s| s.sojourn.mean().ok()),
                zero_sojourn_fraction: stats.as_ref().map(|s| s.sojourn.atom_at_zero),
                level_zero_fraction: None,
            }
        }
        Service::Exponential(_) => {
            let q = qbd::analyze(p, qbd::DEFAULT_EPS, qbd::DEFAULT_MAX_ITER).ok();
            Analytic {
                valid_rate: Some(p.lambda),
                avg_aoi: None,
                avg_penalty: None,
                avg_peak_aoi: q.as_ref().map(|q| q.avg_peak_aoi),
                mean_sojourn: q.as_ref().map(|q| q.mean_sojourn),
                zero_sojourn_fraction: None,
                level_zero_fraction: q.as_ref().map(|q| q.level_zero_probability),
            }
        }
    }
}

fn comparison(metric: &str, analytic: Option<f64>, simulated: f64, std_error: Option<f64>) -> Record {
    let rel = analytic.map(|a| (simulated - a) / a);
    let mut r = Record::new();
    r.push("metric", metric)
        .push("analytic", analytic)
        .push("simulated", simulated)
        .push("std_error", std_error.filter(|s| s.is_finite()))
        .push("relative_error", rel);
    r
}

pub fn rows(cfg: &SimConfig, res: &SimResult) -> Vec<Record> {
    let a = analytic(cfg);
    let est = |e: &Estimate| (e.value, Some(e.std_error));
    let mut rows = Vec::new();
    let (v, s) = est(&res.valid_rate_hat);
    rows.push(comparison("valid_rate", a.valid_rate, v, s));
    let (v, s) = est(&res.time_avg_penalty["linear"]);
    rows.push(comparison("avg_aoi", a.avg_aoi, v, s));
    if let Some(spec) = cfg.penalties.get(1) {
        let (v, s) = est(&res.time_avg_penalty[&spec.id()]);
        rows.push(comparison("avg_penalty", a.avg_penalty, v, s));
    }
    let (v, s) = est(&res.peak.mean);
    rows.push(comparison("avg_peak_aoi", a.avg_peak_aoi, v, s));
    let (v, s) = est(&res.sojourn.mean);
    rows.push(comparison("mean_sojourn", a.mean_sojourn, v, s));
    match cfg.service {
        Service::Instantaneous => rows.push(comparison(
            "zero_sojourn_fraction",
            a.zero_sojourn_fraction,
            res.sojourn.zero_fraction(),
            None,
        )),
        Service::Exponential(_) => rows.push(comparison(
            "level_zero_fraction",
            a.level_zero_fraction,
            res.level_zero_fraction,
            None,
        )),
    }
    rows
}

fn config_record(cfg: &SimConfig) -> Record {
    let p = &cfg.params;
    let spec = cfg.penalties.last().expect("linear is always present");
    let (kind, alpha, beta) = penalty_columns(spec);
    let (horizon_kind, horizon): (&str, Value) = match cfg.horizon {
        Horizon::Events(n) => ("events", n.into()),
        Horizon::ValidUpdates(n) => ("valid_updates", n.into()),
        Horizon::Time(t) => ("time", t.into()),
    };
    let mut r = Record::new();
    r.push("discipline", cfg.discipline.as_str())
        .push("lambda", p.lambda)
        .push("r", p.r)
        .push("K", p.buffer)
        .push("B", p.battery)
        .push("service", if p.mu.is_some() { "exp" } else { "zero" })
        .push("mu", p.mu)
        .push("penalty", kind)
        .push("alpha", alpha)
        .push("beta", beta)
        .push("horizon_kind", horizon_kind)
        .push("horizon", horizon)
        .push("seed", cfg.seed)
        .push("warmup", cfg.warmup_fraction);
    r
}

fn counts_record(res: &SimResult) -> Record {
    let c = &res.counts;
    let mut r = Record::new();
    r.push("events", c.events)
        .push("arrivals", c.arrivals)
        .push("blocked", c.blocked)
        .push("discarded", c.discarded)
        .push("delivered", c.delivered)
        .push("valid_updates", c.valid_updates)
        .push("energy_arrivals", c.energy_arrivals)
        .push("energy_discarded", c.energy_discarded)
        .push("elapsed_sim_time", res.elapsed_sim_time)
        .push("identity_violations", res.identity_violations)
        .push("validity_mismatches", res.validity_mismatches);
    r
}

pub fn run(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let cfg = config(args)?;
    let res = match &args.event_log {
        Some(path) => {
            let mut log = create_file(path)?;
            let res = run_sim_with_log(&cfg, &mut log)?;
            log.flush().map_err(Failure::io)?;
            res
        }
        None => run_sim(&cfg)?,
    };
    let rows = rows(&cfg, &res);
    with_output(&args.output, stdout, |out| match args.output.format {
        crate::record::Format::Csv => write_csv(out, &rows),
        crate::record::Format::Json => {
            let mut top = Record::new();
            top.push("config", config_record(&cfg).into_value())
                .push("counts", counts_record(&res).into_value())
                .push(
                    "rows",
                    Value::Array(rows.into_iter().map(Record::into_value).collect()),
                );
            writeln!(out, "{}", top.into_value().to_json()).map_err(Failure::io)
        }
    })
}
