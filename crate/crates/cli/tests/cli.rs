use std::path::PathBuf;
use std::process::Command;

use ehaoi_core::{closed_form_penalty, Discipline, PenaltySpec, SystemParams};
use serde_json::Value;

fn run(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ehaoi").chain(args.iter().copied());
    let code = ehaoi_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ehaoi-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn csv_column(out: &str, column: &str) -> Vec<f64> {
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    let idx = reader.headers().unwrap().iter().position(|h| h == column).unwrap();
    reader
        .records()
        .map(|r| r.unwrap()[idx].parse().unwrap())
        .collect()
}

const ANALYZE: [&str; 11] = [
    "analyze", "--discipline", "fcfs", "--lambda", "0.5", "--rate", "1", "--buffer", "5", "--battery", "1",
];

#[test]
fn analyze_reports_closed_form_and_agreement() {
    let v = json(&[&ANALYZE[..], &["--penalty", "linear"]].concat());
    let p = SystemParams::new(0.5, 1.0, 5, 1).unwrap();
    let expect = closed_form_penalty(&p, Discipline::Fcfs, &PenaltySpec::linear()).unwrap();
    assert_eq!(v["avg_aoi"].as_f64().unwrap(), expect);
    assert_eq!(v["avg_penalty"].as_f64().unwrap(), expect);
    assert_eq!(v["routes_agree"], Value::Bool(true));
    assert_eq!(v["engine_method"], "exact");
    assert_eq!(v["K"], 5);
}

#[test]
fn analyze_csv_is_one_header_and_one_row() {
    let (code, out, _) = run(&[&ANALYZE[..], &["--format", "csv", "--penalty", "step", "--beta", "2"]].concat());
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("discipline,lambda,r,theta,K,B,penalty,alpha,beta,valid_rate"));
    assert!(lines[0].ends_with("engine_est_error,violation_prob,routes_agree"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["analyze", "--lambda", "1.5", "--rate", "1"]).0, 2);
    assert_eq!(run(&["analyze", "--lambda", "0.5", "--battery", "0"]).0, 2);
    assert_eq!(run(&["analyze", "--lambda", "0.5", "--no-such-flag"]).0, 2);
    let (code, _, err) = run(&["analyze", "--lambda", "0.5", "--buffer", "5", "--penalty", "exp", "--alpha", "0.6"]);
    assert_eq!(code, 3);
    assert!(err.contains("alpha must be < lambda"), "{err}");
    let (code, _, err) = run(&["simulate", "--discipline", "lcfs", "--lambda", "0.5", "--service", "exp", "--mu", "1"]);
    assert_eq!(code, 4);
    assert!(err.contains("unsupported combination"), "{err}");
    let (code, _, err) = run(&["qbd", "--lambda", "0.9", "--rate", "1", "--mu", "1", "--battery", "5"]);
    assert_eq!(code, 5);
    assert!(err.contains("spectral radius"), "{err}");
    assert_eq!(run(&["qbd", "--lambda", "1", "--rate", "1", "--mu", "2"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn sweep_csv_round_trips() {
    let (code, out, _) = run(&[
        "sweep", "--param", "theta", "--from", "0.05", "--to", "0.95", "--steps", "7", "--discipline", "fcfs,lcfs",
        "--penalty", "exp", "--alpha", "0.3", "--buffer", "2", "--metrics", "avg-penalty,valid-rate", "--format", "csv",
    ]);
    assert_eq!(code, 0);
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(reader.headers().unwrap()).unwrap();
    let mut rows = 0;
    for r in reader.records() {
        writer.write_record(&r.unwrap()).unwrap();
        rows += 1;
    }
    assert_eq!(rows, 7 * 2 * 2);
    assert_eq!(String::from_utf8(writer.into_inner().unwrap()).unwrap(), out);
    // Points with alpha >= lambda diverge and are recorded, not fatal.
    assert!(out.contains("NaN,diverged"));
}

#[test]
fn sweep_shapes() {
    let (_, fcfs, _) = run(&[
        "sweep", "--param", "theta", "--from", "0.05", "--to", "0.95", "--steps", "19", "--buffer", "5", "--format",
        "csv",
    ]);
    let v = csv_column(&fcfs, "value");
    let argmin = v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!(argmin > 0 && argmin < v.len() - 1);

    let (_, lcfs, _) = run(&[
        "sweep", "--param", "theta", "--from", "0.05", "--to", "0.95", "--steps", "19", "--buffer", "1",
        "--discipline", "lcfs", "--format", "csv",
    ]);
    assert!(csv_column(&lcfs, "value").windows(2).all(|w| w[1] < w[0]));

    let (_, battery, _) = run(&[
        "sweep", "--param", "B", "--from", "1", "--to", "10", "--steps", "10", "--theta", "0.5", "--buffer", "5",
        "--format", "csv",
    ]);
    let v = csv_column(&battery, "value");
    assert_eq!(v.len(), 10);
    assert!(v.windows(2).all(|w| w[1] < w[0]));
    assert!(v[9] > 2.0 && v[9] - 2.0 < 0.01);
}

#[test]
fn sweep_is_independent_of_job_count() {
    let args = |jobs: &'static str| {
        run(&[
            "sweep", "--param", "lambda", "--from", "0.1", "--to", "0.9", "--steps", "25", "--buffer", "3",
            "--metrics", "avg-aoi,engine-penalty,asymptotic-penalty", "--jobs", jobs,
        ])
    };
    let one = args("1");
    assert_eq!(one.0, 0);
    assert_eq!(one, args("4"));
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = scratch("config");
    let path = dir.join("sweep.toml");
    std::fs::write(
        &path,
        "param = \"theta\"\nfrom = 0.2\nto = 0.8\nsteps = 4\nbuffer = 3\nmetrics = [\"avg-aoi\", \"valid-rate\"]\nformat = \"csv\"\n",
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    let (code, out, err) = run(&["sweep", "--config", cfg]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 1 + 4 * 2);
    let (code, over, _) = run(&["sweep", "--config", cfg, "--steps", "3", "--buffer", "7"]);
    assert_eq!(code, 0);
    assert_eq!(over.lines().count(), 1 + 3 * 2);
    assert_eq!(csv_column(&over, "K"), vec![7.0; 6]);
    assert_eq!(run(&["sweep", "--config", dir.join("missing.toml").to_str().unwrap()]).0, 2);
}

#[test]
fn qbd_record_and_sweep() {
    let v = json(&["qbd", "--lambda", "0.4", "--rate", "0.8", "--mu", "1", "--battery", "5"]);
    assert!(v["residual"].as_f64().unwrap() < 1e-7);
    assert_eq!(v["status"], "converged");
    let (code, out, _) = run(&[
        "qbd", "--sweep-lambda", "--from", "0.05", "--to", "0.95", "--steps", "19", "--rate", "1", "--mu", "1",
        "--battery", "5", "--format", "csv",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 20);
    assert!(out.contains("NaN") && out.contains("not_converged"));
}

#[test]
fn simulate_compares_against_closed_form() {
    let v = json(&[
        "simulate", "--lambda", "0.5", "--buffer", "5", "--battery", "1", "--events", "1000000", "--seed", "42",
    ]);
    let rows = v["rows"].as_array().unwrap();
    let aoi = rows.iter().find(|r| r["metric"] == "avg_aoi").unwrap();
    assert!(aoi["relative_error"].as_f64().unwrap().abs() < 0.01, "{aoi}");
    assert_eq!(v["config"]["seed"], 42);
    let c = &v["counts"];
    assert_eq!(c["valid_updates"].as_u64(), Some(c["arrivals"].as_u64().unwrap() - c["blocked"].as_u64().unwrap()));
}

#[test]
fn simulate_with_service_reports_queue_metrics() {
    let v = json(&[
        "simulate", "--lambda", "0.2", "--rate", "1", "--battery", "1", "--service", "exp", "--mu", "1", "--events",
        "400000", "--seed", "3",
    ]);
    let metrics: Vec<&str> = v["rows"].as_array().unwrap().iter().map(|r| r["metric"].as_str().unwrap()).collect();
    assert_eq!(metrics, ["valid_rate", "avg_aoi", "avg_peak_aoi", "mean_sojourn", "level_zero_fraction"]);
    assert_eq!(run(&["simulate", "--lambda", "0.2", "--service", "exp"]).0, 2);
}

#[test]
fn output_directory_from_environment() {
    let dir = scratch("outdir");
    let status = Command::new(env!("CARGO_BIN_EXE_ehaoi"))
        .args([
            "simulate", "--lambda", "0.5", "--buffer", "1", "--events", "2000", "--event-log", "log/events.tsv",
            "--output", "summary.json",
        ])
        .env("EHAOI_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(status.stdout.is_empty());
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["counts"]["events"], 2000);
    let log = std::fs::read_to_string(dir.join("log/events.tsv")).unwrap();
    assert!(log.starts_with("# time\tkind\tq1\tq2\taoi"));
    assert!(log.lines().count() > 2000);
}

#[test]
fn selftest_passes() {
    let (code, out, _) = run(&["selftest", "--updates", "100000"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().take(7).all(|l| l.starts_with("PASS")));
}
