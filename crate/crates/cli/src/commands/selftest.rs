//! Quick cross-validation of the closed forms against each other, against
//! their limits and against short simulations.

use std::io::Write;

use ehaoi_core::asymptotics::{asymptotic_penalty, battery_decay_rate};
use ehaoi_core::engine::average_penalty;
use ehaoi_core::sim::{collapsed_state_law, run_sim, state_occupancy, Horizon, SimConfig};
use ehaoi_core::{closed_form_penalty, fcfs, qbd, update_stats, Discipline, Error, PenaltySpec, SystemParams};

use crate::args::SelftestArgs;
use crate::failure::{Failure, EXIT_FAILED};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, result: Result<String, String>) -> Check {
    match result {
        Ok(detail) => Check { name, passed: true, detail },
        Err(detail) => Check { name, passed: false, detail },
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn grid_specs() -> Vec<PenaltySpec> {
    vec![
        PenaltySpec::linear(),
        PenaltySpec::exponential(0.2).expect("nonzero"),
        PenaltySpec::exponential(-0.2).expect("nonzero"),
        PenaltySpec::step(2.0).expect("nonnegative"),
    ]
}

fn route_equivalence() -> Result<String, String> {
    let (mut compared, mut diverged, mut worst) = (0, 0, 0.0f64);
    for theta in [0.2, 0.5, 0.8] {
        for k in [0, 1, 5, 20] {
            for b in [1, 3, 10] {
                let p = SystemParams::from_theta(theta, 1.0, k, b).map_err(|e| e.to_string())?;
                for d in Discipline::ALL {
                    let stats = update_stats(&p, d).map_err(|e| e.to_string())?;
                    for spec in grid_specs() {
                        match (closed_form_penalty(&p, d, &spec), average_penalty(&stats, &spec)) {
                            (Ok(c), Ok(e)) => {
                                worst = worst.max(rel(c, e.value));
                                compared += 1;
                            }
                            (Err(Error::PenaltyDiverges(_)), Err(Error::MgfDiverges { .. })) => diverged += 1,
                            (c, e) => return Err(format!("{theta} {k} {b} {d} {spec}: {c:?} vs {e:?}")),
                        }
                    }
                }
            }
        }
    }
    let detail = format!("{compared} points, {diverged} divergent on both routes, max rel diff {worst:.1e}");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn large_buffer_limits() -> Result<String, String> {
    let mut worst = 0.0f64;
    let mut worst_rate = 0.0f64;
    for theta in [0.2, 0.5, 0.8] {
        for b in [1, 3] {
            let p = SystemParams::from_theta(theta, 1.0, 200, b).map_err(|e| e.to_string())?;
            for d in Discipline::ALL {
                for spec in [PenaltySpec::linear(), PenaltySpec::exponential(-0.2).expect("nonzero"), PenaltySpec::step(2.0).expect("nonnegative")] {
                    let lim = asymptotic_penalty(&p, d, &spec).map_err(|e| e.to_string())?;
                    let fin = closed_form_penalty(&p, d, &spec).map_err(|e| e.to_string())?;
                    worst = worst.max(rel(lim, fin));
                    let rate = battery_decay_rate(&p, d, &spec).map_err(|e| e.to_string())?;
                    worst_rate = worst_rate.max(rel(rate, theta));
                }
            }
        }
    }
    let detail = format!("max rel diff {worst:.1e}, decay-rate error {worst_rate:.1e}");
    if worst <= 1e-6 && worst_rate <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn small_alpha() -> Result<String, String> {
    let p = SystemParams::from_theta(0.5, 1.0, 5, 1).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for d in Discipline::ALL {
        let lin = closed_form_penalty(&p, d, &PenaltySpec::linear()).map_err(|e| e.to_string())?;
        for alpha in [1e-6, -1e-6] {
            let spec = PenaltySpec::exponential(alpha).map_err(|e| e.to_string())?;
            let v = closed_form_penalty(&p, d, &spec).map_err(|e| e.to_string())?;
            worst = worst.max(rel(v, lin));
        }
    }
    let detail = format!("max rel diff {worst:.1e}");
    if worst <= 1e-4 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn step_boundaries() -> Result<String, String> {
    let p = SystemParams::from_theta(0.5, 1.0, 5, 1).map_err(|e| e.to_string())?;
    for d in Discipline::ALL {
        let at_zero = closed_form_penalty(&p, d, &PenaltySpec::step(0.0).expect("ok")).map_err(|e| e.to_string())?;
        let far = closed_form_penalty(&p, d, &PenaltySpec::step(200.0 / p.lambda).expect("ok")).map_err(|e| e.to_string())?;
        if at_zero != 1.0 || far > 1e-12 {
            return Err(format!("{d}: P(AoI > 0) = {at_zero}, far tail {far:e}"));
        }
    }
    for beta in [0.5, 1.0, 2.0, 5.0] {
        let (peak, aoi) = fcfs::peak_violation_bound_check(&p, beta).map_err(|e| e.to_string())?;
        if peak < aoi {
            return Err(format!("beta {beta}: peak tail {peak} below violation {aoi}"));
        }
    }
    Ok("beta = 0 gives 1, far tail negligible, peak tail bounds violation".into())
}

fn qbd_residuals() -> Result<String, String> {
    let mut worst = (0.0f64, 0.0f64);
    for lambda in [0.2, 0.4] {
        for r in [0.8, 1.0] {
            for b in [1, 5] {
                let p = SystemParams::new(lambda, r, 0, b)
                    .and_then(|p| p.with_service_rate(1.0))
                    .map_err(|e| e.to_string())?;
                let m = qbd::build_qbd(&p).map_err(|e| e.to_string())?;
                let sol = qbd::solve(&m, qbd::DEFAULT_EPS, qbd::DEFAULT_MAX_ITER).map_err(|e| e.to_string())?;
                worst.0 = worst.0.max(sol.residual);
                worst.1 = worst.1.max(qbd::balance_residual(&m, &sol));
            }
        }
    }
    let detail = format!("R residual {:.1e}, balance residual {:.1e}", worst.0, worst.1);
    if worst.0 < 1e-7 && worst.1 < 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn simulation(updates: u64, seed: u64) -> Result<String, String> {
    let p = SystemParams::from_theta(0.5, 1.0, 1, 1).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for d in Discipline::ALL {
        let cfg = SimConfig::new(p, d).with_horizon(Horizon::ValidUpdates(updates)).with_seed(seed);
        let res = run_sim(&cfg).map_err(|e| e.to_string())?;
        let exact = closed_form_penalty(&p, d, &PenaltySpec::linear()).map_err(|e| e.to_string())?;
        let e = res.time_avg_penalty["linear"];
        let z = (e.value - exact).abs() / e.std_error;
        worst = worst.max(z);
    }
    let detail = format!("avg AoI within {worst:.2} standard errors");
    if worst <= 4.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn occupancy(updates: u64, seed: u64) -> Result<String, String> {
    let p = SystemParams::from_theta(0.5, 1.0, 1, 1).map_err(|e| e.to_string())?;
    let cfg = SimConfig::new(p, Discipline::Fcfs).with_horizon(Horizon::ValidUpdates(updates)).with_seed(seed);
    let occ = state_occupancy(&cfg).map_err(|e| e.to_string())?;
    let worst = collapsed_state_law(&p)
        .iter()
        .map(|(s, law)| (occ[s] - law).abs() / law)
        .fold(0.0, f64::max);
    let detail = format!("max rel deviation {worst:.1e}");
    if worst <= 0.02 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

pub fn checks(args: &SelftestArgs) -> Vec<Check> {
    vec![
        check("closed form vs penalty integral", route_equivalence()),
        check("unbounded-buffer limits", large_buffer_limits()),
        check("exponential penalty as alpha -> 0", small_alpha()),
        check("step penalty boundaries", step_boundaries()),
        check("matrix-geometric residuals", qbd_residuals()),
        check("simulated average AoI", simulation(args.updates, args.seed)),
        check("collapsed-state occupancy", occupancy(args.updates, args.seed)),
    ]
}

pub fn run(args: &SelftestArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let results = checks(args);
    let width = results.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &results {
        writeln!(
            stdout,
            "{}  {:width$}  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )
        .map_err(Failure::io)?;
    }
    let passed = results.iter().filter(|c| c.passed).count();
    writeln!(stdout, "{passed}/{} checks passed", results.len()).map_err(Failure::io)?;
    if passed == results.len() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_FAILED,
            message: format!("{} self-test checks failed", results.len() - passed),
        })
    }
}
