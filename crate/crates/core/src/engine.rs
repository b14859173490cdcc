//! Generic average-penalty machinery.
//!
//! With `G(x) = int_0^x g`, the long-run time average of `g(AoI(t))` is
//! `valid_rate * (E[G(A)] - E[G(T)])` where `A` is the peak AoI and `T` the
//! sojourn time of a valid update. Each expectation is taken as
//! `E[G(V)] = int_0^inf g(t) P{V > t} dt`, which is exact term by term for
//! the named penalties and falls back to adaptive quadrature otherwise.

use serde::{Deserialize, Serialize};

use crate::dist::{ExpPolyDist, UpdateProcessStats};
use crate::numeric::{integrate, poisson_cdf};
use crate::penalty::{PenaltyKind, PenaltySpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Quadrature,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Quadrature => "quadrature",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyResult {
    pub value: f64,
    pub method: Method,
    /// Zero for exact results.
    pub est_error: f64,
}

/// Relative distance from a term rate at which the MGF is treated as divergent.
const POLE_GUARD: f64 = 1e-9;
const QUAD_TOL: f64 = 1e-10;
const QUAD_MAX_EVALS: usize = 1_000_000;
const TAIL_FRACTION: f64 = 1e-12;

/// `E[G(V)]` for `V ~ d`.
pub fn expected_g(d: &ExpPolyDist, spec: &PenaltySpec) -> Result<PenaltyResult> {
    let exact = |value| {
        Ok(PenaltyResult {
            value,
            method: Method::Exact,
            est_error: 0.0,
        })
    };
    match spec.kind() {
        PenaltyKind::Linear => exact(0.5 * d.moment(2)?),
        PenaltyKind::Exponential { alpha } => {
            check_mgf(d, *alpha)?;
            let alpha = *alpha;
            let value = d
                .terms
                .iter()
                .map(|t| {
                    // int (a t)^n/n! e^{-a t} (e^{alpha t} - 1)/alpha dt
                    //   = ((a / (a - alpha))^{n+1} - 1) / (a alpha)
                    let growth = -((t.power + 1) as f64) * (-alpha / t.rate).ln_1p();
                    t.weight * growth.exp_m1() / (t.rate * alpha)
                })
                .sum();
            exact(value)
        }
        PenaltyKind::Step { beta } => {
            // int_beta^inf (a t)^n/n! e^{-a t} dt = P{Poisson(a beta) <= n} / a
            let value = d
                .terms
                .iter()
                .map(|t| t.weight * poisson_cdf(t.power, t.rate * beta) / t.rate)
                .sum();
            exact(value)
        }
        PenaltyKind::Custom(c) => quadrature_g(d, spec, c.growth_rate, c.growth_scale, &[]),
    }
}

/// `E[G(V)]` through the quadrature path even for named penalties.
pub fn expected_g_quadrature(d: &ExpPolyDist, spec: &PenaltySpec) -> Result<PenaltyResult> {
    let min_rate = d.min_rate();
    match spec.kind() {
        PenaltyKind::Linear => {
            // t <= e^{gamma t} / (e gamma)
            let gamma = 0.5 * min_rate;
            quadrature_g(d, spec, gamma, 1.0 / (std::f64::consts::E * gamma), &[])
        }
        PenaltyKind::Exponential { alpha } => {
            check_mgf(d, *alpha)?;
            if *alpha > 0.0 {
                quadrature_g(d, spec, *alpha, 1.0 / alpha, &[])
            } else {
                quadrature_g(d, spec, 0.0, 1.0 / alpha.abs(), &[])
            }
        }
        PenaltyKind::Step { beta } => quadrature_g(d, spec, 0.0, 1.0, &[*beta]),
        PenaltyKind::Custom(c) => quadrature_g(d, spec, c.growth_rate, c.growth_scale, &[]),
    }
}

fn check_mgf(d: &ExpPolyDist, alpha: f64) -> Result<()> {
    let rate = d.min_rate();
    if alpha >= rate * (1.0 - POLE_GUARD) {
        return Err(Error::MgfDiverges { alpha, rate });
    }
    Ok(())
}

/// Upper bound on `int_T^inf scale e^{gamma t} |S|(t) dt`.
fn tail_bound(d: &ExpPolyDist, gamma: f64, scale: f64, horizon: f64) -> f64 {
    d.terms
        .iter()
        .map(|t| {
            let slack = t.rate - gamma;
            let ratio = t.rate / slack;
            t.weight.abs() * scale * ratio.powi(t.power as i32) / slack
                * poisson_cdf(t.power, slack * horizon)
        })
        .sum()
}

fn quadrature_g(
    d: &ExpPolyDist,
    spec: &PenaltySpec,
    gamma: f64,
    scale: f64,
    breakpoints: &[f64],
) -> Result<PenaltyResult> {
    if d.terms.is_empty() {
        return Ok(PenaltyResult {
            value: 0.0,
            method: Method::Quadrature,
            est_error: 0.0,
        });
    }
    let min_rate = d.min_rate();
    if gamma >= min_rate {
        return Err(Error::MgfDiverges {
            alpha: gamma,
            rate: min_rate,
        });
    }
    let integrand = |t: f64| spec.value(t) * d.survivor(t);

    // Grow the horizon until the declared envelope bounds the tail.
    let mut horizon = 8.0 / (min_rate - gamma);
    let mut knots = vec![0.0];
    let mut value = 0.0;
    let mut err = 0.0;
    let mut evaluations = 0;
    loop {
        let mut cuts: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&b| b > *knots.last().unwrap() && b < horizon)
            .collect();
        cuts.push(horizon);
        for cut in cuts {
            let lo = *knots.last().unwrap();
            let q = integrate(integrand, lo, cut, QUAD_TOL, QUAD_TOL, QUAD_MAX_EVALS - evaluations);
            value += q.value;
            err += q.est_error;
            evaluations += q.evaluations;
            knots.push(cut);
        }
        let tail = tail_bound(d, gamma, scale, horizon);
        if tail <= TAIL_FRACTION * value.abs().max(f64::MIN_POSITIVE) || tail < 1e-300 {
            err += tail;
            break;
        }
        if evaluations >= QUAD_MAX_EVALS || horizon > 1e8 / min_rate {
            return Err(Error::QuadratureFailed {
                est_error: err + tail,
                evaluations,
            });
        }
        horizon *= 2.0;
    }
    if err >= 1e-6 * value.abs().max(1.0) {
        return Err(Error::QuadratureFailed {
            est_error: err,
            evaluations,
        });
    }
    Ok(PenaltyResult {
        value,
        method: Method::Quadrature,
        est_error: err,
    })
}

/// Long-run average penalty `valid_rate * (E[G(A)] - E[G(T)])`.
pub fn average_penalty(stats: &UpdateProcessStats, spec: &PenaltySpec) -> Result<PenaltyResult> {
    combine(stats, expected_g(&stats.peak, spec)?, expected_g(&stats.sojourn, spec)?)
}

/// [`average_penalty`] with both expectations taken by quadrature.
pub fn average_penalty_quadrature(
    stats: &UpdateProcessStats,
    spec: &PenaltySpec,
) -> Result<PenaltyResult> {
    combine(
        stats,
        expected_g_quadrature(&stats.peak, spec)?,
        expected_g_quadrature(&stats.sojourn, spec)?,
    )
}

fn combine(
    stats: &UpdateProcessStats,
    peak: PenaltyResult,
    sojourn: PenaltyResult,
) -> Result<PenaltyResult> {
    let value = stats.valid_rate * (peak.value - sojourn.value);
    if value < -1e-9 {
        return Err(Error::NegativePenalty(value));
    }
    let method = if peak.method == Method::Exact && sojourn.method == Method::Exact {
        Method::Exact
    } else {
        Method::Quadrature
    };
    Ok(PenaltyResult {
        value: value.max(0.0),
        method,
        est_error: stats.valid_rate * (peak.est_error + sojourn.est_error),
    })
}

/// Average AoI from second moments: `valid_rate / 2 * (E[A^2] - E[T^2])`.
pub fn avg_aoi_from_moments(stats: &UpdateProcessStats) -> Result<f64> {
    Ok(0.5 * stats.valid_rate * (stats.peak.moment(2)? - stats.sojourn.moment(2)?))
}

/// Average peak AoI `E[A]`.
pub fn avg_peak_from_stats(stats: &UpdateProcessStats) -> Result<f64> {
    stats.peak.moment(1)
}
