//! Closed forms for the FCFS discipline with negligible service time.
//!
//! Every expression with a `theta^{-B} - theta^{K+c}` denominator is
//! multiplied through by `theta^B`, so denominators read
//! `1 - theta^{K+B+c}` and nothing overflows for small `theta`, large `B`.

use crate::dist::{ExpPolyDist, ExpPolyTerm, UpdateProcessStats};
use crate::numeric::{exp_poisson_sum, geometric_sum, poisson_cdf};
use crate::params::{validate_params, SystemParams, MAX_CAPACITY};
use crate::{Error, Result};

/// Width of the window around `alpha = r - lambda` that switches to the
/// analytic-limit branch, relative to `r`.
const DEGENERATE_ALPHA_WINDOW: f64 = 1e-7;

struct Powers {
    theta: f64,
    k: i32,
    tb: f64,
    /// `1 - theta^{K+B}`
    den0: f64,
    /// `1 - theta^{K+B+1}`
    den1: f64,
}

fn powers(p: &SystemParams) -> Result<Powers> {
    p.require_negligible_service()?;
    let theta = p.theta();
    let k = p.buffer as i32;
    let b = p.battery as i32;
    Ok(Powers {
        theta,
        k,
        tb: theta.powi(b),
        den0: 1.0 - theta.powi(k + b),
        den1: 1.0 - theta.powi(k + b + 1),
    })
}

/// Rate of valid updates; under FCFS every admitted packet is one.
pub fn valid_rate(p: &SystemParams) -> Result<f64> {
    let w = powers(p)?;
    Ok(p.lambda * w.den0 / w.den1)
}

/// Distribution of the peak AoI.
pub fn peak_dist(p: &SystemParams) -> Result<ExpPolyDist> {
    let w = powers(p)?;
    let (theta, k) = (w.theta, w.k);
    let tail = theta.powi(k) * w.tb / w.den0;
    let mut terms = Vec::with_capacity(p.buffer + 2);
    terms.push(ExpPolyTerm::new(1.0 / w.den0, 0, p.lambda));
    terms.push(ExpPolyTerm::new(-tail, 0, p.r));
    for n in 1..=k {
        // theta^{-1} (lambda a)^n / n! - theta^K (r a)^n / n!, both over the rate-r Poisson weight
        let weight = w.tb * (theta.powi(n - 1) - theta.powi(k)) / w.den0;
        terms.push(ExpPolyTerm::new(weight, n as u32, p.r));
    }
    Ok(ExpPolyDist::new(0.0, terms))
}

/// Distribution of the sojourn time of valid updates.
///
/// A packet arriving to a nonempty battery leaves at once (the atom); one
/// arriving behind `i` waiting packets waits for `i + 1` energy arrivals.
pub fn sojourn_dist(p: &SystemParams) -> Result<ExpPolyDist> {
    let w = powers(p)?;
    let (theta, k) = (w.theta, w.k);
    let atom = (1.0 - w.tb) / w.den0;
    let terms = (0..k)
        .map(|n| {
            let weight = w.tb * (theta.powi(n) - theta.powi(k)) / w.den0;
            ExpPolyTerm::new(weight, n as u32, p.r)
        })
        .collect();
    Ok(ExpPolyDist::new(atom, terms))
}

pub fn stats(p: &SystemParams) -> Result<UpdateProcessStats> {
    Ok(UpdateProcessStats {
        valid_rate: valid_rate(p)?,
        peak: peak_dist(p)?,
        sojourn: sojourn_dist(p)?,
    })
}

/// Average AoI.
pub fn avg_aoi(p: &SystemParams) -> Result<f64> {
    let w = powers(p)?;
    let (theta, k) = (w.theta, w.k);
    let bracket = -(k as f64) * theta.powi(k)
        + (1.0 + theta.powi(k - 1) - 3.0 * theta.powi(k) + theta.powi(k + 1)) / (1.0 - theta);
    Ok(1.0 / p.lambda + theta / p.r * w.tb / w.den1 * bracket)
}

pub(crate) fn check_alpha(p: &SystemParams, alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha == 0.0 {
        return Err(Error::InvalidPenalty(format!(
            "exponential penalty needs a finite nonzero alpha, got {alpha}"
        )));
    }
    if alpha >= p.lambda {
        return Err(Error::PenaltyDiverges(format!(
            "alpha must be < lambda (alpha = {alpha}, lambda = {})",
            p.lambda
        )));
    }
    Ok(())
}

/// Average penalty under `g(delta) = (e^{alpha delta} - 1) / alpha`.
pub fn avg_exp_penalty(p: &SystemParams, alpha: f64) -> Result<f64> {
    let w = powers(p)?;
    check_alpha(p, alpha)?;
    let (lambda, r) = (p.lambda, p.r);
    let (theta, k) = (w.theta, w.k);
    let scale = w.tb / w.den1;
    if (alpha - (r - lambda)).abs() < DEGENERATE_ALPHA_WINDOW * r {
        let bracket = (theta.powi(k + 2) - 2.0 * theta + 1.0) / ((2.0 * theta - 1.0) * (1.0 - theta))
            + k as f64 / theta;
        return Ok(1.0 / (lambda - alpha) + scale / r * bracket);
    }
    // (1 - x^{K+1}) / (r - alpha - lambda) with x = lambda / (r - alpha)
    let x = lambda / (r - alpha);
    let tail = geometric_sum(x, (k + 1) as u32) / (r - alpha);
    let bracket = theta.powi(k + 2) / (lambda - alpha) + (1.0 - theta) * tail - 1.0 / (r - alpha);
    Ok(1.0 / (lambda - alpha) + r / alpha * scale * bracket)
}

/// Probability that the AoI exceeds `beta`.
pub fn violation_prob(p: &SystemParams, beta: f64) -> Result<f64> {
    let w = powers(p)?;
    check_beta(beta)?;
    if beta == 0.0 {
        return Ok(1.0);
    }
    let (lambda, r) = (p.lambda, p.r);
    let tk1 = w.theta.powi(w.k + 1);
    let n = w.k as u32;
    let e_lambda = (-lambda * beta).exp();
    let bracket = exp_poisson_sum(r * beta, lambda * beta, n) - tk1 * poisson_cdf(n, r * beta)
        + e_lambda * tk1
        - (-r * beta).exp();
    Ok((e_lambda + w.tb / w.den1 * bracket).clamp(0.0, 1.0))
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidPenalty(format!(
            "threshold must be finite and >= 0, got {beta}"
        )));
    }
    Ok(())
}

/// `(P{A > beta}, P{AoI > beta})`. The peak tail bounds the AoI violation
/// probability from above.
pub fn peak_violation_bound_check(p: &SystemParams, beta: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let peak_tail = peak_dist(p)?.survivor(beta).clamp(0.0, 1.0);
    Ok((peak_tail, violation_prob(p, beta)?))
}

/// CDF of the inter-arrival time between consecutive valid updates.
pub fn interarrival_cdf(p: &SystemParams, x: f64) -> Result<f64> {
    let w = powers(p)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let tkb = w.theta.powi(w.k + p.battery as i32);
    Ok(1.0 + ((-p.r * x).exp() * tkb - (-p.lambda * x).exp()) / w.den0)
}

/// Smallest battery capacity whose FCFS average AoI does not exceed
/// `delta_max`, for the given rates and buffer.
///
/// The returned `B` satisfies `avg_aoi(B) <= delta_max` and either `B = 1`
/// or `avg_aoi(B - 1) > delta_max`.
pub fn min_battery_for_aoi(lambda: f64, r: f64, buffer: usize, delta_max: f64) -> Result<usize> {
    let base = validate_params(SystemParams {
        lambda,
        r,
        buffer,
        battery: 1,
        mu: None,
    })?;
    if !(delta_max.is_finite() && delta_max > 1.0 / lambda) {
        return Err(Error::Infeasible(format!(
            "average AoI cannot reach {delta_max}: even an infinite battery gives 1/lambda = {}",
            1.0 / lambda
        )));
    }
    let theta = base.theta();
    let k = buffer as i32;
    let tk = theta.powi(k);
    let numer = lambda * delta_max - 1.0;
    let denom = lambda * delta_max * theta.powi(k + 1)
        + theta * theta * (-(k as f64) * tk - tk + (1.0 - tk) / (1.0 - theta));
    if denom <= 0.0 {
        return Err(Error::DegenerateArgument(format!(
            "log argument is nonpositive: any B >= 1 already meets delta_max = {delta_max}"
        )));
    }
    let real_b = (numer / denom).ln() / theta.ln();
    let mut b = if real_b.is_finite() {
        real_b.ceil().clamp(1.0, MAX_CAPACITY as f64) as usize
    } else {
        1
    };
    let aoi = |b: usize| avg_aoi(&base.with_battery(b)?);
    while aoi(b)? > delta_max {
        if b == MAX_CAPACITY {
            return Err(Error::Infeasible(format!(
                "delta_max = {delta_max} needs a battery above {MAX_CAPACITY}"
            )));
        }
        b += 1;
    }
    while b > 1 && aoi(b - 1)? <= delta_max {
        b -= 1;
    }
    Ok(b)
}
