//! Closed forms for the LCFS discipline with negligible service time.
//!
//! On buffer overflow the oldest waiting packet is dropped; each energy
//! arrival transmits the newest waiting packet. Expressions are stabilized
//! the same way as in [`crate::fcfs`].

use crate::dist::{ExpPolyDist, ExpPolyTerm, UpdateProcessStats};
use crate::fcfs::{check_alpha, check_beta};
use crate::numeric::{exp_poisson_sum, poisson_cdf};
use crate::params::SystemParams;
use crate::Result;

struct Powers {
    theta: f64,
    k: i32,
    tb: f64,
    /// `1 - theta^{K+B+1}`
    den1: f64,
    /// `(1 - theta^B)(1 + theta) + theta^B (1 - theta^{K+1})`
    ds: f64,
}

fn powers(p: &SystemParams) -> Result<Powers> {
    p.require_negligible_service()?;
    let theta = p.theta();
    let k = p.buffer as i32;
    let b = p.battery as i32;
    let tb = theta.powi(b);
    Ok(Powers {
        theta,
        k,
        tb,
        den1: 1.0 - theta.powi(k + b + 1),
        ds: (1.0 - tb) * (1.0 + theta) + tb * (1.0 - theta.powi(k + 1)),
    })
}

/// Rate of valid updates. Packets dropped from the buffer or overtaken by a
/// newer delivery do not count.
pub fn valid_rate(p: &SystemParams) -> Result<f64> {
    let w = powers(p)?;
    Ok(p.lambda * w.ds / ((1.0 + w.theta) * w.den1))
}

/// Distribution of the sojourn time of valid updates: zero, or exponential
/// with rate `lambda + r` (the packet must be served before the next arrival).
pub fn sojourn_dist(p: &SystemParams) -> Result<ExpPolyDist> {
    let w = powers(p)?;
    let scale = w.tb * (1.0 - w.theta.powi(w.k + 1)) / w.ds;
    Ok(ExpPolyDist::new(
        1.0 - scale,
        vec![ExpPolyTerm::new(scale, 0, p.lambda + p.r)],
    ))
}

/// Distribution of the peak AoI.
pub fn peak_dist(p: &SystemParams) -> Result<ExpPolyDist> {
    let w = powers(p)?;
    let (theta, k) = (w.theta, w.k);
    let (lambda, r) = (p.lambda, p.r);
    let both = lambda + r;
    let tk1 = theta.powi(k + 1);
    let kf = k as f64;

    let c = (1.0 + theta) * w.tb / w.ds;
    let x = (1.0 - theta.powi(k + p.battery as i32 + 1)) * (1.0 + theta) / w.ds;
    let y = c * (kf / theta + (tk1 - 2.0 + 1.0 / theta) / (1.0 - theta));

    let mut terms = Vec::with_capacity(3 * p.buffer + 5);
    terms.push(ExpPolyTerm::new(x, 0, lambda));
    terms.push(ExpPolyTerm::new(y, 0, r));
    terms.push(ExpPolyTerm::new(-c * (tk1 - 1.0) / (1.0 + theta), 0, both));

    // Poisson weights at rate lambda + r: (r theta a)^k / k! = (theta/(1+theta))^k (both a)^k / k!
    let up = theta / (1.0 + theta);
    let down = 1.0 / (1.0 + theta);
    let lead = c * (kf / theta + 1.0 / theta - theta / (1.0 - theta));
    let tail = c * theta.powi(k + 2) / (1.0 - theta);
    for n in 0..=k {
        terms.push(ExpPolyTerm::new(-lead * up.powi(n), n as u32, both));
        terms.push(ExpPolyTerm::new(-tail * down.powi(n), n as u32, both));
    }
    for n in 0..k {
        let weight = c / theta * (n + 1) as f64 * up.powi(n + 1);
        terms.push(ExpPolyTerm::new(weight, (n + 1) as u32, both));
    }
    Ok(ExpPolyDist::new(0.0, terms))
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
    let tk1 = theta.powi(k + 1);
    let bracket = (1.0 - theta) * tk1 / (1.0 + theta).powi(k + 1) - tk1 + theta;
    Ok(1.0 / p.lambda + w.tb / w.den1 * bracket / p.r)
}

/// Average penalty under `g(delta) = (e^{alpha delta} - 1) / alpha`.
pub fn avg_exp_penalty(p: &SystemParams, alpha: f64) -> Result<f64> {
    let w = powers(p)?;
    check_alpha(p, alpha)?;
    let (lambda, r) = (p.lambda, p.r);
    let k = w.k;
    let bracket = 1.0 + (lambda / (lambda + r - alpha)).powi(k + 1) * (r - lambda) / (lambda - alpha)
        - w.theta.powi(k + 1) * (r - alpha) / (lambda - alpha);
    Ok(1.0 / (lambda - alpha) + lambda / ((r - alpha) * (r - alpha)) * w.tb / w.den1 * bracket)
}

/// Probability that the AoI exceeds `beta`.
pub fn violation_prob(p: &SystemParams, beta: f64) -> Result<f64> {
    let w = powers(p)?;
    check_beta(beta)?;
    if beta == 0.0 {
        return Ok(1.0);
    }
    let (lambda, r) = (p.lambda, p.r);
    let (theta, k) = (w.theta, w.k);
    let n = k as u32;
    let lb = lambda * beta;
    let e_r = (-r * beta).exp();
    let e_lambda = (-lb).exp();
    let edge = theta.powi(k + 2) / (1.0 - theta);
    let below = if n == 0 {
        0.0
    } else {
        lb * exp_poisson_sum((lambda + r) * beta, lb, n - 1)
    };
    let bracket = edge * e_r
        + (k as f64 + (1.0 - 2.0 * theta) / (1.0 - theta))
            * (e_r - exp_poisson_sum((lambda + r) * beta, lb, n))
        + below
        - edge * e_lambda * poisson_cdf(n, r * beta);
    Ok((e_lambda + w.tb / w.den1 * bracket).clamp(0.0, 1.0))
}
