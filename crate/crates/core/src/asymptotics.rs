//! Limits of the closed forms as the buffer capacity grows without bound.
//!
//! Every limit has the shape `first + coefficient * theta^B`, where `first`
//! is also the value for an unbounded battery.

use crate::fcfs::{check_alpha, check_beta};
use crate::params::{Discipline, SystemParams};
use crate::penalty::{PenaltyKind, PenaltySpec};
use crate::{Error, Result};

/// `(first, coefficient)` so that the limit equals `first + coefficient * theta^B`.
fn parts(p: &SystemParams, d: Discipline, spec: &PenaltySpec) -> Result<(f64, f64)> {
    p.require_negligible_service()?;
    let (lambda, r) = (p.lambda, p.r);
    let theta = p.theta();
    match (d, spec.kind()) {
        (Discipline::Fcfs, PenaltyKind::Linear) => {
            Ok((1.0 / lambda, theta * theta / (lambda * (1.0 - theta))))
        }
        (Discipline::Lcfs, PenaltyKind::Linear) => Ok((1.0 / lambda, theta * theta / lambda)),
        (Discipline::Fcfs, PenaltyKind::Exponential { alpha }) => {
            let alpha = *alpha;
            check_alpha(p, alpha)?;
            if alpha >= r - lambda {
                return Err(Error::PenaltyDiverges(format!(
                    "alpha must be < r - lambda for an unbounded FCFS buffer (alpha = {alpha}, r - lambda = {})",
                    r - lambda
                )));
            }
            let coefficient = r / alpha * ((1.0 - theta) / (r - alpha - lambda) - 1.0 / (r - alpha));
            Ok((1.0 / (lambda - alpha), coefficient))
        }
        (Discipline::Lcfs, PenaltyKind::Exponential { alpha }) => {
            let alpha = *alpha;
            check_alpha(p, alpha)?;
            Ok((1.0 / (lambda - alpha), lambda / ((r - alpha) * (r - alpha))))
        }
        (Discipline::Fcfs, PenaltyKind::Step { beta }) => {
            check_beta(*beta)?;
            let beta = *beta;
            Ok(((-lambda * beta).exp(), (lambda * beta).exp_m1() * (-r * beta).exp()))
        }
        (Discipline::Lcfs, PenaltyKind::Step { beta }) => {
            check_beta(*beta)?;
            let beta = *beta;
            Ok(((-lambda * beta).exp(), lambda * beta * (-r * beta).exp()))
        }
        (_, PenaltyKind::Custom(_)) => Err(Error::UnsupportedPenalty(spec.id())),
    }
}

/// Average penalty in the limit of an unbounded data buffer (`p.buffer` is
/// ignored).
pub fn asymptotic_penalty(p: &SystemParams, d: Discipline, spec: &PenaltySpec) -> Result<f64> {
    let (first, coefficient) = parts(p, d, spec)?;
    Ok(first + coefficient * p.theta().powi(p.battery as i32))
}

/// Value of [`asymptotic_penalty`] as the battery capacity also grows
/// without bound.
pub fn limit(p: &SystemParams, d: Discipline, spec: &PenaltySpec) -> Result<f64> {
    Ok(parts(p, d, spec)?.0)
}

/// Ratio `[C(B+1) - C_inf] / [C(B) - C_inf]` of the unbounded-buffer limits,
/// which measures how fast the penalty approaches its infinite-battery value.
pub fn battery_decay_rate(p: &SystemParams, d: Discipline, spec: &PenaltySpec) -> Result<f64> {
    let (_, coefficient) = parts(p, d, spec)?;
    let theta = p.theta();
    let b = p.battery as i32;
    // The gaps are formed directly rather than by subtracting the limit, which
    // would cancel catastrophically once theta^B is small.
    let gap = coefficient * theta.powi(b);
    let next = coefficient * theta.powi(b + 1);
    if gap == 0.0 || !gap.is_finite() {
        return Err(Error::DegenerateArgument(format!(
            "{} already equals its infinite-battery limit at B = {}",
            spec.id(),
            p.battery
        )));
    }
    Ok(next / gap)
}
