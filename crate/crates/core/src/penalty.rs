//! The penalty family `g(delta)` applied to the instantaneous AoI, and its
//! antiderivative `G(x) = int_0^x g`.

use std::fmt;
use std::sync::Arc;

use crate::numeric::integrate;
use crate::{Error, Result};

/// A user-supplied penalty with a declared exponential growth bound
/// `g(delta) <= scale * e^{rate * delta}`.
#[derive(Clone)]
pub struct CustomPenalty {
    pub name: String,
    pub g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub growth_rate: f64,
    pub growth_scale: f64,
}

impl fmt::Debug for CustomPenalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPenalty")
            .field("name", &self.name)
            .field("growth_rate", &self.growth_rate)
            .field("growth_scale", &self.growth_scale)
            .finish_non_exhaustive()
    }
}

/// The kind of penalty function averaged over the AoI trajectory.
#[derive(Debug, Clone)]
pub enum PenaltyKind {
    /// `g(delta) = delta`: plain average AoI.
    Linear,
    /// `g(delta) = (e^{alpha delta} - 1) / alpha`, `alpha != 0`.
    Exponential { alpha: f64 },
    /// `g(delta) = 1{delta > beta}`: threshold violation probability.
    Step { beta: f64 },
    Custom(CustomPenalty),
}

/// A validated penalty function.
#[derive(Debug, Clone)]
pub struct PenaltySpec(PenaltyKind);

/// Below this `|alpha * x|` the exponential antiderivative switches to its
/// Taylor series.
const SERIES_CUTOFF: f64 = 0.1;

impl PenaltySpec {
    pub fn linear() -> Self {
        PenaltySpec(PenaltyKind::Linear)
    }

    pub fn exponential(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha == 0.0 {
            return Err(Error::InvalidPenalty(format!(
                "exponential penalty needs a finite nonzero alpha, got {alpha}"
            )));
        }
        Ok(PenaltySpec(PenaltyKind::Exponential { alpha }))
    }

    pub fn step(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidPenalty(format!(
                "step threshold must be finite and >= 0, got {beta}"
            )));
        }
        Ok(PenaltySpec(PenaltyKind::Step { beta }))
    }

    /// A custom penalty. `g` must be nonnegative on `[0, inf)` and satisfy
    /// `g(delta) <= growth_scale * e^{growth_rate * delta}`.
    pub fn custom<F>(name: impl Into<String>, g: F, growth_rate: f64, growth_scale: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !growth_rate.is_finite() || !(growth_scale.is_finite() && growth_scale > 0.0) {
            return Err(Error::InvalidPenalty(
                "custom penalty needs a finite growth rate and a positive growth scale".into(),
            ));
        }
        Ok(PenaltySpec(PenaltyKind::Custom(CustomPenalty {
            name: name.into(),
            g: Arc::new(g),
            growth_rate,
            growth_scale,
        })))
    }

    pub fn kind(&self) -> &PenaltyKind {
        &self.0
    }

    /// Stable identifier, e.g. `linear`, `exp(0.2)`, `step(2)`, `custom(name)`.
    pub fn id(&self) -> String {
        match &self.0 {
            PenaltyKind::Linear => "linear".into(),
            PenaltyKind::Exponential { alpha } => format!("exp({alpha})"),
            PenaltyKind::Step { beta } => format!("step({beta})"),
            PenaltyKind::Custom(c) => format!("custom({})", c.name),
        }
    }

    /// `g(delta)`.
    pub fn value(&self, delta: f64) -> f64 {
        match &self.0 {
            PenaltyKind::Linear => delta,
            PenaltyKind::Exponential { alpha } => (alpha * delta).exp_m1() / alpha,
            PenaltyKind::Step { beta } => {
                if delta > *beta {
                    1.0
                } else {
                    0.0
                }
            }
            PenaltyKind::Custom(c) => (c.g)(delta),
        }
    }

    /// `G(x) = int_0^x g(delta) d delta`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        match &self.0 {
            PenaltyKind::Linear => 0.5 * x * x,
            PenaltyKind::Exponential { alpha } => exp_antiderivative(*alpha, x),
            PenaltyKind::Step { beta } => (x - beta).max(0.0),
            PenaltyKind::Custom(c) => {
                let q = integrate(|t| (c.g)(t), 0.0, x, 1e-13, 1e-12, 1_000_000);
                q.value
            }
        }
    }

    /// `G(hi) - G(lo)`, the penalty accrued while the AoI climbs from `lo`
    /// to `hi` with unit slope.
    pub fn segment_integral(&self, lo: f64, hi: f64) -> f64 {
        match &self.0 {
            PenaltyKind::Linear => (hi - lo) * (hi + lo) / 2.0,
            PenaltyKind::Step { beta } => (hi - lo.max(*beta)).max(0.0),
            PenaltyKind::Custom(c) => {
                integrate(|t| (c.g)(t), lo, hi, 1e-13, 1e-12, 1_000_000).value
            }
            PenaltyKind::Exponential { alpha } if alpha * hi > 1.0 => {
                // G(hi) - G(lo) = e^{a lo} (e^{a (hi - lo)} - 1) / a^2 - (hi - lo) / a
                let a = *alpha;
                (a * lo).exp() * (a * (hi - lo)).exp_m1() / (a * a) - (hi - lo) / a
            }
            _ => self.antiderivative(hi) - self.antiderivative(lo),
        }
    }
}

impl fmt::Display for PenaltySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// `(e^{alpha x} - 1 - alpha x) / alpha^2`.
fn exp_antiderivative(alpha: f64, x: f64) -> f64 {
    let z = alpha * x;
    if z.abs() < SERIES_CUTOFF {
        // x^2 * sum_{k>=0} z^k / (k + 2)!
        let mut term = 0.5f64;
        let mut sum = 0.0f64;
        let mut k = 0u32;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) && k < 40 {
            sum += term;
            term *= z / (k as f64 + 3.0);
            k += 1;
        }
        sum * x * x
    } else {
        (z.exp_m1() - z) / (alpha * alpha)
    }
}

/// `g(delta)` for the given spec.
pub fn penalty_value(spec: &PenaltySpec, delta: f64) -> f64 {
    spec.value(delta)
}

/// `G(x)` for the given spec.
pub fn penalty_antiderivative(spec: &PenaltySpec, x: f64) -> f64 {
    spec.antiderivative(x)
}
