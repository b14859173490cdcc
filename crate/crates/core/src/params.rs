use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest buffer or battery capacity accepted by [`validate_params`].
pub const MAX_CAPACITY: usize = 500;

/// Parameters of the two-queue system.
///
/// `theta = lambda / r` is always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Status packet arrival rate.
    pub lambda: f64,
    /// Energy packet arrival rate.
    pub r: f64,
    /// Data buffer capacity `K`, in packets.
    pub buffer: usize,
    /// Battery capacity `B`, in energy packets.
    pub battery: usize,
    /// Service rate. `None` selects the negligible-service-time regime.
    pub mu: Option<f64>,
}

impl SystemParams {
    /// Validated parameters for the negligible-service-time regime.
    pub fn new(lambda: f64, r: f64, buffer: usize, battery: usize) -> Result<Self> {
        validate_params(SystemParams {
            lambda,
            r,
            buffer,
            battery,
            mu: None,
        })
    }

    /// Parameters with `lambda = theta * r`.
    pub fn from_theta(theta: f64, r: f64, buffer: usize, battery: usize) -> Result<Self> {
        Self::new(theta * r, r, buffer, battery)
    }

    pub fn with_service_rate(self, mu: f64) -> Result<Self> {
        validate_params(SystemParams {
            mu: Some(mu),
            ..self
        })
    }

    pub fn with_buffer(self, buffer: usize) -> Result<Self> {
        validate_params(SystemParams { buffer, ..self })
    }

    pub fn with_battery(self, battery: usize) -> Result<Self> {
        validate_params(SystemParams { battery, ..self })
    }

    /// Data-to-energy ratio `lambda / r`.
    pub fn theta(&self) -> f64 {
        self.lambda / self.r
    }

    pub(crate) fn require_negligible_service(&self) -> Result<()> {
        validate_params(*self)?;
        match self.mu {
            None => Ok(()),
            Some(_) => Err(Error::ModeUnsupported(
                "closed forms require negligible service time (mu absent)".into(),
            )),
        }
    }
}

fn check_rate(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRate(format!("{name} must be finite and > 0, got {value}")))
    }
}

/// Returns `p` unchanged when every parameter invariant holds.
pub fn validate_params(p: SystemParams) -> Result<SystemParams> {
    check_rate("lambda", p.lambda)?;
    check_rate("r", p.r)?;
    if let Some(mu) = p.mu {
        check_rate("mu", mu)?;
    }
    if p.lambda >= p.r {
        return Err(Error::UnstableSystem {
            lambda: p.lambda,
            r: p.r,
        });
    }
    if p.battery < 1 {
        return Err(Error::InvalidCapacity("battery capacity B must be >= 1".into()));
    }
    if p.battery > MAX_CAPACITY || p.buffer > MAX_CAPACITY {
        return Err(Error::InvalidCapacity(format!(
            "capacities are capped at {MAX_CAPACITY} (K = {}, B = {})",
            p.buffer, p.battery
        )));
    }
    Ok(p)
}

/// Service discipline of the data buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Discipline {
    /// Oldest packet first; arrivals to a full buffer are blocked.
    Fcfs,
    /// Newest packet first; the oldest packet is discarded on overflow.
    Lcfs,
}

impl Discipline {
    pub const ALL: [Discipline; 2] = [Discipline::Fcfs, Discipline::Lcfs];

    pub fn as_str(&self) -> &'static str {
        match self {
            Discipline::Fcfs => "fcfs",
            Discipline::Lcfs => "lcfs",
        }
    }
}

impl std::fmt::Display for Discipline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Discipline {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fcfs" => Ok(Discipline::Fcfs),
            "lcfs" => Ok(Discipline::Lcfs),
            other => Err(format!("unknown discipline '{other}' (expected fcfs or lcfs)")),
        }
    }
}
