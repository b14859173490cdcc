//! Age-of-Information (AoI) analysis for a status-update system whose
//! transmitter is powered by an energy-harvesting battery.
//!
//! Status packets arrive as a Poisson process of rate `lambda` into a data
//! buffer of capacity `K`; energy packets arrive as a Poisson process of rate
//! `r` into a battery of capacity `B`. Every transmission consumes one energy
//! packet. The crate evaluates freshness metrics of this system three ways:
//!
//! * exact closed forms in the negligible-service-time regime ([`fcfs`],
//!   [`lcfs`], [`asymptotics`]),
//! * a generic average-penalty engine that integrates any penalty against
//!   the peak-AoI and sojourn-time distributions ([`engine`]),
//! * a matrix-geometric solver for exponential service times ([`qbd`]),
//!
//! and cross-checks all of them with a seeded discrete-event simulator
//! ([`sim`]).

pub mod asymptotics;
pub mod dist;
pub mod engine;
mod error;
pub mod fcfs;
pub mod lcfs;
pub mod numeric;
pub mod params;
pub mod penalty;
pub mod qbd;
pub mod sim;

pub use dist::{ExpPolyDist, ExpPolyTerm, UpdateProcessStats};
pub use engine::{average_penalty, expected_g, Method, PenaltyResult};
pub use error::{Error, Result};
pub use params::{validate_params, Discipline, SystemParams, MAX_CAPACITY};
pub use penalty::{PenaltyKind, PenaltySpec};

/// Closed-form update-process statistics for a discipline in the
/// negligible-service-time regime.
pub fn update_stats(p: &SystemParams, discipline: Discipline) -> Result<UpdateProcessStats> {
    match discipline {
        Discipline::Fcfs => fcfs::stats(p),
        Discipline::Lcfs => lcfs::stats(p),
    }
}

/// Closed-form average penalty for one of the three named penalty families.
///
/// Custom penalties have no closed form; use [`average_penalty`] on
/// [`update_stats`] for those.
pub fn closed_form_penalty(
    p: &SystemParams,
    discipline: Discipline,
    spec: &PenaltySpec,
) -> Result<f64> {
    match (discipline, spec.kind()) {
        (Discipline::Fcfs, PenaltyKind::Linear) => fcfs::avg_aoi(p),
        (Discipline::Fcfs, PenaltyKind::Exponential { alpha }) => fcfs::avg_exp_penalty(p, *alpha),
        (Discipline::Fcfs, PenaltyKind::Step { beta }) => fcfs::violation_prob(p, *beta),
        (Discipline::Lcfs, PenaltyKind::Linear) => lcfs::avg_aoi(p),
        (Discipline::Lcfs, PenaltyKind::Exponential { alpha }) => lcfs::avg_exp_penalty(p, *alpha),
        (Discipline::Lcfs, PenaltyKind::Step { beta }) => lcfs::violation_prob(p, *beta),
        (_, PenaltyKind::Custom(_)) => Err(Error::UnsupportedPenalty(spec.id())),
    }
}
