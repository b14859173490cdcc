//! Seeded discrete-event simulation of the buffer/battery system.
//!
//! Three exponential clocks drive the system: status arrivals (`lambda`),
//! energy arrivals (`r`) and, in exponential-service mode, service
//! completions (`mu`). Each clock draws from its own ChaCha8 stream derived
//! from the master seed, so a run is a pure function of its config.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::params::{Discipline, SystemParams};
use crate::penalty::PenaltySpec;
use crate::{fcfs, Error, Result};

const STREAM_STATUS: u64 = 1;
const STREAM_ENERGY: u64 = 2;
const STREAM_SERVICE: u64 = 3;
const STREAM_RESERVOIR: u64 = 4;
const MAX_BATCHES: usize = 256;
/// Resolution of [`SampleSummary::quantiles`].
pub const QUANTILE_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Service {
    /// Transmission takes no time; a packet leaves as soon as energy is
    /// available.
    Instantaneous,
    /// Transmission takes an exponential time with the given rate.
    Exponential(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// Stop after this many valid updates.
    ValidUpdates(u64),
    /// Stop after this many events of any kind.
    Events(u64),
    /// Stop at this simulated time.
    Time(f64),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: SystemParams,
    pub discipline: Discipline,
    pub service: Service,
    pub horizon: Horizon,
    pub seed: u64,
    /// Leading fraction of the horizon excluded from statistics.
    pub warmup_fraction: f64,
    /// Penalties whose time average is reported.
    pub penalties: Vec<PenaltySpec>,
    /// Maximum number of stored samples per sample kind.
    pub reservoir_cap: usize,
}

impl SimConfig {
    /// Defaults: service mode taken from `params.mu`, 10^6 valid updates,
    /// seed 0, 10% warmup, linear penalty only, 200 000 stored samples.
    pub fn new(params: SystemParams, discipline: Discipline) -> Self {
        SimConfig {
            params,
            discipline,
            service: match params.mu {
                Some(mu) => Service::Exponential(mu),
                None => Service::Instantaneous,
            },
            horizon: Horizon::ValidUpdates(1_000_000),
            seed: 0,
            warmup_fraction: 0.1,
            penalties: vec![PenaltySpec::linear()],
            reservoir_cap: 200_000,
        }
    }

    pub fn with_horizon(mut self, horizon: Horizon) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_warmup(mut self, fraction: f64) -> Self {
        self.warmup_fraction = fraction;
        self
    }

    pub fn with_penalties(mut self, penalties: Vec<PenaltySpec>) -> Self {
        self.penalties = penalties;
        self
    }

    pub fn with_reservoir_cap(mut self, cap: usize) -> Self {
        self.reservoir_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        crate::validate_params(self.params)?;
        match (self.service, self.params.mu) {
            (Service::Instantaneous, None) => {}
            (Service::Exponential(mu), Some(pmu)) if mu == pmu => {
                if self.discipline == Discipline::Lcfs {
                    return Err(Error::ModeUnsupported(
                        "exponential service is only defined for FCFS".into(),
                    ));
                }
            }
            _ => {
                return Err(Error::InvalidConfig(
                    "service mode must agree with params.mu".into(),
                ))
            }
        }
        let positive = match self.horizon {
            Horizon::ValidUpdates(n) | Horizon::Events(n) => n > 0,
            Horizon::Time(t) => t.is_finite() && t > 0.0,
        };
        if !positive {
            return Err(Error::InvalidConfig("horizon must be positive".into()));
        }
        if !(0.0..=0.5).contains(&self.warmup_fraction) {
            return Err(Error::InvalidConfig(format!(
                "warmup fraction must lie in [0, 0.5], got {}",
                self.warmup_fraction
            )));
        }
        Ok(())
    }
}

/// A ratio estimate with a batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Ratio estimator `sum(y) / sum(l)` over a sequence of (y, l) pairs, with
/// batches that double in size so memory stays bounded.
#[derive(Debug, Clone)]
struct RatioBatches {
    batch_size: u64,
    in_batch: u64,
    cur: (f64, f64),
    batches: Vec<(f64, f64)>,
    total: (f64, f64),
}

impl RatioBatches {
    fn new() -> Self {
        RatioBatches {
            batch_size: 1,
            in_batch: 0,
            cur: (0.0, 0.0),
            batches: Vec::new(),
            total: (0.0, 0.0),
        }
    }

    fn add(&mut self, y: f64, l: f64) {
        self.cur.0 += y;
        self.cur.1 += l;
        self.total.0 += y;
        self.total.1 += l;
        self.in_batch += 1;
        if self.in_batch == self.batch_size {
            self.batches.push(self.cur);
            self.cur = (0.0, 0.0);
            self.in_batch = 0;
            if self.batches.len() == MAX_BATCHES {
                self.batches = self
                    .batches
                    .chunks(2)
                    .map(|c| (c[0].0 + c[1].0, c[0].1 + c[1].1))
                    .collect();
                self.batch_size *= 2;
            }
        }
    }

    fn estimate(&self) -> Estimate {
        let value = self.total.0 / self.total.1;
        let m = self.batches.len();
        let std_error = if m < 8 {
            f64::NAN
        } else {
            let mean_l = self.batches.iter().map(|b| b.1).sum::<f64>() / m as f64;
            let ss: f64 = self
                .batches
                .iter()
                .map(|b| (b.0 - value * b.1).powi(2))
                .sum();
            (ss / (m as f64 * (m as f64 - 1.0))).sqrt() / mean_l
        };
        Estimate { value, std_error }
    }
}

/// Streaming summary of one kind of per-update sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSummary {
    pub count: u64,
    pub mean: Estimate,
    pub second_moment: f64,
    pub min: f64,
    pub max: f64,
    /// Number of samples exactly equal to zero.
    pub zeros: u64,
    /// Uniform sample of at most `reservoir_cap` values, sorted ascending.
    pub reservoir: Vec<f64>,
    /// Empirical quantiles at `0, QUANTILE_STEP, ..., 1` from the reservoir.
    pub quantiles: Vec<f64>,
}

impl SampleSummary {
    /// Empirical CDF of the reservoir at `x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        if self.reservoir.is_empty() {
            return f64::NAN;
        }
        let below = self.reservoir.partition_point(|v| *v <= x);
        below as f64 / self.reservoir.len() as f64
    }

    pub fn zero_fraction(&self) -> f64 {
        self.zeros as f64 / self.count as f64
    }

    /// Mean of the strictly positive samples.
    pub fn positive_mean(&self) -> f64 {
        self.mean.value * self.count as f64 / (self.count - self.zeros) as f64
    }

    /// `sup |F_n(x) - F(x)|` of the reservoir against a CDF that is
    /// continuous except for a possible atom at zero, evaluated at both
    /// sides of every jump.
    pub fn kolmogorov_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.reservoir.len() as f64;
        let mut worst = 0.0f64;
        let mut i = 0;
        while i < self.reservoir.len() {
            let x = self.reservoir[i];
            let mut j = i;
            while j < self.reservoir.len() && self.reservoir[j] == x {
                j += 1;
            }
            let f = cdf(x);
            let f_left = if x <= 0.0 { 0.0 } else { f };
            worst = worst.max((f_left - i as f64 / n).abs()).max((f - j as f64 / n).abs());
            i = j;
        }
        worst
    }
}

struct SampleCollector {
    cap: usize,
    count: u64,
    batches: RatioBatches,
    sum_sq: f64,
    min: f64,
    max: f64,
    zeros: u64,
    reservoir: Vec<f64>,
}

impl SampleCollector {
    fn new(cap: usize) -> Self {
        SampleCollector {
            cap,
            count: 0,
            batches: RatioBatches::new(),
            sum_sq: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            zeros: 0,
            reservoir: Vec::new(),
        }
    }

    fn push(&mut self, x: f64, rng: &mut ChaCha8Rng) {
        self.count += 1;
        self.batches.add(x, 1.0);
        self.sum_sq += x * x;
        self.min = self.min.min(x);
        self.max = self.max.max(x);
        if x == 0.0 {
            self.zeros += 1;
        }
        if self.reservoir.len() < self.cap {
            self.reservoir.push(x);
        } else if self.cap > 0 {
            let slot = rng.random_range(0..self.count);
            if (slot as usize) < self.cap {
                self.reservoir[slot as usize] = x;
            }
        }
    }

    fn finish(mut self) -> SampleSummary {
        self.reservoir.sort_by(f64::total_cmp);
        let steps = (1.0 / QUANTILE_STEP).round() as usize;
        let quantiles = if self.reservoir.is_empty() {
            Vec::new()
        } else {
            let n = self.reservoir.len();
            (0..=steps)
                .map(|i| {
                    let rank = (i as f64 * QUANTILE_STEP * (n - 1) as f64).round() as usize;
                    self.reservoir[rank.min(n - 1)]
                })
                .collect()
        };
        SampleSummary {
            count: self.count,
            mean: self.batches.estimate(),
            second_moment: self.sum_sq / self.count as f64,
            min: self.min,
            max: self.max,
            zeros: self.zeros,
            reservoir: self.reservoir,
            quantiles,
        }
    }
}

/// Event counts over the whole run, warmup included.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub events: u64,
    pub arrivals: u64,
    /// FCFS arrivals refused because the buffer was full.
    pub blocked: u64,
    /// LCFS packets dropped from a full buffer.
    pub discarded: u64,
    pub delivered: u64,
    pub valid_updates: u64,
    pub energy_arrivals: u64,
    pub energy_discarded: u64,
    /// Packets still waiting or in service when the run stopped.
    pub in_system_at_end: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub valid_rate_hat: Estimate,
    /// Time-averaged penalty keyed by [`PenaltySpec::id`].
    pub time_avg_penalty: BTreeMap<String, Estimate>,
    pub peak: SampleSummary,
    pub sojourn: SampleSummary,
    /// Gaps between generation times of consecutive valid updates.
    pub interarrival: SampleSummary,
    pub aoi_time_integral: f64,
    /// Length of the measured window.
    pub elapsed_sim_time: f64,
    pub counts: Counts,
    /// Time fraction of `S = q1 - q2` at index `S + B` (instantaneous mode only).
    pub occupancy: Option<Vec<f64>>,
    /// Time fraction with no data packet in the system.
    pub level_zero_fraction: f64,
    /// Time-averaged number of data packets in the system.
    pub mean_queue_length: f64,
    /// Valid updates violating `A_i = X_i + T_i` or `A_{i+1} = D_i + T_i`.
    pub identity_violations: u64,
    /// LCFS deliveries where "no arrival since this packet's arrival"
    /// disagreed with "newer than the last valid update".
    pub validity_mismatches: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Status,
    Energy,
    Service,
}

impl EventKind {
    fn as_str(self) -> &'static str {
        match self {
            EventKind::Status => "status",
            EventKind::Energy => "energy",
            EventKind::Service => "service",
        }
    }
}

struct Clock {
    rng: ChaCha8Rng,
    dist: Exp<f64>,
}

impl Clock {
    fn new(seed: u64, stream: u64, rate: f64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let dist = Exp::new(rate).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(Clock { rng, dist })
    }

    fn draw(&mut self) -> f64 {
        self.dist.sample(&mut self.rng)
    }
}

struct Simulation<'a> {
    cfg: &'a SimConfig,
    now: f64,
    queue: VecDeque<f64>,
    battery: usize,
    /// Generation time of the packet in service (exponential mode).
    in_service: Option<f64>,
    last_arrival: f64,
    last_valid_gen: f64,
    last_valid_delivery: f64,
    last_peak_sojourn: Option<f64>,
    counts: Counts,
    measuring: bool,
    window_start: f64,
    /// Time from which the AoI integral has not been accounted yet.
    accounted_to: f64,
    penalties: Vec<RatioBatches>,
    valid_rate: RatioBatches,
    aoi_integral: f64,
    peak: SampleCollector,
    sojourn: SampleCollector,
    interarrival: SampleCollector,
    occupancy: Vec<f64>,
    level_zero_time: f64,
    queue_time: f64,
    last_state_change: f64,
    identity_violations: u64,
    validity_mismatches: u64,
    sample_rng: ChaCha8Rng,
}

impl<'a> Simulation<'a> {
    fn new(cfg: &'a SimConfig) -> Self {
        let p = &cfg.params;
        let mut sample_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        sample_rng.set_stream(STREAM_RESERVOIR);
        Simulation {
            cfg,
            now: 0.0,
            queue: VecDeque::new(),
            battery: 0,
            in_service: None,
            last_arrival: 0.0,
            last_valid_gen: 0.0,
            last_valid_delivery: 0.0,
            last_peak_sojourn: None,
            counts: Counts::default(),
            measuring: false,
            window_start: 0.0,
            accounted_to: 0.0,
            penalties: cfg.penalties.iter().map(|_| RatioBatches::new()).collect(),
            valid_rate: RatioBatches::new(),
            aoi_integral: 0.0,
            peak: SampleCollector::new(cfg.reservoir_cap),
            sojourn: SampleCollector::new(cfg.reservoir_cap),
            interarrival: SampleCollector::new(cfg.reservoir_cap),
            occupancy: vec![0.0; p.buffer + p.battery + 1],
            level_zero_time: 0.0,
            queue_time: 0.0,
            last_state_change: 0.0,
            identity_violations: 0,
            validity_mismatches: 0,
            sample_rng,
        }
    }

    fn q1(&self) -> usize {
        self.queue.len() + usize::from(self.in_service.is_some())
    }

    fn aoi(&self) -> f64 {
        self.now - self.last_valid_gen
    }

    fn start_measuring(&mut self, at: f64) {
        self.measuring = true;
        self.window_start = at;
        self.accounted_to = at;
        self.last_state_change = at;
    }

    /// Credits the time since the last state change to the current state.
    fn account_state(&mut self, until: f64) {
        if !self.measuring {
            return;
        }
        let dt = until - self.last_state_change;
        let q1 = self.q1();
        if self.cfg.service == Service::Instantaneous {
            let idx = q1 + self.cfg.params.battery - self.battery;
            self.occupancy[idx] += dt;
        }
        if q1 == 0 {
            self.level_zero_time += dt;
        }
        self.queue_time += dt * q1 as f64;
        self.last_state_change = until;
    }

    /// Accounts the AoI integral up to `until` as one cycle piece.
    fn account_aoi(&mut self, until: f64, closes_cycle: bool) {
        if !self.measuring {
            return;
        }
        let lo = self.accounted_to - self.last_valid_gen;
        let hi = until - self.last_valid_gen;
        let duration = until - self.accounted_to;
        self.aoi_integral += (hi - lo) * (hi + lo) / 2.0;
        for (spec, batches) in self.cfg.penalties.iter().zip(self.penalties.iter_mut()) {
            batches.add(spec.segment_integral(lo, hi), duration);
        }
        self.valid_rate.add(if closes_cycle { 1.0 } else { 0.0 }, duration);
        self.accounted_to = until;
    }

    fn deliver(&mut self, gen: f64) {
        self.counts.delivered += 1;
        let valid = gen > self.last_valid_gen;
        if self.cfg.discipline == Discipline::Lcfs {
            let no_newer_arrival = self.last_arrival == gen;
            if valid != no_newer_arrival {
                self.validity_mismatches += 1;
            }
        }
        if !valid {
            return;
        }
        self.counts.valid_updates += 1;
        self.account_aoi(self.now, true);
        let sojourn = self.now - gen;
        let peak = self.now - self.last_valid_gen;
        let gap = gen - self.last_valid_gen;
        let interdelivery = self.now - self.last_valid_delivery;
        let first = self.last_peak_sojourn.is_none();
        if self.measuring && !first {
            let tol = 1e-9 * peak.max(1.0);
            let prev_sojourn = self.last_peak_sojourn.unwrap_or(0.0);
            if (peak - (gap + sojourn)).abs() > tol
                || (peak - (interdelivery + prev_sojourn)).abs() > tol
            {
                self.identity_violations += 1;
            }
            let rng = &mut self.sample_rng;
            self.peak.push(peak, rng);
            self.sojourn.push(sojourn, rng);
            self.interarrival.push(gap, rng);
        }
        self.last_peak_sojourn = Some(sojourn);
        self.last_valid_gen = gen;
        self.last_valid_delivery = self.now;
    }

    fn on_status(&mut self) {
        self.counts.arrivals += 1;
        self.last_arrival = self.now;
        let gen = self.now;
        match self.cfg.service {
            Service::Instantaneous => {
                if self.battery > 0 {
                    self.battery -= 1;
                    self.deliver(gen);
                } else if self.queue.len() < self.cfg.params.buffer {
                    self.queue.push_back(gen);
                } else {
                    match self.cfg.discipline {
                        Discipline::Fcfs => self.counts.blocked += 1,
                        Discipline::Lcfs => {
                            self.counts.discarded += 1;
                            if self.queue.pop_front().is_some() {
                                self.queue.push_back(gen);
                            }
                        }
                    }
                }
            }
            Service::Exponential(_) => self.queue.push_back(gen),
        }
    }

    fn on_energy(&mut self) {
        self.counts.energy_arrivals += 1;
        let next = match (self.cfg.service, self.cfg.discipline) {
            (Service::Instantaneous, Discipline::Fcfs) => self.queue.pop_front(),
            (Service::Instantaneous, Discipline::Lcfs) => self.queue.pop_back(),
            (Service::Exponential(_), _) => None,
        };
        match next {
            Some(gen) => self.deliver(gen),
            None if self.battery < self.cfg.params.battery => self.battery += 1,
            None => self.counts.energy_discarded += 1,
        }
    }

    fn on_service(&mut self) {
        let gen = self.in_service.take().expect("completion without a packet in service");
        self.battery -= 1;
        self.deliver(gen);
    }

    /// In exponential mode, starts a service when idle with work and energy.
    /// Returns whether one started.
    fn try_start_service(&mut self) -> bool {
        if self.in_service.is_none() && self.battery > 0 {
            if let Some(gen) = self.queue.pop_front() {
                self.in_service = Some(gen);
                return true;
            }
        }
        false
    }
}

/// Runs the simulation described by `cfg`.
pub fn run_sim(cfg: &SimConfig) -> Result<SimResult> {
    run(cfg, None)
}

/// Runs the simulation and writes one line per event to `log`:
/// `time<TAB>kind<TAB>q1<TAB>q2<TAB>aoi`, where `kind` is `status`, `energy`
/// or `service` and the state and AoI are taken just after the event. The
/// first line is a `#`-prefixed header.
pub fn run_sim_with_log(cfg: &SimConfig, log: &mut dyn Write) -> Result<SimResult> {
    run(cfg, Some(log))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn run(cfg: &SimConfig, mut log: Option<&mut dyn Write>) -> Result<SimResult> {
    cfg.validate()?;
    let p = &cfg.params;
    let mut status = Clock::new(cfg.seed, STREAM_STATUS, p.lambda)?;
    let mut energy = Clock::new(cfg.seed, STREAM_ENERGY, p.r)?;
    let mut service = match cfg.service {
        Service::Exponential(mu) => Some(Clock::new(cfg.seed, STREAM_SERVICE, mu)?),
        Service::Instantaneous => None,
    };
    let mut sim = Simulation::new(cfg);
    if let Some(w) = log.as_deref_mut() {
        writeln!(w, "# time\tkind\tq1\tq2\taoi").map_err(io_err)?;
    }

    let (warm_count, warm_time) = match cfg.horizon {
        Horizon::ValidUpdates(n) | Horizon::Events(n) => {
            ((n as f64 * cfg.warmup_fraction).floor() as u64, f64::INFINITY)
        }
        Horizon::Time(t) => (u64::MAX, t * cfg.warmup_fraction),
    };
    if warm_count == 0 || warm_time == 0.0 {
        sim.start_measuring(0.0);
    }
    let progress = |c: &Counts| match cfg.horizon {
        Horizon::ValidUpdates(_) => c.valid_updates,
        Horizon::Events(_) => c.events,
        Horizon::Time(_) => 0,
    };

    let mut next_status = status.draw();
    let mut next_energy = energy.draw();
    let mut next_service = f64::INFINITY;
    loop {
        let (t, kind) = if next_status <= next_energy && next_status <= next_service {
            (next_status, EventKind::Status)
        } else if next_energy <= next_service {
            (next_energy, EventKind::Energy)
        } else {
            (next_service, EventKind::Service)
        };
        if let Horizon::Time(end) = cfg.horizon {
            if !sim.measuring && t >= warm_time {
                sim.now = warm_time;
                sim.start_measuring(warm_time);
            }
            if t > end {
                sim.now = end;
                break;
            }
        }
        sim.account_state(t);
        sim.now = t;
        sim.counts.events += 1;
        match kind {
            EventKind::Status => {
                sim.on_status();
                next_status = t + status.draw();
            }
            EventKind::Energy => {
                sim.on_energy();
                next_energy = t + energy.draw();
            }
            EventKind::Service => {
                sim.on_service();
                next_service = f64::INFINITY;
            }
        }
        if let Some(clock) = service.as_mut() {
            if sim.try_start_service() {
                next_service = t + clock.draw();
            }
        }
        if let Some(w) = log.as_deref_mut() {
            writeln!(
                w,
                "{t:.9}\t{}\t{}\t{}\t{:.9}",
                kind.as_str(),
                sim.q1(),
                sim.battery,
                sim.aoi()
            )
            .map_err(io_err)?;
        }
        let done = progress(&sim.counts);
        if !sim.measuring && done >= warm_count {
            sim.start_measuring(t);
        }
        match cfg.horizon {
            Horizon::ValidUpdates(n) | Horizon::Events(n) if done >= n => break,
            _ => {}
        }
    }
    let end = sim.now;
    if !sim.measuring {
        sim.start_measuring(end);
    }
    sim.account_state(end);
    sim.account_aoi(end, false);
    sim.counts.in_system_at_end = sim.q1() as u64;

    let elapsed = end - sim.window_start;
    let occupancy = match cfg.service {
        Service::Instantaneous => Some(sim.occupancy.iter().map(|t| t / elapsed).collect()),
        Service::Exponential(_) => None,
    };
    let time_avg_penalty = cfg
        .penalties
        .iter()
        .zip(sim.penalties.iter())
        .map(|(spec, b)| (spec.id(), b.estimate()))
        .collect();
    Ok(SimResult {
        valid_rate_hat: sim.valid_rate.estimate(),
        time_avg_penalty,
        peak: sim.peak.finish(),
        sojourn: sim.sojourn.finish(),
        interarrival: sim.interarrival.finish(),
        aoi_time_integral: sim.aoi_integral,
        elapsed_sim_time: elapsed,
        counts: sim.counts,
        occupancy,
        level_zero_fraction: sim.level_zero_time / elapsed,
        mean_queue_length: sim.queue_time / elapsed,
        identity_violations: sim.identity_violations,
        validity_mismatches: sim.validity_mismatches,
    })
}

/// Long-run time fraction of each collapsed state `S = q1 - q2`, keyed by `S`.
pub fn state_occupancy(cfg: &SimConfig) -> Result<BTreeMap<i64, f64>> {
    if cfg.service != Service::Instantaneous {
        return Err(Error::ModeUnsupported(
            "state occupancy is defined for instantaneous service only".into(),
        ));
    }
    let res = run_sim(cfg)?;
    let b = cfg.params.battery as i64;
    Ok(res
        .occupancy
        .unwrap_or_default()
        .into_iter()
        .enumerate()
        .map(|(i, f)| (i as i64 - b, f))
        .collect())
}

/// Stationary law of the collapsed state, keyed by `S`.
pub fn collapsed_state_law(p: &SystemParams) -> BTreeMap<i64, f64> {
    let theta = p.theta();
    let n = (p.buffer + p.battery) as i32;
    let norm = (1.0 - theta) / (1.0 - theta.powi(n + 1));
    let b = p.battery as i64;
    (0..=n)
        .map(|i| (i as i64 - b, norm * theta.powi(i)))
        .collect()
}

/// Largest deviation over `grid` between the empirical CDF of the gaps
/// between valid updates and its closed form.
pub fn empirical_interarrival_cdf_check(cfg: &SimConfig, grid: &[f64]) -> Result<f64> {
    if cfg.service != Service::Instantaneous || cfg.discipline != Discipline::Fcfs {
        return Err(Error::ModeUnsupported(
            "the inter-arrival law is known for FCFS with instantaneous service only".into(),
        ));
    }
    let res = run_sim(cfg)?;
    let mut worst = 0.0f64;
    for &x in grid {
        let exact = fcfs::interarrival_cdf(&cfg.params, x)?;
        worst = worst.max((res.interarrival.ecdf(x) - exact).abs());
    }
    Ok(worst)
}
