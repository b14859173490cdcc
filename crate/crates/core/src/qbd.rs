//! Matrix-geometric solution of the exponential-service model.
//!
//! The state is `(q1, q2)`: data packets in the system and energy packets in
//! the battery. Levels are `q1 = 0, 1, ...` (the data buffer is unbounded);
//! phases are `q2 = 0..=B`. A packet in service completes at rate `mu` and
//! spends one energy packet when it does, so service needs `q2 >= 1`.

use nalgebra::{DMatrix, DVector};

use crate::params::SystemParams;
use crate::{Error, Result};

pub const DEFAULT_EPS: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
/// Stationary levels are summed until the remaining mass drops below this.
pub const TAIL_MASS: f64 = 1e-12;
const MAX_LEVELS: usize = 100_000;
const NULL_SPACE_TOL: f64 = 1e-6;
const NEGATIVE_TOL: f64 = 1e-12;

/// Generator blocks of the level-independent QBD.
#[derive(Debug, Clone, PartialEq)]
pub struct QbdModel {
    pub params: SystemParams,
    /// Transitions within level 0.
    pub v_tilde: DMatrix<f64>,
    /// Transitions within a level `>= 1`.
    pub v: DMatrix<f64>,
    /// Transitions one level down (service completions).
    pub u: DMatrix<f64>,
    /// Transitions one level up (status arrivals).
    pub w: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QbdSolution {
    pub r: DMatrix<f64>,
    pub p0: DVector<f64>,
    pub iterations: usize,
    /// `max |R^2 U + R V + W|`.
    pub residual: f64,
    pub spectral_radius: f64,
}

pub fn build_qbd(p: &SystemParams) -> Result<QbdModel> {
    let p = crate::validate_params(*p)?;
    let mu = p.mu.ok_or_else(|| {
        Error::ModeUnsupported("the matrix-geometric model needs a service rate mu".into())
    })?;
    let (lambda, r) = (p.lambda, p.r);
    let n = p.battery + 1;
    let last = n - 1;

    let mut v_tilde = DMatrix::zeros(n, n);
    let mut v = DMatrix::zeros(n, n);
    let mut u = DMatrix::zeros(n, n);
    for j in 0..n {
        if j < last {
            v_tilde[(j, j + 1)] = r;
            v[(j, j + 1)] = r;
        }
        let charging = if j < last { r } else { 0.0 };
        let serving = if j > 0 { mu } else { 0.0 };
        v_tilde[(j, j)] = -(lambda + charging);
        v[(j, j)] = -(lambda + charging + serving);
        if j > 0 {
            u[(j, j - 1)] = mu;
        }
    }
    let w = DMatrix::identity(n, n) * lambda;
    Ok(QbdModel {
        params: p,
        v_tilde,
        v,
        u,
        w,
    })
}

impl QbdModel {
    pub fn phases(&self) -> usize {
        self.v.nrows()
    }

    /// Largest absolute row sum of `V~ + W` and of `U + V + W`; zero for a
    /// conservative generator.
    pub fn row_sum_defect(&self) -> f64 {
        let boundary = &self.v_tilde + &self.w;
        let interior = &self.u + &self.v + &self.w;
        let worst = |m: &DMatrix<f64>| {
            m.row_iter()
                .map(|row| row.sum().abs())
                .fold(0.0, f64::max)
        };
        worst(&boundary).max(worst(&interior))
    }

    /// Stationary distribution of the battery level while the data queue is
    /// nonempty.
    pub fn phase_distribution(&self) -> Result<DVector<f64>> {
        let a = &self.u + &self.v + &self.w;
        left_null_vector(&a).map(|x| {
            let s = x.sum();
            x / s
        })
    }

    /// `(up, down)`: mean level drift rates while the data queue is nonempty.
    /// The chain is positive recurrent iff `up < down`.
    pub fn drift(&self) -> Result<(f64, f64)> {
        let pi = self.phase_distribution()?;
        let ones = DVector::from_element(self.phases(), 1.0);
        let up = (pi.transpose() * &self.w * &ones)[(0, 0)];
        let down = (pi.transpose() * &self.u * &ones)[(0, 0)];
        Ok((up, down))
    }

    fn drift_diagnostic(&self) -> String {
        match self.drift() {
            Ok((up, down)) => format!(
                "arrival rate {up:.6} vs mean service rate {down:.6}: {}",
                if up < down { "stable" } else { "unstable" }
            ),
            Err(e) => format!("drift unavailable: {e}"),
        }
    }

    /// `R^2 U + R V + W`.
    pub fn r_equation(&self, r: &DMatrix<f64>) -> DMatrix<f64> {
        r * r * &self.u + r * &self.v + &self.w
    }
}

/// Iterates `R <- -(R^2 U + W) V^{-1}` from `R = 0`.
pub struct RIterates<'a> {
    model: &'a QbdModel,
    v_inv: DMatrix<f64>,
    current: DMatrix<f64>,
}

impl<'a> RIterates<'a> {
    pub fn new(model: &'a QbdModel) -> Result<Self> {
        let n = model.phases();
        let v_inv = model
            .v
            .clone()
            .lu()
            .try_inverse()
            .ok_or(Error::Singular("interior block V"))?;
        Ok(RIterates {
            model,
            v_inv,
            current: DMatrix::zeros(n, n),
        })
    }
}

impl Iterator for RIterates<'_> {
    type Item = DMatrix<f64>;

    fn next(&mut self) -> Option<DMatrix<f64>> {
        let r = &self.current;
        let next = -((r * r * &self.model.u + &self.model.w) * &self.v_inv);
        self.current = next.clone();
        Some(next)
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Perron root of a nonnegative matrix, by power iteration on `R + I` with
/// Collatz-Wielandt bounds.
pub fn spectral_radius(r: &DMatrix<f64>) -> f64 {
    let n = r.nrows();
    let shifted = r + DMatrix::identity(n, n);
    let mut x = DVector::from_element(n, 1.0);
    let mut estimate = 0.0;
    for _ in 0..100_000 {
        let y = &shifted * &x;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (yi, xi) in y.iter().zip(x.iter()) {
            if *xi > 0.0 {
                let ratio = yi / xi;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
        estimate = hi - 1.0;
        let norm = y.max();
        if norm.is_nan() || norm <= 0.0 {
            return 0.0;
        }
        x = y / norm;
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    estimate.max(0.0)
}

/// Minimal nonnegative solution of `R^2 U + R V + W = 0`.
pub fn solve_r(m: &QbdModel, eps: f64, max_iter: usize) -> Result<(DMatrix<f64>, usize)> {
    let mut iterates = RIterates::new(m)?;
    let mut previous = DMatrix::zeros(m.phases(), m.phases());
    for iteration in 1..=max_iter {
        let next = iterates.next().expect("iterator is infinite");
        let change = max_abs(&(&next - &previous));
        if !change.is_finite() {
            break;
        }
        previous = next;
        if change < eps {
            let rho = spectral_radius(&previous);
            // For a transient chain the iterates creep towards spectral
            // radius 1 and may stall just below it, so the drift decides too.
            let drifts_up = matches!(m.drift(), Ok((up, down)) if up >= down);
            if rho >= 1.0 || drifts_up {
                return Err(Error::NotConverged {
                    iterations: iteration,
                    spectral_radius: rho,
                    drift: m.drift_diagnostic(),
                });
            }
            return Ok((previous, iteration));
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        spectral_radius: spectral_radius(&previous),
        drift: m.drift_diagnostic(),
    })
}

/// Left null vector of a square matrix whose null space is one-dimensional.
fn left_null_vector(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    let svd = m.transpose().svd(false, true);
    let sigma = &svd.singular_values;
    let top = sigma.max();
    let tol = NULL_SPACE_TOL * top.max(f64::MIN_POSITIVE);
    let dim = sigma.iter().filter(|s| **s <= tol).count();
    if dim != 1 {
        return Err(Error::DegenerateNullSpace(dim));
    }
    let idx = sigma.imin();
    let v_t = svd.v_t.as_ref().ok_or(Error::Singular("SVD factors"))?;
    Ok(v_t.row(idx).transpose())
}

/// Boundary row `p0` with `p0 (V~ + R U) = 0` and `p0 (I - R)^{-1} 1 = 1`.
pub fn solve_boundary(m: &QbdModel, r: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = m.phases();
    let mut p0 = left_null_vector(&(&m.v_tilde + r * &m.u))?;
    let weights = geometric_weights(r)?;
    let mut mass = p0.dot(&weights);
    if mass < 0.0 {
        p0 = -p0;
        mass = -mass;
    }
    if mass.is_nan() || mass <= 0.0 {
        return Err(Error::Singular("boundary vector has no mass"));
    }
    p0 /= mass;
    if p0.min() < -NEGATIVE_TOL.max(1e-9 * p0.max()) {
        return Err(Error::DegenerateNullSpace(1));
    }
    p0.apply(|x| *x = x.max(0.0));
    let mass = p0.dot(&weights);
    debug_assert_eq!(p0.len(), n);
    Ok(p0 / mass)
}

/// `(I - R)^{-1} 1`.
fn geometric_weights(r: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = r.nrows();
    let lu = (DMatrix::identity(n, n) - r).lu();
    lu.solve(&DVector::from_element(n, 1.0))
        .ok_or(Error::Singular("I - R"))
}

pub fn solve(m: &QbdModel, eps: f64, max_iter: usize) -> Result<QbdSolution> {
    let (r, iterations) = solve_r(m, eps, max_iter)?;
    let p0 = solve_boundary(m, &r)?;
    let residual = max_abs(&m.r_equation(&r));
    let spectral_radius = spectral_radius(&r);
    Ok(QbdSolution {
        r,
        p0,
        iterations,
        residual,
        spectral_radius,
    })
}

impl QbdSolution {
    /// Mean number of data packets in the system, `p0 (I - R)^{-2} R 1`.
    pub fn mean_queue_length(&self) -> Result<f64> {
        let n = self.r.nrows();
        let lu = (DMatrix::identity(n, n) - &self.r).lu();
        let ones = DVector::from_element(n, 1.0);
        let once = lu.solve(&(&self.r * ones)).ok_or(Error::Singular("I - R"))?;
        let twice = lu.solve(&once).ok_or(Error::Singular("I - R"))?;
        Ok(self.p0.dot(&twice))
    }

    /// Total stationary mass `p0 (I - R)^{-1} 1`; one up to rounding.
    pub fn total_mass(&self) -> Result<f64> {
        let n = self.r.nrows();
        let ones = DVector::from_element(n, 1.0);
        let geometric = (DMatrix::identity(n, n) - &self.r)
            .lu()
            .solve(&ones)
            .ok_or(Error::Singular("I - R"))?;
        Ok(self.p0.dot(&geometric))
    }

    /// Probability that the data queue is empty.
    pub fn level_zero_probability(&self) -> f64 {
        self.p0.sum()
    }

    /// Stationary level vectors `p0 R^i` until the remaining mass falls
    /// below [`TAIL_MASS`].
    pub fn levels(&self) -> Vec<DVector<f64>> {
        let mut out = vec![self.p0.clone()];
        let mut remaining = 1.0 - self.p0.sum();
        let rt = self.r.transpose();
        while remaining > TAIL_MASS && out.len() < MAX_LEVELS {
            let next = &rt * out.last().expect("nonempty");
            remaining -= next.sum();
            out.push(next);
        }
        out
    }
}

/// Largest entry of `pi Q` over the truncated stationary vector, excluding
/// the last level (whose balance involves the truncated tail).
pub fn balance_residual(m: &QbdModel, sol: &QbdSolution) -> f64 {
    let levels = sol.levels();
    let mut worst = 0.0f64;
    let row = |x: &DVector<f64>, a: &DMatrix<f64>| a.transpose() * x;
    if levels.len() > 1 {
        let level0 = row(&levels[0], &m.v_tilde) + row(&levels[1], &m.u);
        worst = worst.max(level0.amax());
    }
    for i in 1..levels.len().saturating_sub(1) {
        let eq = row(&levels[i - 1], &m.w) + row(&levels[i], &m.v) + row(&levels[i + 1], &m.u);
        worst = worst.max(eq.amax());
    }
    worst
}

/// Mean sojourn time by Little's law.
pub fn mean_sojourn(sol: &QbdSolution, p: &SystemParams) -> Result<f64> {
    Ok(sol.mean_queue_length()? / p.lambda)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QbdReport {
    pub avg_peak_aoi: f64,
    pub mean_sojourn: f64,
    pub mean_queue_length: f64,
    pub level_zero_probability: f64,
    pub iterations: usize,
    pub residual: f64,
    pub spectral_radius: f64,
}

pub fn analyze(p: &SystemParams, eps: f64, max_iter: usize) -> Result<QbdReport> {
    let model = build_qbd(p)?;
    let sol = solve(&model, eps, max_iter)?;
    let mean_queue_length = sol.mean_queue_length()?;
    let mean_sojourn = mean_queue_length / p.lambda;
    Ok(QbdReport {
        avg_peak_aoi: 1.0 / p.lambda + mean_sojourn,
        mean_sojourn,
        mean_queue_length,
        level_zero_probability: sol.level_zero_probability(),
        iterations: sol.iterations,
        residual: sol.residual,
        spectral_radius: sol.spectral_radius,
    })
}

/// Average peak AoI; every packet is a valid update since the buffer is
/// unbounded and served in order.
pub fn avg_peak_aoi(p: &SystemParams) -> Result<f64> {
    Ok(analyze(p, DEFAULT_EPS, DEFAULT_MAX_ITER)?.avg_peak_aoi)
}
