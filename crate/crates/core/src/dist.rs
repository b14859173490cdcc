//! Exponential-polynomial survivor functions.
//!
//! Every peak-AoI and sojourn-time distribution of the negligible-service
//! regime has a survivor function that is a finite mix of Erlang-like
//! tails plus an optional atom at zero. [`ExpPolyDist`] stores that form
//! exactly so that moments and penalty integrals can be taken term by term.

use serde::{Deserialize, Serialize};

use crate::numeric::poisson_pmf;
use crate::{Error, Result};

/// One term `weight * (rate t)^power / power! * e^{-rate t}` of a survivor
/// function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpPolyTerm {
    pub weight: f64,
    pub power: u32,
    pub rate: f64,
}

impl ExpPolyTerm {
    pub fn new(weight: f64, power: u32, rate: f64) -> Self {
        ExpPolyTerm { weight, power, rate }
    }

    /// The same term written as `coef * t^power / power! * e^{-rate t}`.
    pub fn coefficient(&self) -> f64 {
        self.weight * self.rate.powi(self.power as i32)
    }

    fn eval(&self, t: f64) -> f64 {
        self.weight * poisson_pmf(self.power, self.rate * t)
    }
}

/// Distribution of a nonnegative random variable `V` with
/// `P{V = 0} = atom_at_zero` and `P{V > t} = sum_j term_j(t)` for `t > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpPolyDist {
    pub atom_at_zero: f64,
    pub terms: Vec<ExpPolyTerm>,
}

impl ExpPolyDist {
    pub fn new(atom_at_zero: f64, terms: Vec<ExpPolyTerm>) -> Self {
        ExpPolyDist { atom_at_zero, terms }
    }

    /// Exponential distribution with the given rate.
    pub fn exponential(rate: f64) -> Self {
        ExpPolyDist::new(0.0, vec![ExpPolyTerm::new(1.0, 0, rate)])
    }

    /// Erlang distribution with `shape` phases of the given rate.
    pub fn erlang(shape: u32, rate: f64) -> Self {
        assert!(shape >= 1, "Erlang shape must be >= 1");
        let terms = (0..shape).map(|n| ExpPolyTerm::new(1.0, n, rate)).collect();
        ExpPolyDist::new(0.0, terms)
    }

    /// `P{V > t}`. For `t <= 0` this is `1 - atom_at_zero`.
    pub fn survivor(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0 - self.atom_at_zero;
        }
        self.terms.iter().map(|term| term.eval(t)).sum()
    }

    /// `P{V <= t}`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        1.0 - self.survivor(t)
    }

    /// Sum of term weights, i.e. `S(0+)`.
    pub fn survivor_at_zero_plus(&self) -> f64 {
        self.terms.iter().filter(|t| t.power == 0).map(|t| t.weight).sum()
    }

    pub fn min_rate(&self) -> f64 {
        self.terms.iter().map(|t| t.rate).fold(f64::INFINITY, f64::min)
    }

    /// `E[V^m] = m int_0^inf t^{m-1} S(t) dt`, integrated term by term.
    pub fn moment(&self, m: u32) -> Result<f64> {
        if m == 0 {
            return Ok(1.0);
        }
        let mut total = 0.0;
        for term in &self.terms {
            // int t^{m-1} (a t)^n / n! e^{-a t} dt = (n+1)...(n+m-1) / a^m
            let rising: f64 = (1..m).map(|k| (term.power + k) as f64).product();
            total += term.weight * rising / term.rate.powi(m as i32);
        }
        let value = m as f64 * total;
        if value < -1e-9 {
            return Err(Error::NonIntegrable { order: m, value });
        }
        Ok(value.max(0.0))
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1)
    }

    /// Checks the survivor-function invariants numerically.
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::DegenerateArgument(msg));
        if !(0.0..=1.0).contains(&self.atom_at_zero) {
            return bad(format!("atom at zero {} outside [0, 1]", self.atom_at_zero));
        }
        if self.terms.iter().any(|t| !(t.rate > 0.0 && t.rate.is_finite())) {
            return bad("every term rate must be positive".into());
        }
        let s0 = self.survivor_at_zero_plus();
        if (s0 - (1.0 - self.atom_at_zero)).abs() > 1e-12 {
            return bad(format!(
                "S(0+) = {s0} but 1 - atom = {}",
                1.0 - self.atom_at_zero
            ));
        }
        if self.terms.is_empty() {
            return Ok(());
        }
        let rate_min = self.min_rate();
        let (lo, hi) = ((1e-6 / rate_min).ln(), (50.0 / rate_min).ln());
        let points = 240;
        let mut prev = 1.0 - self.atom_at_zero;
        for i in 0..points {
            let t = (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp();
            let s = self.survivor(t);
            if !(-1e-12..=1.0 + 1e-12).contains(&s) || s > prev + 1e-12 {
                return bad(format!("survivor not monotone in [0, 1] at t = {t}: {s}"));
            }
            prev = s;
        }
        Ok(())
    }
}

/// Peak-AoI and sojourn-time distributions together with the valid-update
/// rate; everything the average-penalty integral needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateProcessStats {
    /// Rate of valid updates (packets that reset the AoI).
    pub valid_rate: f64,
    /// Distribution of the peak AoI.
    pub peak: ExpPolyDist,
    /// Distribution of the sojourn time of valid updates.
    pub sojourn: ExpPolyDist,
}

/// `E[V^m]` for `V ~ d`.
pub fn expoly_moment(d: &ExpPolyDist, m: u32) -> Result<f64> {
    d.moment(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn exponential_moments() {
        let a = 0.7;
        let d = ExpPolyDist::exponential(a);
        assert_relative_eq!(d.moment(1).unwrap(), 1.0 / a, max_relative = 1e-15);
        assert_relative_eq!(d.moment(2).unwrap(), 2.0 / (a * a), max_relative = 1e-15);
        assert_relative_eq!(d.moment(3).unwrap(), 6.0 / (a * a * a), max_relative = 1e-15);
        d.check().unwrap();
    }

    #[test]
    fn erlang_moments() {
        let d = ExpPolyDist::erlang(3, 2.0);
        assert_relative_eq!(d.mean().unwrap(), 1.5, max_relative = 1e-15);
        // Var = k / a^2, so E[V^2] = k/a^2 + (k/a)^2.
        assert_relative_eq!(d.moment(2).unwrap(), 0.75 + 2.25, max_relative = 1e-15);
        d.check().unwrap();
    }

    #[test]
    fn coefficient_convention() {
        let t = ExpPolyTerm::new(0.25, 3, 2.0);
        assert_eq!(t.coefficient(), 2.0);
        let x = 0.9f64;
        let via_coef = t.coefficient() * x.powi(3) / 6.0 * (-2.0 * x).exp();
        assert_relative_eq!(t.eval(x), via_coef, max_relative = 1e-14);
    }

    #[test]
    fn atom_is_respected() {
        let d = ExpPolyDist::new(0.25, vec![ExpPolyTerm::new(0.75, 0, 1.0)]);
        d.check().unwrap();
        assert_eq!(d.survivor(0.0), 0.75);
        assert_eq!(d.cdf(0.0), 0.25);
        assert_relative_eq!(d.mean().unwrap(), 0.75, max_relative = 1e-15);
    }

    #[test]
    fn malformed_distributions_are_caught() {
        let negative = ExpPolyDist::new(0.0, vec![ExpPolyTerm::new(-1.0, 0, 1.0)]);
        assert!(matches!(negative.moment(1), Err(Error::NonIntegrable { .. })));
        assert!(negative.check().is_err());
        let wrong_mass = ExpPolyDist::new(0.1, vec![ExpPolyTerm::new(1.0, 0, 1.0)]);
        assert!(wrong_mass.check().is_err());
    }

    proptest! {
        // Moments are linear in the mixture weights.
        #[test]
        fn moment_is_linear_in_mixtures(
            w in 0.0f64..1.0, k1 in 1u32..6, k2 in 1u32..6,
            a1 in 0.1f64..5.0, a2 in 0.1f64..5.0, m in 1u32..4
        ) {
            let e1 = ExpPolyDist::erlang(k1, a1);
            let e2 = ExpPolyDist::erlang(k2, a2);
            let mut terms: Vec<_> = e1.terms.iter().map(|t| ExpPolyTerm { weight: w * t.weight, ..*t }).collect();
            terms.extend(e2.terms.iter().map(|t| ExpPolyTerm { weight: (1.0 - w) * t.weight, ..*t }));
            let mix = ExpPolyDist::new(0.0, terms);
            prop_assert!(mix.check().is_ok());
            let expect = w * e1.moment(m).unwrap() + (1.0 - w) * e2.moment(m).unwrap();
            let got = mix.moment(m).unwrap();
            prop_assert!((got - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }
    }
}
