//! Small numeric helpers shared by the closed forms and the penalty engine.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// `ln(n!)` by direct summation; exact enough for the `n <= ~10^4` used here.
pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Poisson probability `x^n / n! * e^{-x}`, evaluated in log space.
pub fn poisson_pmf(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (n as f64 * x.ln() - x - ln_factorial(n)).exp()
}

/// `e^{-shift} * sum_{i=0}^{n} x^i / i!`.
///
/// Terms follow the recurrence `term_i = term_{i-1} * x / i`, carried in log
/// space so neither the factorials nor `e^{-shift}` over/underflow on their
/// own.
pub fn exp_poisson_sum(shift: f64, x: f64, n: u32) -> f64 {
    if x == 0.0 {
        return (-shift).exp();
    }
    let lx = x.ln();
    let mut log_term = -shift;
    let mut sum = log_term.exp();
    for i in 1..=n {
        log_term += lx - (i as f64).ln();
        sum += log_term.exp();
    }
    sum
}

/// `P{Poisson(x) <= n}`.
pub fn poisson_cdf(n: u32, x: f64) -> f64 {
    exp_poisson_sum(x, x, n).min(1.0)
}

/// `sum_{j=0}^{n-1} x^j`, accurate for `x` near 1.
pub fn geometric_sum(x: f64, n: u32) -> f64 {
    if (x - 1.0).abs() < 1e-3 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += term;
            term *= x;
        }
        sum
    } else {
        (1.0 - x.powi(n as i32)) / (1.0 - x)
    }
}

// 15-point Gauss-Kronrod nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the 7-point rule (odd Kronrod nodes 1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Outcome of [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub est_error: f64,
    pub evaluations: usize,
    /// Whether the tolerance was met before the evaluation budget ran out.
    pub converged: bool,
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until
/// `error <= max(abs_tol, rel_tol * |value|)` or `max_evals` is exhausted.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_evals: usize,
) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            est_error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let (value, error) = gk15(&f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    loop {
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Quadrature {
                value: total,
                est_error: total_err,
                evaluations,
                converged: true,
            };
        }
        if evaluations + 30 > max_evals {
            break;
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Segment cannot be split further in floating point.
            heap.push(worst);
            break;
        }
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        evaluations += 30;
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Segment { a: mid, b: worst.b, value: rv, error: re });
        if heap.len() % 64 == 0 {
            // Re-sum to stop drift from the running updates.
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    total = heap.iter().map(|s| s.value).sum();
    total_err = heap.iter().map(|s| s.error).sum();
    Quadrature {
        value: total,
        est_error: total_err,
        evaluations,
        converged: total_err <= abs_tol.max(rel_tol * total.abs()),
    }
}
