//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae (nonnegative half) and weights, Gauss weights for the
// embedded 7-point rule at the odd Kronrod nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 0.0, rel: 1e-10, max_intervals: 2000 }
    }
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

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
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
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]` with global adaptive bisection.
///
/// Terminates when the summed error estimate drops below
/// `max(tol.abs, tol.rel * |value|)`. If `tol.max_intervals` is exhausted
/// first, returns [`Error::Quadrature`] carrying the achieved estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integration limits must be finite"));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, error_estimate: 0.0, intervals: 0 });
    }
    let first = gk15(&f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    loop {
        if !value.is_finite() {
            return Err(Error::Quadrature { estimate: value, error_estimate: f64::INFINITY });
        }
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(Quadrature { value, error_estimate: error, intervals: heap.len() });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature { estimate: value, error_estimate: error });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature { estimate: value, error_estimate: error });
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum periodically to stop drift from the running updates.
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// Integrates over consecutive pieces `[p0, p1], [p1, p2], ...`, each to the
/// same tolerance, and sums the results.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], tol: Tolerance) -> Result<Quadrature> {
    let mut total = Quadrature { value: 0.0, error_estimate: 0.0, intervals: 0 };
    for w in breakpoints.windows(2) {
        let piece = integrate(&f, w[0], w[1], tol)?;
        total.value += piece.value;
        total.error_estimate += piece.error_estimate;
        total.intervals += piece.intervals;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(|x| 3.0 * x * x - x + 2.0, -1.0, 2.0, Tolerance::default()).unwrap();
        assert!((q.value - (8.0 + 1.0 - 1.5 + 6.0)).abs() < 1e-13);
    }

    #[test]
    fn exponential_and_log() {
        // ∫_0^60 e^{-x} log(1 + x) dx ≈ e E1(1), tail beyond 60 is < e^{-60} * 5
        let q = integrate(|x: f64| (-x).exp() * x.ln_1p(), 0.0, 60.0, Tolerance { rel: 1e-13, ..Default::default() }).unwrap();
        assert!((q.value - 0.596_347_362_323_194_1).abs() < 1e-12);
    }

    #[test]
    fn sharp_peak() {
        let eps: f64 = 1e-4;
        let q = integrate(|x: f64| eps / (x * x + eps * eps), -1.0, 1.0, Tolerance { rel: 1e-12, ..Default::default() }).unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((q.value - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let err = integrate(|x: f64| x.sin() * 1e3 * (1e3 * x).cos(), 0.0, 100.0, Tolerance { rel: 1e-15, abs: 0.0, max_intervals: 4 }).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn pieces_sum() {
        let q = integrate_pieces(|x: f64| x.exp(), &[0.0, 0.5, 1.0, 3.0], Tolerance::default()).unwrap();
        assert!((q.value - (3.0f64.exp() - 1.0)).abs() < 1e-9);
    }
}
