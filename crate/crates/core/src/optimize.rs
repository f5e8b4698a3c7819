//! Golden-section search for unimodal functions of one variable.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Minimizes `f` over `[lo, hi]` until the bracket is narrower than `tol`.
///
/// The returned point is the best of the final bracket's interior probes
/// and its two end points, so a monotone `f` converges onto the boundary.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Extremum> {
    if !(lo <= hi) {
        return Err(Error::domain(format!("search interval is inverted: [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("search tolerance must be positive"));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
        if iterations > 10_000 {
            break;
        }
    }
    let candidates = [(a, f(a)), (c, fc), (d, fd), (b, f(b))];
    let (x, value) = candidates
        .into_iter()
        .filter(|(_, v)| !v.is_nan())
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .ok_or_else(|| Error::domain("objective is NaN throughout the search interval"))?;
    Ok(Extremum { x, value, iterations })
}

/// Maximizes `f` over `[lo, hi]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Extremum> {
    let m = golden_section_min(|x| -f(x), lo, hi, tol)?;
    Ok(Extremum { value: -m.value, ..m })
}
