//! Block-fading channel model `Y = HX + W`.
//!
//! Within one coherence block of `l` symbols the `r x t` matrix `H` stays
//! fixed; its entries are i.i.d. `CN(0, 1)`. Only the small dense complex
//! operations the formulas need live here: multiply, conjugate transpose,
//! trace, and `log det(I + c H^† H)` for a handful of antennas.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// Antenna counts and coherence length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ChannelDims {
    t: usize,
    r: usize,
    l: usize,
}

impl ChannelDims {
    pub fn new(t: usize, r: usize, l: usize) -> Result<Self> {
        if t == 0 || r == 0 || l == 0 {
            return Err(Error::dimension(format!(
                "antenna counts and coherence length must be positive (t={t}, r={r}, l={l})"
            )));
        }
        Ok(Self { t, r, l })
    }

    /// Transmit antennas.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Receive antennas.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Coherence length in symbols.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Product `r * t`, the number of channel coefficients.
    pub fn rt(&self) -> usize {
        self.r * self.t
    }

    /// Training uses the first `t` symbols of a block, so it needs `l > t`.
    pub fn require_training(&self) -> Result<()> {
        if self.l <= self.t {
            return Err(Error::TrainingInfeasible { t: self.t, l: self.l as f64 });
        }
        Ok(())
    }
}

/// Dense row-major complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::dimension(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// `trace(A A^†)`, the squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `A^† A`.
    pub fn gram(&self) -> ComplexMatrix {
        let n = self.cols;
        let mut g = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.rows {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                g.data[i * n + j] = acc;
                g.data[j * n + i] = acc.conj();
            }
        }
        g
    }
}

/// Draws one `CN(0, 1)` sample.
pub fn sample_cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Draws an `r x t` channel matrix with i.i.d. `CN(0, 1)` entries.
pub fn sample_channel_matrix<R: Rng + ?Sized>(dims: &ChannelDims, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(dims.r, dims.t, |_, _| sample_cn(rng))
}

/// `r x l` white noise block with i.i.d. `CN(0, 1)` entries.
pub fn sample_noise<R: Rng + ?Sized>(dims: &ChannelDims, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(dims.r, dims.l, |_, _| sample_cn(rng))
}

/// One `t x l` block of Peaky Gaussian signaling: with probability `delta`
/// the block carries i.i.d. `CN(0, snr_b / t)` symbols, otherwise it is
/// silent. The average power per symbol is `delta * snr_b`.
pub fn sample_peaky_gaussian<R: Rng + ?Sized>(
    dims: &ChannelDims,
    delta: f64,
    snr_b: f64,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(format!("duty fraction must lie in (0, 1], got {delta}")));
    }
    if !(snr_b >= 0.0) {
        return Err(Error::domain(format!("in-block SNR must be nonnegative, got {snr_b}")));
    }
    let on = rng.random::<f64>() < delta;
    if !on {
        return Ok(ComplexMatrix::zeros(dims.t, dims.l));
    }
    let scale = (snr_b / dims.t as f64).sqrt();
    Ok(ComplexMatrix::from_fn(dims.t, dims.l, |_, _| sample_cn(rng) * scale))
}

/// `Y = H X + W`; pass `None` for a noiseless block.
pub fn apply_block_channel(
    h: &ComplexMatrix,
    x: &ComplexMatrix,
    noise: Option<&ComplexMatrix>,
) -> Result<ComplexMatrix> {
    let hx = h.matmul(x)?;
    match noise {
        Some(w) => hx.add(w),
        None => Ok(hx),
    }
}

/// Empirical per-symbol power `(1 / (l N)) sum_n trace(X_n X_n^†)` of a
/// codebook ensemble.
pub fn average_power_check(ensemble: &[ComplexMatrix], l: usize) -> Result<f64> {
    let first = ensemble
        .first()
        .ok_or_else(|| Error::domain("average power of an empty ensemble is undefined"))?;
    if l == 0 || first.cols != l {
        return Err(Error::dimension(format!(
            "codewords must have l = {l} columns, got {}",
            first.cols
        )));
    }
    let mut total = 0.0;
    for x in ensemble {
        if x.rows != first.rows || x.cols != first.cols {
            return Err(Error::dimension("codewords in an ensemble must share dimensions"));
        }
        total += x.frobenius_sq();
    }
    Ok(total / (l as f64 * ensemble.len() as f64))
}

/// `log det(I_t + c H^† H)` for `c >= 0`, via a Cholesky factorization of the
/// Hermitian positive definite `t x t` matrix.
pub fn log_det_identity_plus_gram(h: &ComplexMatrix, c: f64) -> f64 {
    let n = h.cols;
    let g = h.gram();
    // Work on the lower triangle of I + cG in place.
    let mut a: Vec<Complex64> = g.data.iter().map(|z| z * c).collect();
    for i in 0..n {
        a[i * n + i] += 1.0;
    }
    let mut log_det = 0.0;
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= a[j * n + k].norm_sqr();
        }
        let djj = d.sqrt();
        log_det += 2.0 * djj.ln();
        a[j * n + j] = Complex64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k].conj();
            }
            a[i * n + j] = s / djj;
        }
    }
    log_det
}
