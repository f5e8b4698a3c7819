//! Monte Carlo oracles that the closed forms are checked against.
//!
//! Samples are drawn in fixed chunks of [`CHUNK`]; chunk `c` always uses
//! block `c` of the caller's stream and partial statistics are merged in
//! chunk order, so an estimate depends only on `(stream, n)` and never on
//! how many worker threads ran it.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::beta::beta_reg;

use crate::channel::{log_det_identity_plus_gram, sample_channel_matrix, sample_cn, ChannelDims};
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const CHUNK: usize = 4096;
/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.576;
const BOOTSTRAP_RESAMPLES: usize = 200;
const BOOTSTRAP_MIN_N: usize = 100_000;
const BOOTSTRAP_TAG: u64 = 0xB007;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EstimateKind {
    /// Sample mean; the interval is `mean ± 2.576·std_error`.
    Mean,
    /// `-log` of a sample mean. `std_error` is the delta-method error; the
    /// interval is the wider of the delta-method and bootstrap intervals
    /// when `bootstrap` is set.
    NegLogOfMean { bootstrap: bool },
    /// Binomial proportion with an exact interval.
    Proportion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub ci99_low: f64,
    pub ci99_high: f64,
    pub kind: EstimateKind,
}

impl OracleEstimate {
    fn exact(value: f64, n_samples: usize, kind: EstimateKind) -> Self {
        Self { mean: value, std_error: 0.0, n_samples, ci99_low: value, ci99_high: value, kind }
    }

    fn normal(mean: f64, std_error: f64, n_samples: usize) -> Self {
        let h = Z99 * std_error;
        Self { mean, std_error, n_samples, ci99_low: mean - h, ci99_high: mean + h, kind: EstimateKind::Mean }
    }

    /// Largest distance from the mean to either end of the interval.
    pub fn half_width(&self) -> f64 {
        (self.mean - self.ci99_low).max(self.ci99_high - self.mean)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci99_low <= x && x <= self.ci99_high
    }
}

/// Streaming mean and second central moment.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        Welford { n, mean: self.mean + d * w, m2: self.m2 + other.m2 + d * d * self.n as f64 * w }
    }

    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

fn chunk_bounds(n: usize) -> impl IndexedParallelIterator<Item = (u64, usize)> {
    let chunks = n.div_ceil(CHUNK);
    (0..chunks).into_par_iter().map(move |c| (c as u64, CHUNK.min(n - c * CHUNK)))
}

/// Mean of `draw` over `n` samples, chunked as described in the module docs.
fn chunked_mean<F>(n: usize, stream: &RngStream, draw: F) -> Welford
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let parts: Vec<Welford> = chunk_bounds(n)
        .map(|(c, len)| {
            let mut rng = stream.block(c);
            let mut w = Welford::default();
            for _ in 0..len {
                w.push(draw(&mut rng));
            }
            w
        })
        .collect();
    parts.into_iter().fold(Welford::default(), Welford::merge)
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::Usage(format!("at least {min} samples are required, got {n}")));
    }
    Ok(())
}

/// `E_H[log det(I_t + (snr/t) H^† H)]`.
pub fn mc_coherent_mi(dims: &ChannelDims, snr: f64, n: usize, stream: &RngStream) -> Result<OracleEstimate> {
    check_n(n, 1000)?;
    if !(snr >= 0.0 && snr.is_finite()) {
        return Err(Error::domain(format!("snr must be finite and nonnegative, got {snr}")));
    }
    if snr == 0.0 {
        return Ok(OracleEstimate::exact(0.0, n, EstimateKind::Mean));
    }
    let c = snr / dims.t() as f64;
    let w = chunked_mean(n, stream, |rng| log_det_identity_plus_gram(&sample_channel_matrix(dims, rng), c));
    Ok(OracleEstimate::normal(w.mean, w.std_error(), n))
}

/// `E_0(ρ) = -log E_H[det(I_t + snr_b/(t(1+ρ)) H^† H)^{-ρl}]`.
pub fn mc_e0_exact(dims: &ChannelDims, snr_b: f64, rho: f64, n: usize, stream: &RngStream) -> Result<OracleEstimate> {
    Ok(mc_e0_exact_grid(dims, snr_b, &[rho], n, stream)?.remove(0))
}

/// [`mc_e0_exact`] at several `ρ` from one set of channel draws.
///
/// Channel draws are shared across `ρ`, as are the bootstrap resample indices.
pub fn mc_e0_exact_grid(
    dims: &ChannelDims,
    snr_b: f64,
    rhos: &[f64],
    n: usize,
    stream: &RngStream,
) -> Result<Vec<OracleEstimate>> {
    check_n(n, 1000)?;
    if !(snr_b > 0.0 && snr_b.is_finite()) {
        return Err(Error::domain(format!("snr_b must be positive, got {snr_b}")));
    }
    for &rho in rhos {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::domain(format!("rho must lie in [0, 1], got {rho}")));
        }
    }
    let t = dims.t() as f64;
    let l = dims.l() as f64;
    let scales: Vec<f64> = rhos.iter().map(|&rho| snr_b / (t * (1.0 + rho))).collect();
    let width = scales.len();
    let flat = chunked_rows(n, stream, width, |rng, out| {
        let h = sample_channel_matrix(dims, rng);
        for (o, &c) in out.iter_mut().zip(&scales) {
            *o = log_det_identity_plus_gram(&h, c);
        }
    });
    let draws: Vec<Vec<f64>> = (0..width).map(|j| flat.iter().skip(j).step_by(width).copied().collect()).collect();
    let prepared: Vec<Option<ScaledSample>> = rhos
        .iter()
        .zip(&draws)
        .map(|(&rho, log_dets)| (rho > 0.0).then(|| ScaledSample::new(log_dets.iter().map(|d| -rho * l * d))))
        .collect();
    let reps = if n >= BOOTSTRAP_MIN_N {
        Some(bootstrap_neg_log_means(&prepared, n, &stream.fork(BOOTSTRAP_TAG)))
    } else {
        None
    };
    Ok(prepared
        .iter()
        .enumerate()
        .map(|(j, p)| match p {
            None => OracleEstimate::exact(0.0, n, EstimateKind::NegLogOfMean { bootstrap: false }),
            Some(p) => p.estimate(reps.as_ref().map(|r| r[j].as_slice())),
        })
        .collect())
}

/// `n` rows of `width` values each, flattened row-major in deterministic order.
fn chunked_rows<F>(n: usize, stream: &RngStream, width: usize, draw: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let parts: Vec<Vec<f64>> = chunk_bounds(n)
        .map(|(c, len)| {
            let mut rng = stream.block(c);
            let mut rows = vec![0.0; len * width];
            for row in rows.chunks_mut(width.max(1)) {
                draw(&mut rng, row);
            }
            rows
        })
        .collect();
    parts.concat()
}

/// Samples `s_i` stored as `exp(s_i - shift)` with `shift = max s_i`, so
/// `-log(mean(exp(s_i)))` never overflows or underflows to zero.
struct ScaledSample {
    shift: f64,
    scaled: Vec<f64>,
    stats: Welford,
}

impl ScaledSample {
    fn new(logs: impl Iterator<Item = f64>) -> Self {
        let logs: Vec<f64> = logs.collect();
        let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scaled: Vec<f64> = logs.iter().map(|s| (s - shift).exp()).collect();
        let mut stats = Welford::default();
        scaled.iter().for_each(|&x| stats.push(x));
        Self { shift, scaled, stats }
    }

    fn neg_log(&self, mean_scaled: f64) -> f64 {
        -(mean_scaled.ln() + self.shift)
    }

    /// Delta-method interval, widened to cover the bootstrap percentile
    /// interval when replicates are given.
    fn estimate(&self, reps: Option<&[f64]>) -> OracleEstimate {
        let n = self.scaled.len();
        let estimate = self.neg_log(self.stats.mean);
        let se = self.stats.std_error() / self.stats.mean;
        if se == 0.0 {
            return OracleEstimate::exact(estimate, n, EstimateKind::NegLogOfMean { bootstrap: false });
        }
        let mut low = estimate - Z99 * se;
        let mut high = estimate + Z99 * se;
        if let Some(reps) = reps {
            let mut sorted = reps.to_vec();
            sorted.sort_by(f64::total_cmp);
            let m = sorted.len() as f64;
            let lo_idx = (m * 0.005).floor() as usize;
            let hi_idx = ((m * 0.995).ceil() as usize).min(sorted.len() - 1);
            low = low.min(sorted[lo_idx]);
            high = high.max(sorted[hi_idx]);
        }
        OracleEstimate {
            mean: estimate,
            std_error: se,
            n_samples: n,
            ci99_low: low,
            ci99_high: high,
            kind: EstimateKind::NegLogOfMean { bootstrap: reps.is_some() },
        }
    }
}

/// Bootstrap replicates of `-log(mean)` for every sample set, drawing one set
/// of resample indices per replicate and reusing it across the sets.
fn bootstrap_neg_log_means(sets: &[Option<ScaledSample>], n: usize, boot: &RngStream) -> Vec<Vec<f64>> {
    let per_rep: Vec<Vec<f64>> = (0..BOOTSTRAP_RESAMPLES)
        .into_par_iter()
        .map(|b| {
            let mut rng = boot.block(b as u64);
            let mut sums = vec![0.0; sets.len()];
            for _ in 0..n {
                let i = rng.random_range(0..n);
                for (sum, set) in sums.iter_mut().zip(sets) {
                    if let Some(set) = set {
                        *sum += set.scaled[i];
                    }
                }
            }
            sums.iter()
                .zip(sets)
                .map(|(sum, set)| set.as_ref().map_or(0.0, |s| s.neg_log(sum / n as f64)))
                .collect()
        })
        .collect();
    (0..sets.len()).map(|j| per_rep.iter().map(|rep| rep[j]).collect()).collect()
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// On-off mutual information `E[log p(y|x)/p(y)]` with `r` receive antennas,
/// stratified by the input branch: half of the samples are drawn with the
/// input off and half with it on, then weighted by `1 - ω` and `ω`.
pub fn mc_onoff_mi(r: usize, snr: f64, a: f64, n: usize, stream: &RngStream) -> Result<OracleEstimate> {
    check_n(n, 10_000)?;
    if r == 0 {
        return Err(Error::dimension("receive antenna count must be at least 1"));
    }
    if snr == 0.0 {
        return Ok(OracleEstimate::exact(0.0, n, EstimateKind::Mean));
    }
    let omega = snr / a;
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::domain(format!("on-probability snr/A must lie in (0, 1), got {omega}")));
    }
    let rf = r as f64;
    let ln_pi = std::f64::consts::PI.ln();
    let scale = 1.0 + a;
    let (ln_off, ln_on) = ((-omega).ln_1p(), omega.ln());
    let amplitude = a.sqrt();
    let sample = move |rng: &mut ChaCha8Rng, on: bool| {
        let x = if on { amplitude } else { 0.0 };
        let mut norm = 0.0;
        for _ in 0..r {
            let y = sample_cn(rng) * x + sample_cn(rng);
            norm += y.norm_sqr();
        }
        let lp_off = -rf * ln_pi - norm;
        let lp_on = -rf * ln_pi - rf * scale.ln() - norm / scale;
        let lp_y = log_sum_exp(ln_off + lp_off, ln_on + lp_on);
        (if on { lp_on } else { lp_off }) - lp_y
    };
    let n_off = n / 2;
    let n_on = n - n_off;
    let off = chunked_mean(n_off, &stream.fork(0), |rng| sample(rng, false));
    let on = chunked_mean(n_on, &stream.fork(1), |rng| sample(rng, true));
    let mean = (1.0 - omega) * off.mean + omega * on.mean;
    let se = ((1.0 - omega).powi(2) * off.std_error().powi(2) + omega.powi(2) * on.std_error().powi(2)).sqrt();
    Ok(OracleEstimate::normal(mean, se, n))
}

/// Fraction of `n` draws of `Σ_{i≤k} |CN(0,1)|²` below `x`, with an exact
/// (Clopper–Pearson) binomial interval, which keeps its coverage when the
/// expected count is near zero.
pub fn empirical_tail_cdf(k: usize, x: f64, n: usize, stream: &RngStream) -> Result<OracleEstimate> {
    if k == 0 {
        return Err(Error::domain("degrees of freedom must be at least 1"));
    }
    check_n(n, 1)?;
    let w = chunked_mean(n, stream, |rng| {
        let s: f64 = (0..k).map(|_| sample_cn(rng).norm_sqr()).sum();
        if s < x {
            1.0
        } else {
            0.0
        }
    });
    let hits = (w.mean * n as f64).round() as u64;
    let p = hits as f64 / n as f64;
    let (low, high) = clopper_pearson(hits, n as u64, 0.01);
    Ok(OracleEstimate {
        mean: p,
        std_error: (p * (1.0 - p) / n as f64).sqrt(),
        n_samples: n,
        ci99_low: low.min(p),
        ci99_high: high.max(p),
        kind: EstimateKind::Proportion,
    })
}

/// Two-sided `1 - level` exact interval for `hits` successes in `n` trials,
/// from the beta representation of binomial tails.
fn clopper_pearson(hits: u64, n: u64, level: f64) -> (f64, f64) {
    let tail = level / 2.0;
    let (k, nf) = (hits as f64, n as f64);
    // P(X >= k | p) = I_p(k, n-k+1) and P(X <= k | p) = 1 - I_p(k+1, n-k).
    let low = if hits == 0 { 0.0 } else { bisect_increasing(|p| beta_reg(k, nf - k + 1.0, p), tail) };
    let high = if hits == n { 1.0 } else { bisect_increasing(|p| beta_reg(k + 1.0, nf - k, p), 1.0 - tail) };
    (low, high)
}

/// Solves `f(p) = target` on `[0, 1]` for increasing `f`.
fn bisect_increasing(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Ordinary least squares line through `(x, y)` points.
pub fn slope_fit(points: &[(f64, f64)]) -> Result<SlopeFit> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if points.len() < 2 || !(sxx > 0.0) {
        return Err(Error::domain("slope fit needs at least two distinct abscissae"));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(SlopeFit { slope, intercept, residual: (ss / n).sqrt() })
}
