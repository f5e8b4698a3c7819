//! Reliability in the wideband regime: the Gallager bound on `E_0`, MMSE
//! training, the piecewise random-coding exponent, the block error bound,
//! outage and low-SNR diversity.
//!
//! Rates are in nats per block used for transmission. Everything here is an
//! asymptotic statement with its `o(1)` terms dropped; outputs name what was
//! dropped in a `dropped` field instead of pretending to be exact.
//!
//! Exponent quantities depend on `(t, r, snr, ν)` only, so [`ExponentModel`]
//! works from a [`RegimeParams`] and accepts real-valued coherence lengths.
//! The `dims`-based functions derive `ν` from an integer `l`.

use std::fmt;

use serde::Serialize;

use crate::capacity::{regime_from_coherence, RegimeParams};
use crate::channel::ChannelDims;
use crate::error::{Error, Result};
use crate::optimize::golden_section_max;
use crate::oracle::{slope_fit, SlopeFit};
use crate::special::gamma_lower_regularized;

const DROPPED_EXPONENT: &str = "o(1) terms of the piecewise exponent";
const DROPPED_TRAINING: &str = "o(1) terms of the training lower bound";

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::domain(format!("rho must lie in [0, 1], got {rho}")));
    }
    Ok(())
}

fn check_rate(rate: f64) -> Result<()> {
    if !(rate >= 0.0) {
        return Err(Error::domain(format!("rate must be nonnegative, got {rate}")));
    }
    Ok(())
}

/// Upper bound `E_0(ρ) ≤ rt·log(1 + ρ·l·snr_b/(t(1+ρ)))` from Jensen's
/// inequality applied to the Gallager function.
pub fn e0_upper(dims: &ChannelDims, snr_b: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(snr_b > 0.0) {
        return Err(Error::domain(format!("snr_b must be positive, got {snr_b}")));
    }
    let (t, l) = (dims.t() as f64, dims.l() as f64);
    Ok(dims.rt() as f64 * (rho * l * snr_b / (t * (1.0 + rho))).ln_1p())
}

/// A training split: fraction `gamma` of the block energy goes to the
/// `t`-symbol pilot, the rest to the `l - t` data symbols.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainingDesign {
    pub gamma: f64,
    pub e_total: f64,
    pub e_training: f64,
    /// Effective post-training SNR of the data symbols.
    pub f_value: f64,
}

/// `f(γ)` for a real coherence length; callers validate `l > t`.
fn effective_snr(gamma: f64, t: f64, l: f64, snr_b: f64) -> f64 {
    let e = l * snr_b;
    let pilot = gamma * e / (t + gamma * e);
    let data = (1.0 - gamma) * e / (l - t);
    pilot * data / (t * (1.0 - gamma) * e / ((l - t) * (t + gamma * e)) + 1.0)
}

fn check_training(t: f64, l: f64) -> Result<()> {
    if !(l > t) {
        return Err(Error::TrainingInfeasible { t: t as usize, l });
    }
    Ok(())
}

/// Effective SNR after MMSE estimation from a scaled-identity pilot.
pub fn training_f(gamma: f64, dims: &ChannelDims, snr_b: f64) -> Result<TrainingDesign> {
    let (t, l) = (dims.t() as f64, dims.l() as f64);
    check_training(t, l)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(format!("training fraction must lie in (0, 1), got {gamma}")));
    }
    if !(snr_b > 0.0) {
        return Err(Error::domain(format!("snr_b must be positive, got {snr_b}")));
    }
    let e_total = l * snr_b;
    Ok(TrainingDesign { gamma, e_total, e_training: gamma * e_total, f_value: effective_snr(gamma, t, l, snr_b) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainingOptimum {
    pub f_star: f64,
    pub gamma_star: f64,
    /// `snr_b - 2·sqrt(t·snr_b/l)`, the leading terms of the asymptotic lower
    /// bound on `f*`, remainder dropped. May be negative for short blocks.
    pub f_lb_asymptotic: f64,
}

/// `f* = max_γ f(γ)` by golden-section search, for a real coherence length.
pub fn training_f_star_real(t: usize, l: f64, snr_b: f64) -> Result<TrainingOptimum> {
    let tf = t as f64;
    check_training(tf, l)?;
    if !(snr_b > 0.0) {
        return Err(Error::domain(format!("snr_b must be positive, got {snr_b}")));
    }
    let edge = 1e-12;
    let best = golden_section_max(|g| effective_snr(g, tf, l, snr_b), edge, 1.0 - edge, 1e-10)?;
    Ok(TrainingOptimum {
        f_star: best.value,
        gamma_star: best.x,
        f_lb_asymptotic: snr_b - 2.0 * (tf * snr_b / l).sqrt(),
    })
}

pub fn training_f_star(dims: &ChannelDims, snr_b: f64) -> Result<TrainingOptimum> {
    training_f_star_real(dims.t(), dims.l() as f64, snr_b)
}

/// Interior optimum `γ = (sqrt(1+q) - 1)/q`, `q = l·snr_b/(t(1+snr_b))`, of
/// the simplified objective `γ(1-γ)/(1+γq)`. A cross-check for `f*`, not a
/// replacement: `f` at this point is at most `f*`.
pub fn training_gamma_surrogate(dims: &ChannelDims, snr_b: f64) -> f64 {
    let q = dims.l() as f64 * snr_b / (dims.t() as f64 * (1.0 + snr_b));
    ((1.0 + q).sqrt() - 1.0) / q
}

/// Gallager value achieved with training, `rt·log(1 + ρ(l-t)·f*/(t(1+ρ)))`.
///
/// The bound assumes the estimation noise distribution is the worst case for
/// the exponent, which is conjectured rather than proven.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainingE0 {
    pub value: f64,
    pub conjectured_tight: bool,
    pub dropped: &'static str,
}

pub fn training_e0_lower(dims: &ChannelDims, snr_b: f64, rho: f64) -> Result<TrainingE0> {
    check_rho(rho)?;
    let opt = training_f_star(dims, snr_b)?;
    let (t, l) = (dims.t() as f64, dims.l() as f64);
    let value = dims.rt() as f64 * (rho * (l - t) * opt.f_star / (t * (1.0 + rho))).ln_1p();
    Ok(TrainingE0 { value, conjectured_tight: true, dropped: DROPPED_TRAINING })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    A,
    B,
    C,
    Beyond,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::A => "A",
            Region::B => "B",
            Region::C => "C (o(1) only)",
            Region::Beyond => "beyond",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateLandmarks {
    pub r_critical: f64,
    pub r_cutoff: f64,
    pub c_block: f64,
    pub c_block_training_lb: f64,
    /// The training lower bound on capacity per block is not above the
    /// critical rate yet, so region B is empty at this SNR.
    pub asymptotics_not_binding: bool,
    pub dropped: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentPoint {
    pub rate: f64,
    pub value: f64,
    pub region: Region,
    /// Gallager parameter attaining the value (0 in regions C and beyond).
    pub rho: f64,
    pub asymptotics_not_binding: bool,
    pub dropped: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentCurve {
    pub landmarks: RateLandmarks,
    pub samples: Vec<ExponentPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockErrorBound {
    pub bound: f64,
    /// Fraction of blocks carrying transmission.
    pub delta: f64,
    pub exponent: ExponentPoint,
    /// False when `E_r < log δ`, where the bound exceeds one and is vacuous.
    pub in_unit_interval: bool,
}

/// The piecewise random-coding exponent for fixed `(t, r)` and regime.
///
/// Write `K = t·snr^{-(2ν - min{1,ν})}/(t+r)²` for the per-block coherent SNR
/// scale, so the Gallager bound is `g(ρ) = rt·log(1 + ρK/(1+ρ)) - ρR`.
/// [`ExponentModel::rho_star`] maximizes `g` exactly; region A is where the
/// maximizer sits at `ρ = 1`, which starts at `R₁ = rt·K/(2(K+2))`. The
/// reported critical rate `rt/2` is the `K → ∞` limit of `R₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentModel {
    pub t: usize,
    pub r: usize,
    pub regime: RegimeParams,
}

impl ExponentModel {
    pub fn new(t: usize, r: usize, regime: RegimeParams) -> Result<Self> {
        if t == 0 || r == 0 {
            return Err(Error::dimension("antenna counts must be at least 1"));
        }
        Ok(Self { t, r, regime })
    }

    pub fn from_dims(dims: &ChannelDims, snr: f64) -> Result<Self> {
        Self::new(dims.t(), dims.r(), regime_from_coherence(dims, snr)?)
    }

    pub fn from_nu(t: usize, r: usize, snr: f64, nu: f64) -> Result<Self> {
        Self::new(t, r, RegimeParams::from_nu(snr, nu)?)
    }

    fn rt(&self) -> f64 {
        (self.r * self.t) as f64
    }

    /// Real-valued coherence length of the regime.
    pub fn coherence_length(&self) -> f64 {
        self.regime.coherence_length(self.t, self.r)
    }

    pub fn snr_scale(&self) -> f64 {
        let (t, r) = (self.t as f64, self.r as f64);
        t * self.regime.snr.powf(-self.regime.block_exponent()) / ((t + r) * (t + r))
    }

    /// `q = (t+r)²·snr^{2ν - min{1,ν}}/t`, the reciprocal of the SNR scale.
    pub fn q(&self) -> f64 {
        1.0 / self.snr_scale()
    }

    pub fn gallager_bound(&self, rho: f64, rate: f64) -> f64 {
        let k = self.snr_scale();
        self.rt() * (rho * k / (1.0 + rho)).ln_1p() - rho * rate
    }

    /// Exact maximizer of the Gallager bound over `ρ ∈ [0, 1]`: the positive
    /// root of `(1+q)ρ² + (1+2q)ρ + q - rt/R = 0`, clipped. `rate = 0`
    /// returns 1.
    pub fn rho_star(&self, rate: f64) -> Result<f64> {
        check_rate(rate)?;
        if rate == 0.0 {
            return Ok(1.0);
        }
        let q = self.q();
        let c = q - self.rt() / rate;
        if c >= 0.0 {
            return Ok(0.0);
        }
        let (a, b) = (1.0 + q, 1.0 + 2.0 * q);
        // Stable form of (-b + sqrt(b² - 4ac)) / 2a for c < 0.
        let root = -2.0 * c / (b + (b * b - 4.0 * a * c).sqrt());
        Ok(root.clamp(0.0, 1.0))
    }

    /// The large-`K` closed form `½[sqrt(1 + 4(rt/R - q)) - 1]`, clipped into
    /// `[0, 1]`. It drops `O(q)` terms of the exact root.
    pub fn rho_star_closed_form(&self, rate: f64) -> Result<f64> {
        check_rate(rate)?;
        if rate == 0.0 {
            return Ok(1.0);
        }
        let disc = self.rt() / rate - self.q();
        if disc < 0.0 {
            return Ok(0.0);
        }
        Ok((0.5 * ((1.0 + 4.0 * disc).sqrt() - 1.0)).clamp(0.0, 1.0))
    }

    /// Rate at which the exact maximizer leaves `ρ = 1`.
    pub fn region_switch_rate(&self) -> f64 {
        let k = self.snr_scale();
        self.rt() * k / (2.0 * (k + 2.0))
    }

    pub fn landmarks(&self) -> RateLandmarks {
        let (t, r) = (self.t as f64, self.r as f64);
        let snr = self.regime.snr;
        let alpha = self.regime.alpha_eff;
        let nu = self.regime.nu;
        let l = self.coherence_length();
        let linear = r * snr.powf(alpha);
        let quadratic = r * (r + t) / (2.0 * t) * snr.powf(2.0 * alpha);
        let estimation = 2.0 * r * (r + t) / t.sqrt() * snr.powf(nu + alpha / 2.0);
        let c_block = l * (linear - quadratic);
        let c_block_training_lb = l * (linear - estimation - quadratic);
        RateLandmarks {
            r_critical: self.rt() / 2.0,
            r_cutoff: self.region_a_value(0.0),
            c_block,
            c_block_training_lb,
            asymptotics_not_binding: c_block_training_lb <= self.region_switch_rate(),
            dropped: DROPPED_EXPONENT,
        }
    }

    /// The `ρ = 1` branch, `rt·log(1 + K/2) - R`.
    pub fn region_a_value(&self, rate: f64) -> f64 {
        self.gallager_bound(1.0, rate)
    }

    /// The interior branch, `g(ρ*(R))`.
    pub fn region_b_value(&self, rate: f64) -> Result<f64> {
        Ok(self.gallager_bound(self.rho_star(rate)?, rate))
    }

    pub fn exponent(&self, rate: f64) -> Result<ExponentPoint> {
        self.exponent_with(&self.landmarks(), rate)
    }

    fn exponent_with(&self, marks: &RateLandmarks, rate: f64) -> Result<ExponentPoint> {
        check_rate(rate)?;
        let point = |value: f64, region, rho| ExponentPoint {
            rate,
            value,
            region,
            rho,
            asymptotics_not_binding: marks.asymptotics_not_binding,
            dropped: DROPPED_EXPONENT,
        };
        if rate >= marks.c_block {
            return Ok(point(0.0, Region::Beyond, 0.0));
        }
        if marks.asymptotics_not_binding {
            return Ok(point(self.region_a_value(rate).max(0.0), Region::A, 1.0));
        }
        if rate <= self.region_switch_rate() {
            return Ok(point(self.region_a_value(rate).max(0.0), Region::A, 1.0));
        }
        if rate <= marks.c_block_training_lb {
            let rho = self.rho_star(rate)?;
            return Ok(point(self.gallager_bound(rho, rate).max(0.0), Region::B, rho));
        }
        Ok(point(0.0, Region::C, 0.0))
    }

    pub fn curve(&self, rates: &[f64]) -> Result<ExponentCurve> {
        let landmarks = self.landmarks();
        let samples = rates.iter().map(|&r| self.exponent_with(&landmarks, r)).collect::<Result<_>>()?;
        Ok(ExponentCurve { landmarks, samples })
    }

    /// `δ·exp(-E_r(R))`, returned unclamped.
    pub fn block_error_bound(&self, rate: f64) -> Result<BlockErrorBound> {
        let exponent = self.exponent(rate)?;
        let delta = self.regime.delta;
        Ok(BlockErrorBound {
            bound: delta * (-exponent.value).exp(),
            delta,
            exponent,
            in_unit_interval: exponent.value >= delta.ln(),
        })
    }

    /// Outage at block rate `rate`; see [`outage_probability`].
    pub fn outage(&self, rate: f64) -> Result<Outage> {
        check_rate(rate)?;
        let l = self.coherence_length();
        let opt = training_f_star_real(self.t, l, self.regime.snr_b)?;
        let k = (self.r * self.t) as u32;
        let p = gamma_lower_regularized(k, rate / (l * opt.f_star))?;
        Ok(Outage { probability: p, delta_times_probability: self.regime.delta * p, f_star: opt.f_star })
    }
}

/// Exact maximizer of the Gallager bound; see [`ExponentModel::rho_star`].
pub fn rho_star(dims: &ChannelDims, regime: &RegimeParams, rate: f64) -> Result<f64> {
    ExponentModel::new(dims.t(), dims.r(), *regime)?.rho_star(rate)
}

pub fn rate_landmarks(dims: &ChannelDims, snr: f64) -> Result<RateLandmarks> {
    Ok(ExponentModel::from_dims(dims, snr)?.landmarks())
}

pub fn error_exponent(dims: &ChannelDims, snr: f64, rate: f64) -> Result<ExponentPoint> {
    ExponentModel::from_dims(dims, snr)?.exponent(rate)
}

pub fn block_error_bound(dims: &ChannelDims, snr: f64, rate: f64) -> Result<BlockErrorBound> {
    ExponentModel::from_dims(dims, snr)?.block_error_bound(rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outage {
    pub probability: f64,
    /// `δ·P_outage`, comparable with the block error bound.
    pub delta_times_probability: f64,
    pub f_star: f64,
}

/// `Pr(χ²_{rt} < R/(l·f*))` with unit-mean exponential components, where
/// `f*` is the numerically optimized training SNR.
pub fn outage_probability(dims: &ChannelDims, snr: f64, rate: f64) -> Result<Outage> {
    dims.require_training()?;
    ExponentModel::from_dims(dims, snr)?.outage(rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diversity {
    /// `rt(κ - min{1,ν}) + 1 - min{1,ν}`.
    pub closed_form: f64,
    /// Slope of `log δ·exp(-E_r)` against `log snr`.
    pub bound_fit: Option<SlopeFit>,
    /// Slope of `log δ·P_outage` against `log snr`.
    pub outage_fit: Option<SlopeFit>,
}

/// Low-SNR diversity order at block rate `R = l·r·snr^κ`, with empirical
/// slopes over `snr_grid` when it has at least two points.
pub fn diversity_low_snr(t: usize, r: usize, nu: f64, kappa: f64, snr_grid: &[f64]) -> Result<Diversity> {
    if t == 0 || r == 0 {
        return Err(Error::dimension("antenna counts must be at least 1"));
    }
    let alpha = nu.min(1.0);
    if !(kappa > alpha && kappa < 2.0 * nu) {
        return Err(Error::domain(format!(
            "kappa = {kappa} outside ({alpha}, {}); the rate is not in the outage-dominated region",
            2.0 * nu
        )));
    }
    let closed_form = (r * t) as f64 * (kappa - alpha) + 1.0 - alpha;
    if snr_grid.len() < 2 {
        return Ok(Diversity { closed_form, bound_fit: None, outage_fit: None });
    }
    let mut bound_pts = Vec::with_capacity(snr_grid.len());
    let mut outage_pts = Vec::with_capacity(snr_grid.len());
    for &snr in snr_grid {
        let model = ExponentModel::from_nu(t, r, snr, nu)?;
        let rate = model.coherence_length() * r as f64 * snr.powf(kappa);
        let x = snr.ln();
        bound_pts.push((x, model.block_error_bound(rate)?.bound.ln()));
        outage_pts.push((x, model.outage(rate)?.delta_times_probability.ln()));
    }
    Ok(Diversity {
        closed_form,
        bound_fit: Some(slope_fit(&bound_pts)?),
        outage_fit: Some(slope_fit(&outage_pts)?),
    })
}
