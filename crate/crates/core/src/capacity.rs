//! Wideband capacity quantities: the coherent expansion, the Gaussian-input
//! lower bound, coherence-length thresholds, the regime map from coherence
//! length, the sublinear capacity term and energy per nat.
//!
//! The coherence exponent `ν` parameterizes the coherence length as
//! `l = t²/(r+t)² · SNR^{-2ν}`. With `α = min{1, ν}`, Peaky Gaussian
//! signaling transmits in a fraction `δ = SNR^{1-α}` of the blocks at in-block
//! SNR `SNR_b = SNR/δ = SNR^α`.

use serde::Serialize;

use crate::channel::ChannelDims;
use crate::error::{Error, Result};

/// Wideband regime derived from a coherence length (or exponent) and SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeParams {
    pub snr: f64,
    pub nu: f64,
    pub alpha_eff: f64,
    pub delta: f64,
    pub snr_b: f64,
}

impl RegimeParams {
    /// Regime for a given coherence exponent `nu > 0` and `snr ∈ (0, 1)`.
    pub fn from_nu(snr: f64, nu: f64) -> Result<Self> {
        if !(snr > 0.0 && snr < 1.0) {
            return Err(Error::domain(format!("regime requires snr in (0, 1), got {snr}")));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Regime(format!("coherence exponent must be positive, got {nu}")));
        }
        let alpha_eff = nu.min(1.0);
        let delta = snr.powf(1.0 - alpha_eff);
        Ok(Self { snr, nu, alpha_eff, delta, snr_b: snr / delta })
    }

    /// Coherence length `t²/(r+t)² · snr^{-2ν}` implied by this regime, as a real.
    pub fn coherence_length(&self, t: usize, r: usize) -> f64 {
        let (t, r) = (t as f64, r as f64);
        t * t / ((r + t) * (r + t)) * self.snr.powf(-2.0 * self.nu)
    }

    /// The exponent `2ν - min{1, ν}` that sets the in-block SNR-per-block scale.
    pub fn block_exponent(&self) -> f64 {
        2.0 * self.nu - self.alpha_eff
    }
}

/// Linear and sublinear parts of a capacity expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityBreakdown {
    pub linear: f64,
    pub sublinear: f64,
    pub total: f64,
    /// Remainder omitted from the closed form.
    pub dropped: &'static str,
}

fn check_snr(snr: f64) -> Result<()> {
    if !(snr >= 0.0 && snr.is_finite()) {
        return Err(Error::domain(format!("snr must be finite and nonnegative, got {snr}")));
    }
    Ok(())
}

/// Low-SNR expansion of the coherent mutual information with Gaussian input,
/// `r·snr - r(r+t)/(2t)·snr² `; the `O(snr³)` remainder is dropped.
pub fn coherent_expansion(dims: &ChannelDims, snr: f64) -> Result<CapacityBreakdown> {
    check_snr(snr)?;
    let (t, r) = (dims.t() as f64, dims.r() as f64);
    let linear = r * snr;
    let sublinear = r * (r + t) / (2.0 * t) * snr * snr;
    Ok(CapacityBreakdown { linear, sublinear, total: linear - sublinear, dropped: "O(snr^3)" })
}

/// Gaussian-input lower bound on non-coherent capacity,
/// `r·snr - r(r+t)/(2t)·snr² - r(t/l)·log(1 + l·snr/t)` with `O(snr³)` dropped.
///
/// For short coherence lengths the value can be negative; it is returned
/// as is and callers decide how to flag it.
pub fn gaussian_lower_bound(dims: &ChannelDims, snr: f64) -> Result<f64> {
    let coherent = coherent_expansion(dims, snr)?;
    let (t, r, l) = (dims.t() as f64, dims.r() as f64, dims.l() as f64);
    Ok(coherent.total - r * (t / l) * (l * snr / t).ln_1p())
}

/// Inverts `l = t²/(r+t)²·snr^{-2ν}` for `ν` and derives the regime.
pub fn regime_from_coherence(dims: &ChannelDims, snr: f64) -> Result<RegimeParams> {
    if !(snr > 0.0 && snr < 1.0) {
        return Err(Error::domain(format!("regime requires snr in (0, 1), got {snr}")));
    }
    let (t, r, l) = (dims.t() as f64, dims.r() as f64, dims.l() as f64);
    let scaled = l * (r + t) * (r + t) / (t * t);
    if scaled <= 1.0 {
        return Err(Error::Regime("coherence too short for the parameterization".into()));
    }
    let nu = scaled.ln() / (2.0 * (1.0 / snr).ln());
    RegimeParams::from_nu(snr, nu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherenceThresholds {
    /// Coherence length any scheme needs for sublinear term of order `snr^{1+α}`.
    pub l_min: f64,
    /// Coherence length Peaky Gaussian signaling needs for the same order.
    pub l_gaussian: f64,
}

/// `l_min = t²/(r+t)²·snr^{-2α}` and `l^G = t²/(r+t)²·snr^{-2(α+ε)}`, as reals.
pub fn coherence_thresholds(dims: &ChannelDims, snr: f64, alpha: f64, epsilon: f64) -> Result<CoherenceThresholds> {
    if !(snr > 0.0 && snr < 1.0) {
        return Err(Error::domain(format!("thresholds require snr in (0, 1), got {snr}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(epsilon > 0.0 && epsilon < alpha) {
        return Err(Error::domain(format!("epsilon must lie in (0, alpha), got {epsilon}")));
    }
    let (t, r) = (dims.t() as f64, dims.r() as f64);
    let scale = t * t / ((r + t) * (r + t));
    Ok(CoherenceThresholds {
        l_min: scale * snr.powf(-2.0 * alpha),
        l_gaussian: scale * snr.powf(-2.0 * (alpha + epsilon)),
    })
}

/// How the sublinear term is parameterized: by the exponent `α` or directly
/// by the coherence length `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SublinearParam {
    Alpha(f64),
    Coherence(f64),
}

impl SublinearParam {
    /// Exactly one of the two must be present.
    pub fn from_options(alpha: Option<f64>, l: Option<f64>) -> Result<Self> {
        match (alpha, l) {
            (Some(a), None) => Ok(Self::Alpha(a)),
            (None, Some(l)) => Ok(Self::Coherence(l)),
            (Some(_), Some(_)) => Err(Error::Usage("give either alpha or l for the sublinear term, not both".into())),
            (None, None) => Err(Error::Usage("the sublinear term needs alpha or l".into())),
        }
    }
}

/// Leading sublinear capacity term `Δ = r·snr - C(snr)`.
///
/// * `Alpha(α)`: `r(r+t)/(2t)·snr^{1+α}`, remainder `O(snr^{1+α+ε})` dropped.
/// * `Coherence(l)`: `r·snr/(2√l)`, remainder `o(snr/√l)` dropped; once
///   `l ≥ t²/(t+r)²·snr^{-2}` the term saturates at its `α = 1` value.
pub fn sublinear_term(dims: &ChannelDims, snr: f64, param: SublinearParam) -> Result<f64> {
    check_snr(snr)?;
    let (t, r) = (dims.t() as f64, dims.r() as f64);
    let alpha_form = |alpha: f64| r * (r + t) / (2.0 * t) * snr.powf(1.0 + alpha);
    match param {
        SublinearParam::Alpha(alpha) => {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")));
            }
            Ok(alpha_form(alpha))
        }
        SublinearParam::Coherence(l) => {
            if !(l >= 1.0) {
                return Err(Error::domain(format!("coherence length must be at least 1, got {l}")));
            }
            if snr == 0.0 {
                return Ok(0.0);
            }
            let saturation = t * t / ((t + r) * (t + r)) / (snr * snr);
            if l >= saturation {
                Ok(alpha_form(1.0))
            } else {
                Ok(r * snr / (2.0 * l.sqrt()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyPerNat {
    /// `E_n/N_0 = snr / (r·snr - Δ)`.
    pub ratio: f64,
    pub log_ratio: f64,
    /// First-order form `Δ/(r·snr) - log r`.
    pub log_approx: f64,
}

/// Energy per information nat relative to the noise level when the
/// sublinear term is `delta_term`.
pub fn energy_per_nat(r: usize, snr: f64, delta_term: f64) -> Result<EnergyPerNat> {
    let linear = r as f64 * snr;
    if !(delta_term >= 0.0) {
        return Err(Error::domain(format!("sublinear term must be nonnegative, got {delta_term}")));
    }
    if !(linear > delta_term) {
        return Err(Error::domain(format!(
            "sublinear term {delta_term} leaves no positive capacity at r*snr = {linear}"
        )));
    }
    let ratio = snr / (linear - delta_term);
    Ok(EnergyPerNat { ratio, log_ratio: ratio.ln(), log_approx: delta_term / linear - (r as f64).ln() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dims(t: usize, r: usize, l: usize) -> ChannelDims {
        ChannelDims::new(t, r, l).unwrap()
    }

    #[test]
    fn coherent_expansion_examples() {
        assert_eq!(coherent_expansion(&dims(2, 2, 1), 0.0).unwrap().total, 0.0);
        let c = coherent_expansion(&dims(2, 2, 1), 0.1).unwrap();
        assert!((c.total - 0.18).abs() < 1e-15);
        let c = coherent_expansion(&dims(1, 1, 1), 0.01).unwrap();
        assert!((c.total - 0.0099).abs() < 1e-16);
        assert!(coherent_expansion(&dims(1, 1, 1), -0.1).is_err());
    }

    #[test]
    fn gaussian_lower_bound_examples() {
        assert_eq!(gaussian_lower_bound(&dims(1, 1, 5), 0.0).unwrap(), 0.0);
        let v = gaussian_lower_bound(&dims(1, 1, 1000), 0.1).unwrap();
        assert!((v - (0.09 - 101f64.ln() / 1000.0)).abs() < 1e-15);
        assert!((v - 0.085_384_879_483_158_74).abs() < 1e-12);
        let short = gaussian_lower_bound(&dims(1, 1, 10), 0.1).unwrap();
        assert!(short < v);
        // Short blocks can push the bound below zero.
        assert!(gaussian_lower_bound(&dims(4, 1, 1), 0.5).unwrap() < 0.0);
    }

    #[test]
    fn gaussian_lower_bound_monotone_in_l() {
        let mut prev = f64::NEG_INFINITY;
        for l in (1..=20).map(|k| k * k * 5) {
            let v = gaussian_lower_bound(&dims(2, 3, l), 0.05).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn regime_examples() {
        let g = regime_from_coherence(&dims(2, 2, 25), 0.1).unwrap();
        assert!((g.nu - 1.0).abs() < 1e-12);
        assert!((g.delta - 1.0).abs() < 1e-12);
        assert!((g.snr_b - 0.1).abs() < 1e-12);

        // ν = log(40)/(2 log 10)
        let g = regime_from_coherence(&dims(1, 1, 10), 0.1).unwrap();
        assert!((g.nu - 40f64.log10() / 2.0).abs() < 1e-12);
        assert!((g.nu - 0.801_03).abs() < 1e-5);
        assert!((g.delta - 0.1f64.powf(1.0 - g.nu)).abs() < 1e-12);
        assert!((g.delta - 0.6325).abs() < 1e-4);
        assert!((g.snr_b - 0.1581).abs() < 1e-4);
        assert!((g.delta * g.snr_b - 0.1).abs() < 1e-15);

        let g = regime_from_coherence(&dims(1, 1, 100), 0.1).unwrap();
        assert!((g.nu - 1.301_03).abs() < 1e-5);
        assert_eq!(g.alpha_eff, 1.0);
        assert_eq!(g.delta, 1.0);
        assert_eq!(g.snr_b, 0.1);
    }

    #[test]
    fn regime_rejects_bad_snr() {
        assert!(regime_from_coherence(&dims(1, 1, 10), 0.0).is_err());
        assert!(regime_from_coherence(&dims(1, 1, 10), 1.0).is_err());
        assert!(RegimeParams::from_nu(0.1, 0.0).is_err());
    }

    #[test]
    fn threshold_examples() {
        let th = coherence_thresholds(&dims(2, 2, 1), 0.1, 1.0, 0.5).unwrap();
        assert!((th.l_min - 25.0).abs() < 1e-12);
        assert!((th.l_gaussian - 250.0).abs() < 1e-10);
        assert!(coherence_thresholds(&dims(2, 2, 1), 0.1, 0.0, 0.1).is_err());
        assert!(coherence_thresholds(&dims(2, 2, 1), 0.1, 1.1, 0.1).is_err());
        assert!(coherence_thresholds(&dims(2, 2, 1), 0.1, 0.5, 0.5).is_err());
    }

    #[test]
    fn sublinear_examples() {
        let v = sublinear_term(&dims(1, 1, 1), 0.01, SublinearParam::Alpha(0.5)).unwrap();
        assert!((v - 0.001).abs() < 1e-15);
        let v = sublinear_term(&dims(1, 2, 1), 0.01, SublinearParam::Coherence(400.0)).unwrap();
        assert!((v - 5e-4).abs() < 1e-16);
        assert_eq!(sublinear_term(&dims(1, 1, 1), 0.0, SublinearParam::Alpha(0.3)).unwrap(), 0.0);
        assert_eq!(sublinear_term(&dims(1, 1, 1), 0.0, SublinearParam::Coherence(9.0)).unwrap(), 0.0);
    }

    #[test]
    fn sublinear_saturates_at_coherent_value() {
        let d = dims(2, 3, 1);
        let snr = 0.01;
        let coherent = coherent_expansion(&d, snr).unwrap().sublinear;
        assert_eq!(sublinear_term(&d, snr, SublinearParam::Alpha(1.0)).unwrap(), coherent);
        let huge = sublinear_term(&d, snr, SublinearParam::Coherence(1e9)).unwrap();
        assert_eq!(huge, coherent);
        // continuous at the saturation point
        let sat = 4.0 / 25.0 / (snr * snr);
        let below = sublinear_term(&d, snr, SublinearParam::Coherence(sat * (1.0 - 1e-12))).unwrap();
        assert!((below - coherent).abs() < 1e-12 * coherent);
    }

    #[test]
    fn sublinear_usage_errors() {
        assert!(matches!(SublinearParam::from_options(Some(0.5), Some(10.0)), Err(Error::Usage(_))));
        assert!(matches!(SublinearParam::from_options(None, None), Err(Error::Usage(_))));
        assert_eq!(SublinearParam::from_options(None, Some(10.0)).unwrap(), SublinearParam::Coherence(10.0));
    }

    #[test]
    fn energy_examples() {
        let e = energy_per_nat(1, 0.01, 0.0).unwrap();
        assert!((e.ratio - 1.0).abs() < 1e-15);
        assert!(e.log_ratio.abs() < 1e-15);
        let e = energy_per_nat(2, 0.01, 0.002).unwrap();
        assert!((e.ratio - 0.01 / 0.018).abs() < 1e-15);
        assert!((e.log_ratio - (-0.587_786_664_902_119)).abs() < 1e-12);
        assert!((e.log_approx - (0.1 - 2f64.ln())).abs() < 1e-15);
        // Δ → 0 sends log_ratio to -log r
        let e = energy_per_nat(3, 0.01, 1e-12).unwrap();
        assert!((e.log_ratio + 3f64.ln()).abs() < 1e-9);
        assert!(energy_per_nat(2, 0.01, 0.02).is_err());
        assert!(energy_per_nat(2, 0.01, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn lower_bound_below_coherent(t in 1usize..5, r in 1usize..5, l in 1usize..10_000, snr in 0.0f64..1.0) {
            let d = dims(t, r, l);
            prop_assert!(gaussian_lower_bound(&d, snr).unwrap() <= coherent_expansion(&d, snr).unwrap().total);
        }

        #[test]
        fn regime_round_trip(t in 1usize..5, r in 1usize..5, l in 1usize..10_000, snr in 1e-6f64..0.9) {
            let d = dims(t, r, l);
            let g = regime_from_coherence(&d, snr).unwrap();
            let back = g.coherence_length(t, r);
            prop_assert!((back - l as f64).abs() <= 1e-9 * l as f64);
            prop_assert!((g.delta * g.snr_b - snr).abs() <= 1e-12 * snr);
            prop_assert!(g.delta > 0.0 && g.delta <= 1.0);
            prop_assert_eq!(g.delta == 1.0, g.nu >= 1.0);
            prop_assert_eq!(g.alpha_eff, g.nu.min(1.0));
        }

        #[test]
        fn thresholds_ordered(alpha in 1e-3f64..=1.0, frac in 1e-3f64..0.999, snr in 1e-4f64..0.5) {
            let th = coherence_thresholds(&dims(2, 3, 1), snr, alpha, alpha * frac).unwrap();
            prop_assert!(th.l_min < th.l_gaussian);
        }

        #[test]
        fn l_min_monotone(a1 in 0.05f64..0.9, da in 0.01f64..0.1, snr in 1e-4f64..0.5) {
            let d = dims(1, 2, 1);
            let lo = coherence_thresholds(&d, snr, a1, a1 / 2.0).unwrap().l_min;
            let hi = coherence_thresholds(&d, snr, a1 + da, a1 / 2.0).unwrap().l_min;
            prop_assert!(hi > lo);
            let smaller_snr = coherence_thresholds(&d, snr / 2.0, a1, a1 / 2.0).unwrap().l_min;
            prop_assert!(smaller_snr > lo);
        }
    }
}
