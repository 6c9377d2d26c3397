//! Free-space optical inter-satellite link with pointing-error fading.
//!
//! The received SNR over a chord `l` is `ρ G (λ / 4πl)² W / σ²`. The fading
//! gain `W` has CDF `(w/A₀)^{η²}` on `[0, A₀]`; the pointing deviation removes
//! an extra `ς²` of probability mass, which is modelled as an outage with
//! gain zero. All quantities are SI.

use std::f64::consts::{LN_2, PI};

use rand::Rng;

use crate::error::{Error, QuadratureError, Result};
use crate::quadrature::{self, breakpoints};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub tx_power_w: f64,
    /// Linear antenna gain (product of transmit and receive gains).
    pub antenna_gain: f64,
    pub wavelength_m: f64,
    pub bandwidth_hz: f64,
    pub noise_power_w: f64,
    /// Ratio of equivalent beam width to jitter standard deviation.
    pub eta_s: f64,
    /// Fraction of collected power at zero pointing error.
    pub a0: f64,
    pub jitter_sigma_rad: f64,
    /// Linear SNR threshold for coverage.
    pub coverage_threshold: f64,
    pub packet_bits: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbw_to_watts(dbw: f64) -> f64 {
    db_to_linear(dbw)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

impl Default for ChannelParams {
    /// Reference optical link: 15 dBW, 160 dBi, 1550 nm, 20 MHz, −100 dBm noise,
    /// η = 1.00526, A₀ = 0.01979, 15 mrad jitter, 0 dB threshold, 10 Mbit packets.
    fn default() -> Self {
        ChannelParams {
            tx_power_w: dbw_to_watts(15.0),
            antenna_gain: db_to_linear(160.0),
            wavelength_m: 1550e-9,
            bandwidth_hz: 20e6,
            noise_power_w: dbm_to_watts(-100.0),
            eta_s: 1.00526,
            a0: 0.01979,
            jitter_sigma_rad: 15e-3,
            coverage_threshold: 1.0,
            packet_bits: 10e6,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tx_power_w", self.tx_power_w),
            ("antenna_gain", self.antenna_gain),
            ("wavelength_m", self.wavelength_m),
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_power_w", self.noise_power_w),
            ("eta_s", self.eta_s),
            ("a0", self.a0),
            ("packet_bits", self.packet_bits),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if self.a0 > 1.0 {
            return Err(Error::invalid("a0", format!("must not exceed 1, got {}", self.a0)));
        }
        let j = self.jitter_sigma_rad;
        if !(j.is_finite() && j >= 0.0 && j * j < 1.0) {
            return Err(Error::invalid(
                "jitter_sigma_rad",
                format!("need 0 ≤ ς and ς² < 1, got {j}"),
            ));
        }
        let g = self.coverage_threshold;
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::invalid(
                "coverage_threshold",
                format!("must be non-negative, got {g}"),
            ));
        }
        Ok(())
    }

    /// Probability that the pointing deviation does not cause an outage.
    pub fn non_outage_probability(&self) -> f64 {
        1.0 - self.jitter_sigma_rad * self.jitter_sigma_rad
    }

    /// SNR per unit fading gain at chord `l`.
    pub fn snr_per_gain(&self, hop_chord_m: f64) -> f64 {
        let r = self.wavelength_m / (4.0 * PI * hop_chord_m);
        self.tx_power_w * self.antenna_gain * r * r / self.noise_power_w
    }

    /// Gain at which the SNR meets the threshold, relative to `A₀`.
    fn threshold_gain_ratio(&self, hop_chord_m: f64) -> f64 {
        self.coverage_threshold / (self.a0 * self.snr_per_gain(hop_chord_m))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSample {
    pub deviation_rad: f64,
    pub gain: f64,
    pub outage: bool,
}

/// `E[W] = A₀ η²/(1+η²)·(1−ς²)`.
pub fn mean_fading_gain(params: &ChannelParams) -> f64 {
    let e2 = params.eta_s * params.eta_s;
    params.a0 * e2 / (1.0 + e2) * params.non_outage_probability()
}

pub fn snr(params: &ChannelParams, hop_chord_m: f64, gain: f64) -> f64 {
    params.snr_per_gain(hop_chord_m) * gain
}

/// Probability that a hop of length `l` meets the SNR threshold:
/// `(1 − x^{η²})(1 − ς²)` with `x` the threshold gain over `A₀`.
pub fn conditional_coverage(params: &ChannelParams, hop_chord_m: f64) -> f64 {
    let x = params.threshold_gain_ratio(hop_chord_m);
    if x >= 1.0 {
        return 0.0;
    }
    let e2 = params.eta_s * params.eta_s;
    ((1.0 - x.powf(e2)) * params.non_outage_probability()).clamp(0.0, 1.0)
}

/// Time to push one packet at a fixed gain; infinite for zero gain.
pub fn latency_at_gain(params: &ChannelParams, hop_chord_m: f64, gain: f64) -> f64 {
    params.packet_bits * LN_2 / (params.bandwidth_hz * snr(params, hop_chord_m, gain).ln_1p())
}

/// Packet latency at the mean fading gain.
pub fn single_hop_latency_kernel(params: &ChannelParams, hop_chord_m: f64) -> f64 {
    latency_at_gain(params, hop_chord_m, mean_fading_gain(params))
}

/// Mean packet latency over the non-outage fading gain, `∫ T(l, w) f_W(w) dw`.
///
/// The density is `η² w^{η²−1}/A₀^{η²}` and `T ~ 1/w` near zero, so the
/// integral only converges for `η > 1`, and is then dominated by deep fades.
/// With `w = A₀ t^p` (`p = 1/η²`) and `v = t^{1−p}` the integrand becomes
/// `h(v^{p/(1−p)})/(1−p)` where `h(s) = s·T(A₀ s)` is bounded and smooth.
pub fn expected_latency_over_fading(
    params: &ChannelParams,
    hop_chord_m: f64,
) -> std::result::Result<f64, QuadratureError> {
    if params.eta_s <= 1.0 {
        return Err(QuadratureError::Divergent(
            "mean latency over fading is infinite when the beam-width ratio is at most 1",
        ));
    }
    let k = params.snr_per_gain(hop_chord_m) * params.a0;
    let scale = params.packet_bits * LN_2 / params.bandwidth_hz;
    if !k.is_finite() {
        return Ok(0.0);
    }
    let p = 1.0 / (params.eta_s * params.eta_s);
    let one_minus_p = 1.0 - p;
    let q = p / one_minus_p;
    let h = |s: f64| {
        let d = (k * s).ln_1p();
        if d > 0.0 {
            scale * s / d
        } else {
            scale / k
        }
    };
    let pts = breakpoints(0.0, 1.0, &[0.9, 0.99, 0.999]);
    let v = quadrature::try_integrate_pts(|v| Ok(h(v.powf(q))), &pts, quadrature::PROBABILITY)?;
    Ok(v / one_minus_p)
}

/// Non-outage fading gain for a uniform variate `u ∈ (0, 1]` (inverse CDF).
pub fn gain_from_uniform(params: &ChannelParams, u: f64) -> f64 {
    params.a0 * u.powf(1.0 / (params.eta_s * params.eta_s))
}

/// Gain conditioned on meeting the SNR threshold at chord `l`, for `u ∈ (0, 1]`.
///
/// Equals [`gain_from_uniform`] when the threshold is zero.
pub fn covered_gain_from_uniform(params: &ChannelParams, hop_chord_m: f64, u: f64) -> f64 {
    let x = params.threshold_gain_ratio(hop_chord_m).clamp(0.0, 1.0);
    let lo = x.powf(params.eta_s * params.eta_s);
    gain_from_uniform(params, lo + (1.0 - lo) * u)
}

/// Fading gain given that the hop meets the SNR threshold.
pub fn sample_covered_gain<R: Rng + ?Sized>(params: &ChannelParams, hop_chord_m: f64, rng: &mut R) -> f64 {
    covered_gain_from_uniform(params, hop_chord_m, 1.0 - rng.random::<f64>())
}

/// One draw of the fading state of a hop.
pub fn sample_fading<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> FadingSample {
    let j = params.jitter_sigma_rad;
    let outage = rng.random::<f64>() < j * j;
    // Rayleigh by inverse CDF.
    let deviation_rad = j * (-2.0 * (1.0 - rng.random::<f64>()).ln()).sqrt();
    let u = 1.0 - rng.random::<f64>();
    let gain = if outage { 0.0 } else { gain_from_uniform(params, u) };
    FadingSample {
        deviation_rad,
        gain,
        outage,
    }
}
