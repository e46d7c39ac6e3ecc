//! Primary SINR/rate and backscatter SNR/BER for the parasitic decoding order.
//!
//! The PU decodes the primary symbol first, treating the backscattered term
//! as interference, then cancels it and decodes the BPSK backscatter symbol.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::ModelError;

/// Channels and link constants seen by one beamformer.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    /// PT→PU channel.
    pub h_u: DVector<Complex64>,
    /// PT→BD channel.
    pub h_b: DVector<Complex64>,
    /// BD→PU channel.
    pub h_s: Complex64,
    /// Reflection efficiency α ∈ [0, 1].
    pub alpha: f64,
    /// Noise power σ², watts.
    pub noise: f64,
}

impl LinkBudget {
    pub fn new(
        h_u: DVector<Complex64>,
        h_b: DVector<Complex64>,
        h_s: Complex64,
        alpha: f64,
        noise: f64,
    ) -> Result<Self, ModelError> {
        if h_u.len() != h_b.len() {
            return Err(ModelError::LengthMismatch {
                what: "h_b",
                got: h_b.len(),
                expected: h_u.len(),
            });
        }
        if h_u.is_empty() {
            return Err(ModelError::NoAntennas);
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(ModelError::Negative {
                quantity: "reflection efficiency (must lie in [0,1])",
                value: alpha,
            });
        }
        if !(noise > 0.0) {
            return Err(ModelError::Negative {
                quantity: "noise power (must be positive)",
                value: noise,
            });
        }
        Ok(Self {
            h_u,
            h_b,
            h_s,
            alpha,
            noise,
        })
    }

    pub fn antennas(&self) -> usize {
        self.h_u.len()
    }

    /// Effective backscatter gain α|h_s|².
    pub fn backscatter_gain(&self) -> f64 {
        self.alpha * self.h_s.norm_sqr()
    }
}

/// `|h^H w|²`.
pub fn beam_gain(h: &DVector<Complex64>, w: &DVector<Complex64>) -> f64 {
    h.dotc(w).norm_sqr()
}

/// γ_p = |h_u^H w|² / (α|h_s|²|h_b^H w|² + σ²).
pub fn primary_sinr(lb: &LinkBudget, w: &DVector<Complex64>) -> f64 {
    let signal = beam_gain(&lb.h_u, w);
    let interference = lb.backscatter_gain() * beam_gain(&lb.h_b, w);
    signal / (interference + lb.noise)
}

/// `log2(1 + γ_p)`.
pub fn primary_rate(sinr: f64) -> Result<f64, ModelError> {
    if sinr < 0.0 || sinr.is_nan() {
        return Err(ModelError::Negative {
            quantity: "SINR",
            value: sinr,
        });
    }
    Ok(sinr.ln_1p() / std::f64::consts::LN_2)
}

/// Rate at beamformer `w`; infallible because `primary_sinr` is never negative.
pub fn rate_at(lb: &LinkBudget, w: &DVector<Complex64>) -> f64 {
    primary_sinr(lb, w).ln_1p() / std::f64::consts::LN_2
}

/// γ_c = α|h_s|²|h_b^H w|² / σ².
pub fn secondary_snr(lb: &LinkBudget, w: &DVector<Complex64>) -> f64 {
    lb.backscatter_gain() * beam_gain(&lb.h_b, w) / lb.noise
}

/// Average BPSK BER `1/2 − 1/2 √(γ/(1+γ))`.
pub fn secondary_ber(snr: f64) -> Result<f64, ModelError> {
    if snr < 0.0 || snr.is_nan() {
        return Err(ModelError::Negative {
            quantity: "SNR",
            value: snr,
        });
    }
    if snr.is_infinite() {
        return Ok(0.0);
    }
    Ok(0.5 - 0.5 * (snr / (1.0 + snr)).sqrt())
}

/// Smallest SNR whose BER does not exceed `ber_max`, found by bisection.
///
/// The upper end starts at 1 and doubles until it brackets the target. The
/// bracket is then halved until the BER at the midpoint is within 1e-13 of
/// the target or the interval collapses to machine precision.
pub fn min_snr_for_ber(ber_max: f64) -> Result<f64, ModelError> {
    if !(ber_max > 0.0 && ber_max < 0.5) {
        return Err(ModelError::BerOutOfRange(ber_max));
    }
    let ber = |g: f64| 0.5 - 0.5 * (g / (1.0 + g)).sqrt();
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while ber(hi) > ber_max {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let e = ber(mid);
        if (e - ber_max).abs() <= 1e-13 {
            return Ok(mid);
        }
        if e > ber_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
