//! BPSK over AWGN: transmission, channel LLRs, codeword log-likelihood and
//! the empirical divergence function (EDF).
//!
//! Bit b maps to the symbol 1−2b; noise is real Gaussian with variance σ²
//! per dimension. All likelihood work stays in the natural-log domain; the
//! EDF converts to base 2 only at the final normalization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::binlin::BitVector;
use crate::{Error, Result};

/// How an SNR figure in dB is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrMode {
    /// Energy per information bit over noise density; uses the code rate.
    EbN0,
    /// Energy per BPSK symbol over noise density.
    EsN0,
}

impl SnrMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ebn0" => Ok(Self::EbN0),
            "esn0" => Ok(Self::EsN0),
            other => Err(Error::InvalidParameter {
                name: "snr_mode",
                reason: format!("unknown SNR mode `{other}` (ebn0 | esn0)"),
            }),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::EbN0 => "ebn0",
            Self::EsN0 => "esn0",
        }
    }
}

/// AWGN channel parameters for unit-energy BPSK.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    sigma: f64,
    snr_db: f64,
    snr_mode: SnrMode,
    code_rate: f64,
}

impl ChannelParams {
    /// `code_rate` is the overall code rate k/(2n); it enters only the Eb/N0
    /// conversion σ² = 1/(2·R·10^(snr/10)). Es/N0 uses σ² = 1/(2·10^(snr/10)).
    pub fn new(snr_db: f64, snr_mode: SnrMode, code_rate: f64) -> Result<Self> {
        if !(code_rate > 0.0 && code_rate <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "code_rate",
                reason: format!("code rate must lie in (0, 1], got {code_rate}"),
            });
        }
        let scale = match snr_mode {
            SnrMode::EbN0 => 2.0 * code_rate,
            SnrMode::EsN0 => 2.0,
        };
        let sigma = (1.0 / (scale * 10f64.powf(snr_db / 10.0))).sqrt();
        Ok(Self {
            sigma,
            snr_db,
            snr_mode,
            code_rate,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    pub fn snr_mode(&self) -> SnrMode {
        self.snr_mode
    }
}

/// Transmits `c` over the channel using noise drawn from `rng`.
pub fn bpsk_awgn_with<R: Rng + ?Sized>(c: &BitVector, sigma: f64, rng: &mut R) -> Vec<f64> {
    c.iter()
        .map(|bit| {
            let x = if bit { -1.0 } else { 1.0 };
            x + sigma * rng.sample::<f64, _>(StandardNormal)
        })
        .collect()
}

/// Seeded transmission; identical seed gives an identical received vector.
pub fn bpsk_awgn(c: &BitVector, params: &ChannelParams, rng_seed: u64) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    bpsk_awgn_with(c, params.sigma, &mut rng)
}

/// Channel LLRs Λⱼ = 2yⱼ/σ²; positive means bit 0 more likely.
pub fn channel_llr(y: &[f64], sigma: f64) -> Vec<f64> {
    let s = 2.0 / (sigma * sigma);
    y.iter().map(|&v| s * v).collect()
}

/// log P(y|c) = Σⱼ −(yⱼ−(1−2cⱼ))²/(2σ²).
///
/// The Gaussian normalizer −len·log(σ√(2π)) is omitted; it is identical for
/// every word of the same length, so likelihood comparisons are unaffected.
pub fn log_likelihood(y: &[f64], c: &BitVector, sigma: f64) -> Result<f64> {
    if y.len() != c.len() {
        return Err(Error::DimensionMismatch {
            context: "received vector vs codeword length",
            expected: c.len(),
            got: y.len(),
        });
    }
    let inv = 1.0 / (2.0 * sigma * sigma);
    Ok(y.iter()
        .zip(c.iter())
        .map(|(&yj, bit)| {
            let d = yj - if bit { -1.0 } else { 1.0 };
            -d * d * inv
        })
        .sum())
}

/// ln(1+e^x) without overflow.
fn ln_1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Empirical divergence function D(y,c) = (1/len)·Σⱼ log₂ P(yⱼ|cⱼ)/P(yⱼ)
/// with P(y) the mixture under a uniform input. Always at most 1.
pub fn edf(y: &[f64], c: &BitVector, sigma: f64) -> f64 {
    assert_eq!(y.len(), c.len(), "length mismatch in EDF");
    if y.is_empty() {
        return 0.0;
    }
    let s = 2.0 / (sigma * sigma);
    // Per bit: 1 − log₂(1+e^(−x)) with x the LLR signed toward the bit.
    let sum: f64 = y
        .iter()
        .zip(c.iter())
        .map(|(&yj, bit)| {
            let x = if bit { -s * yj } else { s * yj };
            1.0 - ln_1p_exp(-x) / std::f64::consts::LN_2
        })
        .sum();
    sum / y.len() as f64
}
