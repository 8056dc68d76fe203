//! Channel models, LLR generation and per-trial random streams.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gf2::BitVector;
use crate::reliability::ebn0_to_sigma2;

pub use crate::codec::scl::LLR_MAX;

/// How a BI-AWGN SNR value is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrAxis {
    #[default]
    EbN0,
    EsN0,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    /// BPSK over AWGN with noise variance `sigma2`; zero means noiseless.
    BiAwgn { snr_db: f64, sigma2: f64 },
    Bec { eps: f64 },
}

impl ChannelModel {
    /// BI-AWGN at `ebn0_db` for a code of rate `rate`. `f64::INFINITY` gives a noiseless channel.
    pub fn awgn(ebn0_db: f64, rate: f64) -> Result<Self> {
        Self::awgn_on_axis(ebn0_db, rate, SnrAxis::EbN0)
    }

    pub fn awgn_on_axis(snr_db: f64, rate: f64, axis: SnrAxis) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(invalid(format!("code rate {rate} outside (0, 1]")));
        }
        if snr_db.is_nan() {
            return Err(invalid("SNR is NaN"));
        }
        let sigma2 = match axis {
            SnrAxis::EbN0 => ebn0_to_sigma2(snr_db, rate),
            SnrAxis::EsN0 => 1.0 / (2.0 * 10f64.powf(snr_db / 10.0)),
        };
        Ok(ChannelModel::BiAwgn { snr_db, sigma2 })
    }

    pub fn bec(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(invalid(format!("erasure probability {eps} outside [0, 1]")));
        }
        Ok(ChannelModel::Bec { eps })
    }

    /// Sweep value this model was built from.
    pub fn param(&self) -> f64 {
        match *self {
            ChannelModel::BiAwgn { snr_db, .. } => snr_db,
            ChannelModel::Bec { eps } => eps,
        }
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ChannelModel::BiAwgn { snr_db, .. } => write!(f, "awgn {}", format_param(snr_db)),
            ChannelModel::Bec { eps } => write!(f, "bec {eps}"),
        }
    }
}

/// Sweep value as written to CSV; infinite SNR prints as `inf`.
pub fn format_param(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v}")
    }
}

/// Parses a sweep value; accepts `inf`.
pub fn parse_param(s: &str) -> Result<f64> {
    let t = s.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        _ => t
            .parse::<f64>()
            .map_err(|e| crate::error::Error::Parse(format!("bad sweep value {t:?}: {e}"))),
    }
}

/// Parses a comma-separated sweep list.
pub fn parse_param_list(s: &str) -> Result<Vec<f64>> {
    let v: Result<Vec<f64>> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_param)
        .collect();
    let v = v?;
    if v.is_empty() {
        return Err(invalid("sweep list is empty"));
    }
    Ok(v)
}

/// Channel LLRs `ln p(y|0)/p(y|1)` for codeword `x`.
pub fn transmit(x: &BitVector, model: &ChannelModel, rng: &mut impl Rng) -> Vec<f64> {
    match *model {
        ChannelModel::BiAwgn { sigma2, .. } => {
            if sigma2 == 0.0 {
                return x.iter().map(|b| if b { -LLR_MAX } else { LLR_MAX }).collect();
            }
            let sigma = sigma2.sqrt();
            x.iter()
                .map(|b| {
                    let s = if b { -1.0 } else { 1.0 };
                    let n: f64 = rng.sample(StandardNormal);
                    2.0 * (s + sigma * n) / sigma2
                })
                .collect()
        }
        ChannelModel::Bec { eps } => x
            .iter()
            .map(|b| {
                if rng.random::<f64>() < eps {
                    0.0
                } else if b {
                    -LLR_MAX
                } else {
                    LLR_MAX
                }
            })
            .collect(),
    }
}

/// Independent random stream for trial `trial` of sweep point `point`.
///
/// The ChaCha key comes from `seed`; the stream id packs `point` into the high
/// 24 bits and `trial` into the low 40 bits.
pub fn trial_rng(seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((point << 40) | (trial & ((1 << 40) - 1)));
    rng
}

/// Gaussian upper tail probability `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}
