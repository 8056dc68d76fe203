//! Encoding and decoding of deep polar codes.

pub mod bpc;
pub mod crc;
pub mod ml;
pub mod parallel;
pub mod sc;
pub mod scl;

use std::fmt;
use std::str::FromStr;

use crate::construction::{BitRole, DeepPolarCode};
use crate::error::{invalid, Error, Result};
use crate::gf2::{polar_transform, transpose_transform, BitVector, Gf2Matrix};

pub use bpc::{bpc_prefix_check, BpcMode};
pub use crc::{crc_append, crc_check, CrcSpec};
pub use ml::{ml_decode_awgn, ml_decode_bec, BecStatus, MlDecoder};
pub use parallel::{parallel_scl_decode, parallel_scl_decode_with, DEFAULT_HYPOTHESIS_BUDGET};
pub use sc::sc_decode;
pub use scl::{scl_bpc_decode, scl_bpc_decode_with, SclOptions};

/// Splits an extended message into per-layer blocks, innermost layer first.
pub fn split_message(d_ext: &BitVector, code: &DeepPolarCode) -> Result<Vec<BitVector>> {
    if d_ext.len() != code.extended_k() {
        return Err(invalid(format!(
            "message has {} bits, code carries {}",
            d_ext.len(),
            code.extended_k()
        )));
    }
    let mut offset = 0;
    Ok(code
        .layers()
        .iter()
        .map(|l| {
            let part = d_ext.slice(offset, offset + l.k());
            offset += l.k();
            part
        })
        .collect())
}

/// Appends the CRC when the code has one.
pub fn extend_message(code: &DeepPolarCode, d: &BitVector) -> Result<BitVector> {
    if d.len() != code.k() {
        return Err(invalid(format!(
            "message has {} bits, code expects K = {}",
            d.len(),
            code.k()
        )));
    }
    Ok(match code.crc() {
        Some(spec) => spec.append(d),
        None => d.clone(),
    })
}

/// Input vectors `u_l` of every layer, innermost first.
pub fn encode_layers(code: &DeepPolarCode, d_ext: &BitVector) -> Result<Vec<BitVector>> {
    let parts = split_message(d_ext, code)?;
    let mut inputs = Vec::with_capacity(parts.len());
    let mut prev: Option<BitVector> = None;
    for (layer, part) in code.layers().iter().zip(&parts) {
        let mut u = BitVector::zeros(layer.n());
        for (j, &i) in layer.info().iter().enumerate() {
            u.set(i - 1, part.get(j));
        }
        if let Some(v) = &prev {
            for (j, &i) in layer.connection().iter().enumerate() {
                u.set(i - 1, v.get(j));
            }
        }
        prev = Some(transpose_transform(&u)?);
        inputs.push(u);
    }
    Ok(inputs)
}

/// Codeword of an extended (CRC-included) message.
pub fn encode_extended(code: &DeepPolarCode, d_ext: &BitVector) -> Result<BitVector> {
    let inputs = encode_layers(code, d_ext)?;
    polar_transform(inputs.last().expect("non-empty"))
}

/// Codeword of a `K`-bit message; the CRC is appended internally.
pub fn encode(code: &DeepPolarCode, d: &BitVector) -> Result<BitVector> {
    encode_extended(code, &extend_message(code, d)?)
}

/// `K x N` generator whose row `j` is the codeword of the unit message `e_j`.
pub fn generator_matrix(code: &DeepPolarCode) -> Gf2Matrix {
    let k = code.k();
    let rows = (0..k)
        .map(|j| encode(code, &BitVector::unit(k, j)).expect("valid length"))
        .collect();
    Gf2Matrix::from_rows(rows, code.n()).expect("rows have length N")
}

/// Bits recovered from a decoded outer input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    /// Message plus CRC, layer order.
    pub d_ext: BitVector,
    /// Information bits per layer, innermost first.
    pub layer_bits: Vec<BitVector>,
    /// Every recovered inner frozen bit is zero.
    pub valid: bool,
}

/// Inverts the inner layers starting from the outer input `u_L`.
pub fn extract(code: &DeepPolarCode, u_outer: &BitVector) -> Extraction {
    let layers = code.layers();
    let mut layer_bits = vec![BitVector::zeros(0); layers.len()];
    let mut valid = true;
    let mut u = u_outer.clone();
    for l in (0..layers.len()).rev() {
        let layer = &layers[l];
        layer_bits[l] = layer.info().iter().map(|&i| u.get(i - 1)).collect();
        if l < layers.len() - 1 && layer.frozen().iter().any(|&i| u.get(i - 1)) {
            valid = false;
        }
        if l > 0 {
            let v: BitVector = layer.connection().iter().map(|&i| u.get(i - 1)).collect();
            u = transpose_transform(&v).expect("power of two");
        }
    }
    let mut d_ext = BitVector::zeros(0);
    for part in &layer_bits {
        d_ext = d_ext.concat(part);
    }
    Extraction {
        d_ext,
        layer_bits,
        valid,
    }
}

/// Drops the CRC bits and reports whether they check.
pub(crate) fn strip_crc(code: &DeepPolarCode, d_ext: &BitVector) -> (BitVector, bool) {
    match code.crc() {
        Some(spec) => (d_ext.slice(0, code.k()), spec.check(d_ext)),
        None => (d_ext.clone(), true),
    }
}

/// Decoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Decoded `K`-bit message (CRC removed).
    pub message: BitVector,
    /// Decoded information bits of each layer, innermost first, CRC included.
    pub layer_bits: Vec<BitVector>,
    pub success: bool,
    pub path_metric: f64,
    pub killed_by_bpc: u64,
    pub pruned_by_metric: u64,
}

impl DecodeResult {
    pub(crate) fn from_extraction(
        code: &DeepPolarCode,
        ex: Extraction,
        success: bool,
        path_metric: f64,
    ) -> Self {
        let (message, _) = strip_crc(code, &ex.d_ext);
        Self {
            message,
            layer_bits: ex.layer_bits,
            success,
            path_metric,
            killed_by_bpc: 0,
            pruned_by_metric: 0,
        }
    }
}

/// Decoders selectable from configuration files and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    SclBpc,
    ParallelScl,
    Sc,
    Ml,
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::SclBpc => "scl-bpc",
            DecoderKind::ParallelScl => "parallel-scl",
            DecoderKind::Sc => "sc",
            DecoderKind::Ml => "ml",
        })
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "scl-bpc" | "scl" => Ok(DecoderKind::SclBpc),
            "parallel-scl" | "pscl" => Ok(DecoderKind::ParallelScl),
            "sc" => Ok(DecoderKind::Sc),
            "ml" => Ok(DecoderKind::Ml),
            other => Err(Error::Parse(format!("unknown decoder {other:?}"))),
        }
    }
}

/// Soft-input decoding with the chosen decoder. `llr` holds `ln p(y|0)/p(y|1)` per position.
pub fn decode(
    code: &DeepPolarCode,
    llr: &[f64],
    kind: DecoderKind,
    list: usize,
) -> Result<DecodeResult> {
    match kind {
        DecoderKind::SclBpc => scl_bpc_decode(code, llr, list),
        DecoderKind::ParallelScl => parallel_scl_decode(code, llr, list),
        DecoderKind::Sc => sc_decode(code, llr),
        DecoderKind::Ml => ml_decode_awgn(code, llr),
    }
}

/// Role of every outer position as seen by the list decoder.
pub(crate) fn outer_rules(code: &DeepPolarCode) -> Vec<scl::PosRule> {
    code.outer()
        .roles()
        .iter()
        .map(|r| match r {
            BitRole::Frozen => scl::PosRule::Frozen(false),
            BitRole::Info(_) => scl::PosRule::Info,
            BitRole::Connection(_) => {
                if code.num_layers() > 1 {
                    scl::PosRule::Connection
                } else {
                    scl::PosRule::Info
                }
            }
        })
        .collect()
}

pub(crate) fn check_llr(code: &DeepPolarCode, llr: &[f64]) -> Result<()> {
    if llr.len() != code.n() {
        return Err(invalid(format!(
            "received {} LLRs, code length is {}",
            llr.len(),
            code.n()
        )));
    }
    if llr.iter().any(|v| v.is_nan()) {
        return Err(invalid("LLR input contains NaN"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{build_code, unified_pretransform, pretransform_input, LayerConfig};
    use crate::reliability::ProfileSource;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example1() -> DeepPolarCode {
        build_code(
            &[LayerConfig::new(8, 4, Some(4)), LayerConfig::new(32, 7, Some(8))],
            &ProfileSource::Bec(0.5),
            None,
        )
        .unwrap()
    }

    fn example2() -> DeepPolarCode {
        build_code(
            &[LayerConfig::new(4, 3, None), LayerConfig::new(32, 12, Some(8))],
            &ProfileSource::Bec(0.5),
            None,
        )
        .unwrap()
    }

    fn random_bits(rng: &mut impl Rng, n: usize) -> BitVector {
        BitVector::from_bools((0..n).map(|_| rng.random::<bool>()))
    }

    #[test]
    fn split_roundtrip() {
        let code = example1();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let d = random_bits(&mut rng, 11);
            let parts = split_message(&d, &code).unwrap();
            assert_eq!(parts[0].len(), 4);
            assert_eq!(parts[1].len(), 7);
            assert_eq!(parts[0].concat(&parts[1]), d);
        }
        assert!(split_message(&BitVector::zeros(10), &code).is_err());
    }

    #[test]
    fn zero_message_zero_codeword() {
        let code = example1();
        assert!(encode(&code, &BitVector::zeros(11)).unwrap().is_zero());
    }

    #[test]
    fn last_index_gives_all_ones() {
        let code = example1();
        let mut d = BitVector::zeros(11);
        // index 32 is the largest of I_2, i.e. the last layer-2 bit
        d.set(10, true);
        assert_eq!(encode(&code, &d).unwrap(), BitVector::ones(32));
    }

    #[test]
    fn dense_pretransform_path_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for code in [example1(), example2()] {
            let t = unified_pretransform(&code);
            let g = Gf2Matrix::polar_kernel(code.n()).unwrap();
            let tg = t.mul(&g).unwrap();
            for _ in 0..100 {
                let d = random_bits(&mut rng, code.k());
                let w = pretransform_input(&code, &d).unwrap();
                assert_eq!(tg.left_mul(&w).unwrap(), encode(&code, &d).unwrap());
            }
        }
    }

    #[test]
    fn extraction_inverts_encoding() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let code = example2();
        for _ in 0..50 {
            let d = random_bits(&mut rng, code.k());
            let inputs = encode_layers(&code, &d).unwrap();
            let ex = extract(&code, inputs.last().unwrap());
            assert!(ex.valid);
            assert_eq!(ex.d_ext, d);
        }
    }

    #[test]
    fn generator_rows_span_code() {
        let code = example1();
        let g = generator_matrix(&code);
        assert_eq!(g.rank(), 11);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = random_bits(&mut rng, 11);
        assert_eq!(g.left_mul(&d).unwrap(), encode(&code, &d).unwrap());
    }

    #[test]
    fn crc_is_appended() {
        let code = build_code(
            &[LayerConfig::new(16, 3, None), LayerConfig::new(64, 11, Some(8))],
            &ProfileSource::nr(),
            Some(CrcSpec::CRC6),
        )
        .unwrap();
        assert_eq!(code.k(), 8);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = random_bits(&mut rng, 8);
        let inputs = encode_layers(&code, &extend_message(&code, &d).unwrap()).unwrap();
        let ex = extract(&code, inputs.last().unwrap());
        let (msg, ok) = strip_crc(&code, &ex.d_ext);
        assert!(ok);
        assert_eq!(msg, d);
    }

    #[test]
    fn decoder_kind_parse() {
        for k in [
            DecoderKind::SclBpc,
            DecoderKind::ParallelScl,
            DecoderKind::Sc,
            DecoderKind::Ml,
        ] {
            assert_eq!(k.to_string().parse::<DecoderKind>().unwrap(), k);
        }
        assert!("viterbi".parse::<DecoderKind>().is_err());
    }
}
