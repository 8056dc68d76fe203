//! Maximum-likelihood reference decoders.

use rayon::prelude::*;

use crate::codec::{check_llr, generator_matrix, split_message, DecodeResult};
use crate::construction::DeepPolarCode;
use crate::error::{invalid, Result};
use crate::gf2::{gf2_solve, BitVector, Gf2Matrix, SolveStatus};

/// Largest message length accepted by exhaustive enumeration.
pub const ML_MAX_K: usize = 26;

const BLOCK_BITS: usize = 12;

/// Outcome of erasure decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BecStatus {
    Unique,
    /// Several messages agree with the unerased positions.
    Ambiguous,
    /// No message agrees with the unerased positions.
    Inconsistent,
}

/// Sum of `obs[j]` over the support of `cw`.
#[inline]
pub(crate) fn support_sum(cw: &BitVector, obs: &[f64]) -> f64 {
    let mut s = 0.0;
    for (w, &word) in cw.words().iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let t = bits.trailing_zeros() as usize;
            s += obs[w * 64 + t];
            bits &= bits - 1;
        }
    }
    s
}

/// Generator-based ML decoder reusable across many received words.
pub struct MlDecoder<'a> {
    code: &'a DeepPolarCode,
    generator: Gf2Matrix,
    columns: Gf2Matrix,
}

impl<'a> MlDecoder<'a> {
    pub fn new(code: &'a DeepPolarCode) -> Self {
        let generator = generator_matrix(code);
        let columns = generator.transpose();
        Self {
            code,
            generator,
            columns,
        }
    }

    pub fn generator(&self) -> &Gf2Matrix {
        &self.generator
    }

    fn message_from_key(&self, key: u64) -> BitVector {
        let k = self.code.k();
        BitVector::from_bools((0..k).map(|p| (key >> (k - 1 - p)) & 1 == 1))
    }

    fn codeword_of_key(&self, key: u64) -> BitVector {
        let k = self.code.k();
        let mut cw = BitVector::zeros(self.code.n());
        for q in 0..k {
            if (key >> q) & 1 == 1 {
                cw.xor_assign(self.generator.row(k - 1 - q));
            }
        }
        cw
    }

    fn result(&self, message: BitVector, success: bool, metric: f64) -> DecodeResult {
        let ext = match self.code.crc() {
            Some(spec) => spec.append(&message),
            None => message.clone(),
        };
        DecodeResult {
            layer_bits: split_message(&ext, self.code).expect("valid length"),
            message,
            success,
            path_metric: metric,
            killed_by_bpc: 0,
            pruned_by_metric: 0,
        }
    }

    /// Minimum-distance decoding of BPSK observations (`y` or LLRs; any positive
    /// multiple of `y` selects the same codeword). Ties go to the
    /// lexicographically smallest message.
    pub fn decode_awgn(&self, obs: &[f64]) -> Result<DecodeResult> {
        check_llr(self.code, obs)?;
        let k = self.code.k();
        if k > ML_MAX_K {
            return Err(invalid(format!(
                "exhaustive ML needs 2^{k} codewords, above the 2^{ML_MAX_K} limit"
            )));
        }
        let total = 1u64 << k;
        let block = 1u64 << BLOCK_BITS.min(k);
        // Key bit q is message position K-1-q, so smaller keys are lexicographically smaller.
        let best = (0..total / block)
            .into_par_iter()
            .map(|b| {
                let t0 = b * block;
                let mut cw = self.codeword_of_key(t0 ^ (t0 >> 1));
                let mut best = (support_sum(&cw, obs), t0 ^ (t0 >> 1));
                for t in t0 + 1..t0 + block {
                    let q = t.trailing_zeros() as usize;
                    cw.xor_assign(self.generator.row(k - 1 - q));
                    let key = t ^ (t >> 1);
                    let m = support_sum(&cw, obs);
                    if m < best.0 || (m == best.0 && key < best.1) {
                        best = (m, key);
                    }
                }
                best
            })
            .reduce(
                || (f64::INFINITY, u64::MAX),
                |a, b| {
                    if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                        b
                    } else {
                        a
                    }
                },
            );
        Ok(self.result(self.message_from_key(best.1), true, best.0))
    }

    /// Erasure decoding; `None` marks an erased position.
    pub fn decode_bec(&self, obs: &[Option<bool>]) -> Result<(DecodeResult, BecStatus)> {
        if obs.len() != self.code.n() {
            return Err(invalid(format!(
                "received {} symbols, code length is {}",
                obs.len(),
                self.code.n()
            )));
        }
        let k = self.code.k();
        let mut rows = Vec::new();
        let mut rhs = BitVector::zeros(0);
        for (j, o) in obs.iter().enumerate() {
            if let Some(bit) = o {
                rows.push(self.columns.row(j).clone());
                rhs.push(*bit);
            }
        }
        let a = Gf2Matrix::from_rows(rows, k)?;
        Ok(match gf2_solve(&a, &rhs)? {
            SolveStatus::Unique(m) => (self.result(m, true, 0.0), BecStatus::Unique),
            SolveStatus::Multiple => (
                self.result(BitVector::zeros(k), false, 0.0),
                BecStatus::Ambiguous,
            ),
            SolveStatus::Inconsistent => (
                self.result(BitVector::zeros(k), false, 0.0),
                BecStatus::Inconsistent,
            ),
        })
    }
}

pub fn ml_decode_awgn(code: &DeepPolarCode, obs: &[f64]) -> Result<DecodeResult> {
    MlDecoder::new(code).decode_awgn(obs)
}

pub fn ml_decode_bec(code: &DeepPolarCode, obs: &[Option<bool>]) -> Result<(DecodeResult, BecStatus)> {
    MlDecoder::new(code).decode_bec(obs)
}

/// Erasure view of an LLR vector: zero is an erasure, otherwise the sign decides.
pub fn bec_observation(llr: &[f64]) -> Vec<Option<bool>> {
    llr.iter()
        .map(|&v| if v == 0.0 { None } else { Some(v < 0.0) })
        .collect()
}
