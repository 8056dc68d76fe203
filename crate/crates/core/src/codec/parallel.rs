//! Parallel-SCL: one list decoder per hypothesis of the inner-layer bits.

use rayon::prelude::*;

use crate::codec::bpc::BpcMode;
use crate::codec::scl::{run_scl, PosRule, SclOptions};
use crate::codec::{check_llr, encode_layers, extract, outer_rules, strip_crc, DecodeResult};
use crate::construction::DeepPolarCode;
use crate::error::{invalid, Result};
use crate::gf2::BitVector;

/// Default cap on the number of hypotheses.
pub const DEFAULT_HYPOTHESIS_BUDGET: u64 = 1 << 16;

/// Inner-layer bit pattern of hypothesis `j`; the first bit is the most significant.
fn hypothesis_bits(j: u64, m: usize) -> BitVector {
    BitVector::from_bools((0..m).map(|t| (j >> (m - 1 - t)) & 1 == 1))
}

type HypothesisScore = (f64, Option<(f64, usize)>, Vec<(BitVector, f64)>);

pub fn parallel_scl_decode(code: &DeepPolarCode, llr: &[f64], list: usize) -> Result<DecodeResult> {
    parallel_scl_decode_with(code, llr, list, DEFAULT_HYPOTHESIS_BUDGET)
}

/// Scores every hypothesis by its best final path metric and returns the
/// overall best (ties to the lower hypothesis index). With a CRC, the best
/// (hypothesis, path) pair whose CRC checks is preferred.
pub fn parallel_scl_decode_with(
    code: &DeepPolarCode,
    llr: &[f64],
    list: usize,
    budget: u64,
) -> Result<DecodeResult> {
    check_llr(code, llr)?;
    if list == 0 {
        return Err(invalid("list size must be at least 1"));
    }
    let m = code.inner_k();
    if m >= 64 || (1u64 << m) > budget {
        return Err(invalid(format!(
            "parallel-SCL needs 2^{m} hypotheses, above the budget of {budget}"
        )));
    }
    let base_rules = outer_rules(code);
    let outer = code.outer();
    let k_outer = outer.k();
    let opts = SclOptions {
        list,
        bpc: BpcMode::Off,
        min_sum: false,
        force_first_free: false,
    };

    let per_hyp: Vec<HypothesisScore> = (0..1u64 << m)
        .into_par_iter()
        .map(|j| {
            let inner = hypothesis_bits(j, m);
            let d_ext = inner.concat(&BitVector::zeros(k_outer));
            let u = encode_layers(code, &d_ext)
                .expect("valid length")
                .pop()
                .expect("non-empty");
            let mut rules = base_rules.clone();
            for &i in outer.connection() {
                rules[i - 1] = PosRule::Frozen(u.get(i - 1));
            }
            let run = run_scl(code, &rules, llr, &opts);
            let best = run.paths[0].1;
            let crc_hit = if code.crc().is_some() {
                run.paths.iter().enumerate().find_map(|(r, (p, pm))| {
                    let ex = extract(code, p);
                    strip_crc(code, &ex.d_ext).1.then_some((*pm, r))
                })
            } else {
                None
            };
            (best, crc_hit, run.paths)
        })
        .collect();

    let argmin = |key: &dyn Fn(usize) -> Option<f64>| {
        (0..per_hyp.len())
            .filter_map(|j| key(j).map(|v| (v, j)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
    };
    let crc_choice = argmin(&|j| per_hyp[j].1.map(|(pm, _)| pm))
        .map(|(_, j)| (j, per_hyp[j].1.expect("present").1));
    let (j, rank, ok) = match crc_choice {
        Some((j, r)) => (j, r, true),
        None => {
            let (_, j) = argmin(&|j| Some(per_hyp[j].0)).expect("at least one hypothesis");
            (j, 0, code.crc().is_none())
        }
    };
    let (u, pm) = &per_hyp[j].2[rank];
    let ex = extract(code, u);
    Ok(DecodeResult::from_extraction(code, ex, ok, *pm))
}

/// Number of hypotheses the decoder would run.
pub fn hypothesis_count(code: &DeepPolarCode) -> u128 {
    1u128 << code.inner_k()
}
