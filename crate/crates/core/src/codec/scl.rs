//! Successive cancellation list decoding with backpropagation parity checks.
//!
//! Tree layout for `G_N` in natural order: a node of length `M` splits its
//! codeword into `(a ^ b, b)`, where `a` and `b` are the codewords of the left
//! and right children. Left LLRs use `f`, right LLRs use `g` with the left
//! partial sums. Depth `d >= 1` buffers of length `N / 2^d` live at offset
//! `N - N / 2^(d-1)`, so every path owns `N - 1` LLRs and `N - 1` partial sums.

use crate::codec::bpc::{bpc_prefix_check, BpcMode, BpcState, BpcTables};
use crate::codec::{check_llr, extract, outer_rules, strip_crc, DecodeResult};
use crate::construction::DeepPolarCode;
use crate::error::{invalid, Result};
use crate::gf2::BitVector;

/// Largest channel LLR magnitude accepted by the decoders.
pub const LLR_MAX: f64 = 60.0;

/// Decoding rule of one outer position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PosRule {
    Frozen(bool),
    Info,
    Connection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SclOptions {
    pub list: usize,
    pub bpc: BpcMode,
    /// Replaces the exact check-node update with min-sum.
    pub min_sum: bool,
    /// Keeps both children at the first non-frozen position regardless of `list`.
    pub force_first_free: bool,
}

impl SclOptions {
    pub fn new(list: usize) -> Self {
        Self {
            list,
            bpc: BpcMode::Incremental,
            min_sum: false,
            force_first_free: false,
        }
    }
}

#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Exact check-node update `2 atanh(tanh(a/2) tanh(b/2))`.
#[inline]
pub(crate) fn f_exact(a: f64, b: f64) -> f64 {
    let s = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    s * a.abs().min(b.abs()) + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

#[inline]
pub(crate) fn f_min_sum(a: f64, b: f64) -> f64 {
    let s = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    s * a.abs().min(b.abs())
}

#[inline]
pub(crate) fn g_update(a: f64, b: f64, left_bit: u8) -> f64 {
    if left_bit == 0 {
        b + a
    } else {
        b - a
    }
}

/// Penalty for deciding `bit` against leaf LLR `eta`.
#[inline]
pub(crate) fn metric_increment(eta: f64, bit: bool) -> f64 {
    if bit {
        softplus(eta)
    } else {
        softplus(-eta)
    }
}

pub(crate) fn clamp_llr(llr: &[f64]) -> Vec<f64> {
    llr.iter().map(|v| v.clamp(-LLR_MAX, LLR_MAX)).collect()
}

#[inline]
fn offset(n: usize, d: usize) -> usize {
    n - (n >> (d - 1))
}

#[derive(Clone)]
struct Path {
    alpha: Vec<f64>,
    beta: Vec<u8>,
    u: BitVector,
    pm: f64,
    bpc: Option<BpcState>,
    /// Outer connection bits decided so far, used by the full-recompute mode.
    conn: BitVector,
}

impl Path {
    /// Leaf LLR for position `i`.
    fn descend(&mut self, i: usize, n: usize, log_n: usize, channel: &[f64], min_sum: bool) -> f64 {
        let start = if i == 0 {
            1
        } else {
            log_n - i.trailing_zeros() as usize
        };
        for d in start..=log_n {
            let half = n >> d;
            let out = offset(n, d);
            let right = (i >> (log_n - d)) & 1 == 1;
            let (lo, hi) = self.alpha.split_at_mut(out);
            let parent: &[f64] = if d == 1 {
                channel
            } else {
                &lo[offset(n, d - 1)..offset(n, d - 1) + 2 * half]
            };
            let dst = &mut hi[..half];
            if right {
                let beta = &self.beta[out..out + half];
                for j in 0..half {
                    dst[j] = g_update(parent[j], parent[j + half], beta[j]);
                }
            } else if min_sum {
                for j in 0..half {
                    dst[j] = f_min_sum(parent[j], parent[j + half]);
                }
            } else {
                for j in 0..half {
                    dst[j] = f_exact(parent[j], parent[j + half]);
                }
            }
        }
        if log_n == 0 {
            channel[0]
        } else {
            self.alpha[n - 2]
        }
    }

    /// Stores bit `bit` at position `i` and propagates partial sums upward.
    fn commit(&mut self, i: usize, bit: bool, n: usize, log_n: usize, scratch: &mut Vec<u8>) {
        self.u.set(i, bit);
        scratch.clear();
        scratch.push(bit as u8);
        let mut d = log_n;
        while d >= 1 {
            let len = n >> d;
            let off = offset(n, d);
            if (i >> (log_n - d)) & 1 == 0 {
                self.beta[off..off + len].copy_from_slice(scratch);
                return;
            }
            let left = &self.beta[off..off + len];
            let mut parent = Vec::with_capacity(2 * len);
            parent.extend(left.iter().zip(scratch.iter()).map(|(a, b)| a ^ b));
            parent.extend_from_slice(scratch);
            *scratch = parent;
            d -= 1;
        }
    }
}

/// Result of one list decoding pass.
pub(crate) struct SclRun {
    /// Final outer input vectors with metrics, best first.
    pub paths: Vec<(BitVector, f64)>,
    pub killed: u64,
    pub pruned: u64,
    pub all_killed: bool,
}

struct Candidate {
    metric: f64,
    index: usize,
    bpc: Option<BpcState>,
}

/// Survivors after one non-frozen position: decided prefixes with metrics.
pub type SurvivorStep = Vec<(BitVector, f64)>;

pub(crate) fn run_scl(
    code: &DeepPolarCode,
    rules: &[PosRule],
    llr: &[f64],
    opts: &SclOptions,
) -> SclRun {
    run_scl_traced(code, rules, llr, opts, None)
}

fn run_scl_traced(
    code: &DeepPolarCode,
    rules: &[PosRule],
    llr: &[f64],
    opts: &SclOptions,
    mut trace: Option<&mut Vec<SurvivorStep>>,
) -> SclRun {
    let n = rules.len();
    let log_n = n.trailing_zeros() as usize;
    let channel = clamp_llr(llr);
    let mut bpc_mode = opts.bpc;
    let has_conn = rules.contains(&PosRule::Connection);
    if !has_conn {
        bpc_mode = BpcMode::Off;
    }
    let tables = (bpc_mode == BpcMode::Incremental).then(|| BpcTables::new(code));
    let list = opts.list.max(1);

    let mut paths = vec![Path {
        alpha: vec![0.0; n.saturating_sub(1)],
        beta: vec![0; n.saturating_sub(1)],
        u: BitVector::zeros(n),
        pm: 0.0,
        bpc: tables.as_ref().map(BpcTables::initial),
        conn: BitVector::zeros(0),
    }];
    let mut scratch = Vec::with_capacity(n);
    let mut killed = 0u64;
    let mut pruned = 0u64;
    let mut all_killed = false;
    let mut first_free_seen = false;

    for (i, rule) in rules.iter().enumerate() {
        let etas: Vec<f64> = paths
            .iter_mut()
            .map(|p| p.descend(i, n, log_n, &channel, opts.min_sum))
            .collect();
        if let PosRule::Frozen(v) = *rule {
            for (p, &eta) in paths.iter_mut().zip(&etas) {
                p.pm += metric_increment(eta, v);
                p.commit(i, v, n, log_n, &mut scratch);
            }
            continue;
        }

        let is_conn = *rule == PosRule::Connection;
        let check = is_conn && bpc_mode != BpcMode::Off;
        let mut cands: Vec<Candidate> = Vec::with_capacity(2 * paths.len());
        let mut dead: Vec<Candidate> = Vec::new();
        for (s, (p, &eta)) in paths.iter().zip(&etas).enumerate() {
            for bit in [false, true] {
                let metric = p.pm + metric_increment(eta, bit);
                let index = 2 * s + bit as usize;
                let (alive, state) = if !check {
                    (true, None)
                } else if bpc_mode == BpcMode::Incremental {
                    let t = tables.as_ref().expect("tables exist in incremental mode");
                    let mut st = p.bpc.clone().expect("state exists in incremental mode");
                    let ok = t.push(&mut st, bit);
                    (ok, Some(st))
                } else {
                    let mut prefix = p.conn.clone();
                    prefix.push(bit);
                    (bpc_prefix_check(code, &prefix), None)
                };
                let c = Candidate {
                    metric,
                    index,
                    bpc: state,
                };
                if alive {
                    cands.push(c);
                } else {
                    dead.push(c);
                }
            }
        }
        killed += dead.len() as u64;
        if cands.is_empty() {
            // Every extension violates a parity check: continue without checks.
            all_killed = true;
            bpc_mode = BpcMode::Off;
            cands = dead;
        }

        let keep_all = opts.force_first_free && !first_free_seen;
        first_free_seen = true;
        let limit = if keep_all { cands.len() } else { list };
        if cands.len() > limit {
            cands.sort_by(|a, b| a.metric.total_cmp(&b.metric).then(a.index.cmp(&b.index)));
            pruned += (cands.len() - limit) as u64;
            cands.truncate(limit);
        }
        cands.sort_by_key(|c| c.index);

        let mut old: Vec<Option<Path>> = paths.into_iter().map(Some).collect();
        let mut next = Vec::with_capacity(cands.len());
        for (pos, c) in cands.iter().enumerate() {
            let s = c.index / 2;
            let sibling_follows = cands.get(pos + 1).is_some_and(|o| o.index / 2 == s);
            let mut p = if sibling_follows {
                old[s].as_ref().expect("parent present").clone()
            } else {
                old[s].take().expect("parent present")
            };
            let bit = c.index % 2 == 1;
            p.pm = c.metric;
            if is_conn {
                if let Some(st) = &c.bpc {
                    p.bpc = Some(st.clone());
                }
                p.conn.push(bit);
            }
            p.commit(i, bit, n, log_n, &mut scratch);
            next.push(p);
        }
        paths = next;
        if let Some(t) = trace.as_deref_mut() {
            t.push(paths.iter().map(|p| (p.u.slice(0, i + 1), p.pm)).collect());
        }
    }

    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by(|&a, &b| paths[a].pm.total_cmp(&paths[b].pm).then(a.cmp(&b)));
    SclRun {
        paths: order
            .into_iter()
            .map(|s| (paths[s].u.clone(), paths[s].pm))
            .collect(),
        killed,
        pruned,
        all_killed,
    }
}

/// Picks the best path, preferring the best one whose CRC checks.
pub(crate) fn select(code: &DeepPolarCode, run: &SclRun) -> DecodeResult {
    let mut chosen = None;
    if code.crc().is_some() {
        for (u, pm) in &run.paths {
            let ex = extract(code, u);
            if strip_crc(code, &ex.d_ext).1 {
                chosen = Some((ex, *pm, true));
                break;
            }
        }
    }
    let (ex, pm, crc_ok) = chosen.unwrap_or_else(|| {
        let (u, pm) = &run.paths[0];
        let ex = extract(code, u);
        let ok = strip_crc(code, &ex.d_ext).1;
        (ex, *pm, ok)
    });
    let mut res = DecodeResult::from_extraction(code, ex, crc_ok && !run.all_killed, pm);
    res.killed_by_bpc = run.killed;
    res.pruned_by_metric = run.pruned;
    res
}

/// SCL-BPC with list size `list` and default options.
pub fn scl_bpc_decode(code: &DeepPolarCode, llr: &[f64], list: usize) -> Result<DecodeResult> {
    scl_bpc_decode_with(code, llr, &SclOptions::new(list))
}

pub fn scl_bpc_decode_with(
    code: &DeepPolarCode,
    llr: &[f64],
    opts: &SclOptions,
) -> Result<DecodeResult> {
    check_llr(code, llr)?;
    if opts.list == 0 {
        return Err(invalid("list size must be at least 1"));
    }
    let run = run_scl(code, &outer_rules(code), llr, opts);
    Ok(select(code, &run))
}

/// Survivor lists after every non-frozen outer position, in list order.
pub fn scl_survivor_trace(
    code: &DeepPolarCode,
    llr: &[f64],
    opts: &SclOptions,
) -> Result<Vec<SurvivorStep>> {
    check_llr(code, llr)?;
    if opts.list == 0 {
        return Err(invalid("list size must be at least 1"));
    }
    let mut trace = Vec::new();
    run_scl_traced(code, &outer_rules(code), llr, opts, Some(&mut trace));
    Ok(trace)
}

/// Final list of outer input vectors for caller-defined selection.
pub(crate) fn scl_paths(code: &DeepPolarCode, llr: &[f64], opts: &SclOptions) -> SclRun {
    run_scl(code, &outer_rules(code), llr, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{encode, CrcSpec};
    use crate::construction::{build_code, LayerConfig};
    use crate::reliability::ProfileSource;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noiseless(x: &BitVector) -> Vec<f64> {
        x.iter().map(|b| if b { -LLR_MAX } else { LLR_MAX }).collect()
    }

    fn three_layer() -> DeepPolarCode {
        build_code(
            &[
                LayerConfig::new(4, 2, None),
                LayerConfig::new(16, 6, None),
                LayerConfig::new(64, 20, Some(8)),
            ],
            &ProfileSource::Bec(0.4),
            None,
        )
        .unwrap()
    }

    #[test]
    fn f_matches_tanh_rule() {
        for &(a, b) in &[(0.3, -1.2), (5.0, 7.0), (-2.0, -0.1), (12.0, -15.0), (0.0, 3.0)] {
            let exact = 2.0 * ((a / 2.0f64).tanh() * (b / 2.0f64).tanh()).atanh();
            if exact.is_finite() {
                assert!((f_exact(a, b) - exact).abs() < 1e-9, "{a} {b}");
            }
        }
        let reference = -30.0 + (-15f64).exp().ln_1p() - (-75f64).exp().ln_1p();
        assert!((f_exact(30.0, -45.0) - reference).abs() < 1e-12);
        assert_eq!(g_update(1.0, 2.0, 0), 3.0);
        assert_eq!(g_update(1.0, 2.0, 1), 1.0);
    }

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(-1000.0), 0.0);
        assert_eq!(softplus(1000.0), 1000.0);
    }

    #[test]
    fn noiseless_roundtrip_and_zero_metric() {
        let code = three_layer();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for list in [1, 4, 8] {
            for _ in 0..20 {
                let d = BitVector::from_bools((0..code.k()).map(|_| rng.random::<bool>()));
                let x = encode(&code, &d).unwrap();
                let res = scl_bpc_decode(&code, &noiseless(&x), list).unwrap();
                assert!(res.success);
                assert_eq!(res.message, d);
                assert!(res.path_metric < 1e-20);
            }
        }
    }

    #[test]
    fn full_and_incremental_modes_agree() {
        let code = three_layer();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..100 {
            let d = BitVector::from_bools((0..code.k()).map(|_| rng.random::<bool>()));
            let x = encode(&code, &d).unwrap();
            let llr: Vec<f64> = x
                .iter()
                .map(|b| (if b { -1.0 } else { 1.0 }) * 2.0 + 2.5 * (rng.random::<f64>() - 0.5) * 2.0)
                .collect();
            let mut a = SclOptions::new(4);
            let mut b = SclOptions::new(4);
            a.bpc = BpcMode::Incremental;
            b.bpc = BpcMode::Full;
            let ra = scl_bpc_decode_with(&code, &llr, &a).unwrap();
            let rb = scl_bpc_decode_with(&code, &llr, &b).unwrap();
            assert_eq!(ra, rb);
        }
    }

    #[test]
    fn crc_selection_recovers_message() {
        let code = build_code(
            &[LayerConfig::new(16, 3, None), LayerConfig::new(64, 11, Some(8))],
            &ProfileSource::nr(),
            Some(CrcSpec::CRC6),
        )
        .unwrap();
        let d = BitVector::from_bits(&[1, 0, 1, 1, 0, 0, 1, 0]);
        let x = encode(&code, &d).unwrap();
        let res = scl_bpc_decode(&code, &noiseless(&x), 8).unwrap();
        assert!(res.success);
        assert_eq!(res.message, d);
    }

    #[test]
    fn rejects_bad_input() {
        let code = three_layer();
        assert!(scl_bpc_decode(&code, &[0.0; 10], 4).is_err());
        assert!(scl_bpc_decode(&code, &[0.0; 64], 0).is_err());
    }

    #[test]
    fn pruning_is_reported() {
        let code = three_layer();
        let res = scl_bpc_decode(&code, &vec![0.1; 64], 2).unwrap();
        assert!(res.pruned_by_metric > 0);
    }
}
