//! Recursive successive cancellation decoding with backpropagation parity checks.

use crate::codec::bpc::{BpcState, BpcTables};
use crate::codec::scl::{clamp_llr, f_exact, g_update, metric_increment, PosRule};
use crate::codec::{check_llr, extract, outer_rules, strip_crc, DecodeResult};
use crate::construction::DeepPolarCode;
use crate::error::Result;
use crate::gf2::BitVector;

struct ScState {
    rules: Vec<PosRule>,
    tables: Option<BpcTables>,
    bpc: Option<BpcState>,
    u: BitVector,
    pm: f64,
    killed: u64,
    all_killed: bool,
}

impl ScState {
    fn leaf(&mut self, i: usize, eta: f64) -> u8 {
        let bit = match self.rules[i] {
            PosRule::Frozen(v) => v,
            rule => {
                let m0 = self.pm + metric_increment(eta, false);
                let m1 = self.pm + metric_increment(eta, true);
                let preferred = m1 < m0;
                let mut chosen = preferred;
                if rule == PosRule::Connection && !self.all_killed {
                    if let (Some(t), Some(st)) = (&self.tables, &self.bpc) {
                        let mut first = st.clone();
                        if t.push(&mut first, preferred) {
                            let mut other = st.clone();
                            if !t.push(&mut other, !preferred) {
                                self.killed += 1;
                            }
                            self.bpc = Some(first);
                        } else {
                            self.killed += 1;
                            let mut other = st.clone();
                            if t.push(&mut other, !preferred) {
                                chosen = !preferred;
                                self.bpc = Some(other);
                            } else {
                                self.killed += 1;
                                self.all_killed = true;
                            }
                        }
                    }
                }
                chosen
            }
        };
        self.pm += metric_increment(eta, bit);
        self.u.set(i, bit);
        bit as u8
    }

    /// Decodes the subtree whose first leaf is `i0`; returns its codeword.
    fn decode(&mut self, llr: &[f64], i0: usize) -> Vec<u8> {
        let m = llr.len();
        if m == 1 {
            return vec![self.leaf(i0, llr[0])];
        }
        let half = m / 2;
        let left_llr: Vec<f64> = (0..half).map(|j| f_exact(llr[j], llr[j + half])).collect();
        let a = self.decode(&left_llr, i0);
        let right_llr: Vec<f64> = (0..half)
            .map(|j| g_update(llr[j], llr[j + half], a[j]))
            .collect();
        let b = self.decode(&right_llr, i0 + half);
        let mut out: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        out.extend_from_slice(&b);
        out
    }
}

/// Successive cancellation decoding. At a connection position the preferred
/// bit is replaced by its complement when only the complement passes the parity checks.
pub fn sc_decode(code: &DeepPolarCode, llr: &[f64]) -> Result<DecodeResult> {
    check_llr(code, llr)?;
    let rules = outer_rules(code);
    let has_conn = rules.contains(&PosRule::Connection);
    let tables = has_conn.then(|| BpcTables::new(code));
    let bpc = tables.as_ref().map(BpcTables::initial);
    let mut st = ScState {
        rules,
        tables,
        bpc,
        u: BitVector::zeros(code.n()),
        pm: 0.0,
        killed: 0,
        all_killed: false,
    };
    st.decode(&clamp_llr(llr), 0);
    let ex = extract(code, &st.u);
    let crc_ok = strip_crc(code, &ex.d_ext).1;
    let mut res = DecodeResult::from_extraction(code, ex, crc_ok && !st.all_killed, st.pm);
    res.killed_by_bpc = st.killed;
    Ok(res)
}
