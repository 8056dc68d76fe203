//! Backpropagation parity checks.
//!
//! The outer decoder emits connection bits in ascending index order; they form
//! a growing prefix of the output `v_{L-1}` of the layer below. Because
//! `G^T` is an upper-triangular involution, the first `k` outputs fix the
//! first `k` inputs of that layer, whose frozen entries must be zero and whose
//! connection entries in turn extend the prefix of the next layer down.

use crate::construction::{BitRole, DeepPolarCode};
use crate::gf2::{transpose_row, transpose_transform_prefix, BitVector};

/// How the decoder evaluates parity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpcMode {
    /// Only positions that became available with the newest bit are tested.
    Incremental,
    /// Every checkpoint recomputes all prefixes from scratch.
    Full,
    /// No checks; connection bits are decoded like information bits.
    Off,
}

struct InnerTable {
    rows: Vec<BitVector>,
    roles: Vec<BitRole>,
}

/// Precomputed `G^T` rows and roles of every inner layer.
pub(crate) struct BpcTables {
    layers: Vec<InnerTable>,
}

/// Per-path running state: for each inner layer, the accumulated
/// `sum_i v_i g^T_i` and the number of outputs consumed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct BpcState {
    acc: Vec<BitVector>,
    count: Vec<usize>,
}

impl BpcTables {
    pub(crate) fn new(code: &DeepPolarCode) -> Self {
        let inner = &code.layers()[..code.num_layers() - 1];
        let layers = inner
            .iter()
            .map(|l| InnerTable {
                rows: (0..l.n()).map(|i| transpose_row(l.n(), i)).collect(),
                roles: l.roles().to_vec(),
            })
            .collect();
        Self { layers }
    }

    pub(crate) fn initial(&self) -> BpcState {
        BpcState {
            acc: self
                .layers
                .iter()
                .map(|t| BitVector::zeros(t.rows.len()))
                .collect(),
            count: vec![0; self.layers.len()],
        }
    }

    /// Feeds the next connection bit of the outer layer; `false` on a parity violation.
    pub(crate) fn push(&self, state: &mut BpcState, bit: bool) -> bool {
        let Some(mut l) = self.layers.len().checked_sub(1) else {
            return true;
        };
        let mut bit = bit;
        loop {
            let table = &self.layers[l];
            let k = state.count[l];
            if bit {
                state.acc[l].xor_assign(&table.rows[k]);
            }
            state.count[l] = k + 1;
            let recovered = state.acc[l].get(k);
            match table.roles[k] {
                BitRole::Frozen => return !recovered,
                BitRole::Info(_) => return true,
                BitRole::Connection(_) => {
                    bit = recovered;
                    l -= 1;
                }
            }
        }
    }
}

/// Checks the prefix `u_{A_L, 1:k}` of outer connection bits against every
/// inner frozen position it determines.
pub fn bpc_prefix_check(code: &DeepPolarCode, connection_prefix: &BitVector) -> bool {
    let layers = code.layers();
    if layers.len() < 2 {
        return true;
    }
    let mut prefix = connection_prefix.clone();
    for l in (0..layers.len() - 1).rev() {
        let layer = &layers[l];
        let k = prefix.len();
        if k == 0 {
            return true;
        }
        let u = transpose_transform_prefix(&prefix, layer.n()).expect("prefix fits layer");
        let mut next = BitVector::zeros(0);
        for j in 0..k {
            match layer.role(j + 1) {
                BitRole::Frozen if u.get(j) => return false,
                BitRole::Connection(_) => next.push(u.get(j)),
                _ => {}
            }
        }
        prefix = next;
    }
    true
}
