//! Weight spectra, minimum-distance estimation and the ML union approximation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::channels::{q_function, LLR_MAX};
use crate::codec::scl::{scl_paths, SclOptions};
use crate::codec::{extract, generator_matrix, strip_crc};
use crate::construction::{rm_mask, DeepPolarCode};
use crate::error::{invalid, Result};
use crate::gf2::{polar_transform, BitVector, Gf2Matrix};
use crate::reliability::ReliabilityProfile;

/// Default limit on `K` for exhaustive enumeration.
pub const DEFAULT_MAX_K: usize = 26;

const BLOCK_BITS: usize = 12;

/// Codeword count per Hamming weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightDistribution {
    k: usize,
    counts: Vec<u64>,
}

impl WeightDistribution {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn count(&self, w: usize) -> u64 {
        self.counts.get(w).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Smallest weight of a nonzero codeword.
    pub fn min_distance(&self) -> Option<usize> {
        (1..self.counts.len()).find(|&w| self.counts[w] > 0)
    }

    /// `(weight, count)` for every weight with a nonzero count.
    pub fn nonzero(&self) -> BTreeMap<usize, u64> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(w, &c)| (w, c))
            .collect()
    }

    /// CSV with header `weight,count`, nonzero entries only.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("weight,count\n");
        for (w, c) in self.nonzero() {
            writeln!(s, "{w},{c}").expect("writing to a string");
        }
        s
    }
}

/// Weight histogram of the row space of `generator` by Gray-code enumeration.
pub fn weight_distribution_of(generator: &Gf2Matrix, max_k: usize) -> Result<WeightDistribution> {
    let k = generator.nrows();
    let n = generator.ncols();
    if k > max_k || k > 62 {
        return Err(invalid(format!(
            "exhaustive enumeration of 2^{k} codewords exceeds the limit 2^{max_k}"
        )));
    }
    let total = 1u64 << k;
    let block = 1u64 << BLOCK_BITS.min(k);
    let counts = (0..total / block)
        .into_par_iter()
        .map(|b| {
            let mut counts = vec![0u64; n + 1];
            let t0 = b * block;
            let g0 = t0 ^ (t0 >> 1);
            let mut cw = BitVector::zeros(n);
            for q in 0..k {
                if (g0 >> q) & 1 == 1 {
                    cw.xor_assign(generator.row(q));
                }
            }
            counts[cw.count_ones()] += 1;
            for t in t0 + 1..t0 + block {
                cw.xor_assign(generator.row(t.trailing_zeros() as usize));
                counts[cw.count_ones()] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(WeightDistribution { k, counts })
}

/// Exact weight distribution of a code (`K <= 26`).
pub fn weight_distribution(code: &DeepPolarCode) -> Result<WeightDistribution> {
    weight_distribution_with(code, DEFAULT_MAX_K)
}

pub fn weight_distribution_with(code: &DeepPolarCode, max_k: usize) -> Result<WeightDistribution> {
    if code.k() > max_k {
        return Err(invalid(format!(
            "K = {} exceeds the enumeration limit {max_k}",
            code.k()
        )));
    }
    weight_distribution_of(&generator_matrix(code), max_k)
}

/// Upper estimate of the minimum distance: list-decodes the noiseless
/// all-zero word with list size `list`, keeping both branches at the first
/// free position, and returns the smallest weight among the nonzero valid
/// codewords left in the final list.
pub fn min_weight_scl_estimate(code: &DeepPolarCode, list: usize) -> Result<usize> {
    if list < 2 {
        return Err(invalid("the estimate needs a list size of at least 2"));
    }
    let llr = vec![LLR_MAX; code.n()];
    let mut opts = SclOptions::new(list);
    opts.force_first_free = true;
    let run = scl_paths(code, &llr, &opts);
    run.paths
        .iter()
        .filter_map(|(u, _)| {
            let ex = extract(code, u);
            if !ex.valid || !strip_crc(code, &ex.d_ext).1 {
                return None;
            }
            let w = polar_transform(u).expect("power of two").count_ones();
            (w > 0).then_some(w)
        })
        .min()
        .ok_or_else(|| invalid("no nonzero codeword survived in the list"))
}

/// `A_dmin Q(sqrt(d_min snr))` with `snr` linear.
pub fn ml_bler_approx(a_dmin: f64, d_min: usize, snr: f64) -> f64 {
    a_dmin * q_function((d_min as f64 * snr).sqrt())
}

/// Linear SNR `1 / sigma^2 = 2 R Eb/N0` used with [`ml_bler_approx`].
pub fn union_snr(ebn0_db: f64, rate: f64) -> f64 {
    2.0 * rate * 10f64.powf(ebn0_db / 10.0)
}

/// Plain polar code carrying the `k` most reliable indices of `profile`.
pub fn polar_baseline(profile: &ReliabilityProfile, k: usize) -> Result<DeepPolarCode> {
    let info = profile.ranking()[..k].to_vec();
    DeepPolarCode::plain(profile.n(), info, None)
}

/// Outcome of [`rm_type_search`].
#[derive(Debug, Clone)]
pub struct RmTypeChoice {
    pub code: DeepPolarCode,
    pub distribution: WeightDistribution,
    pub candidates: usize,
}

/// Best `k`-row subcode of the Reed-Muller-type code spanned by rows of
/// `G_N` with weight at least `d_min`: largest minimum distance, then fewest
/// minimum-weight codewords, then the lexicographically smallest index set.
pub fn rm_type_search(n: usize, d_min: usize, k: usize) -> Result<RmTypeChoice> {
    let mask = rm_mask(n, d_min);
    if k == 0 || k > mask.len() {
        return Err(invalid(format!(
            "cannot pick {k} rows out of {} admissible ones",
            mask.len()
        )));
    }
    let subsets = combinations(mask.len(), k);
    let scored: Vec<(usize, u64, Vec<usize>, WeightDistribution)> = subsets
        .par_iter()
        .map(|sel| {
            let info: Vec<usize> = sel.iter().map(|&j| mask[j]).collect();
            let rows = info
                .iter()
                .map(|&i| polar_transform(&BitVector::unit(n, i - 1)).expect("power of two"))
                .collect();
            let g = Gf2Matrix::from_rows(rows, n).expect("rows of length N");
            let wd = weight_distribution_of(&g, 62).expect("small k");
            let d = wd.min_distance().unwrap_or(0);
            (d, wd.count(d), info, wd)
        })
        .collect();
    let best = scored
        .into_iter()
        .min_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)))
        .expect("at least one subset");
    Ok(RmTypeChoice {
        code: DeepPolarCode::plain(n, best.2, None)?,
        distribution: best.3,
        candidates: subsets.len(),
    })
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=m - (k - cur.len()) {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode;
    use crate::construction::{build_code, LayerConfig};
    use crate::reliability::{bec_profile, ProfileSource};
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

    #[test]
    fn example_one_spectrum() {
        let wd = weight_distribution(&example1()).unwrap();
        assert_eq!(wd.total(), 2048);
        assert_eq!(wd.count(0), 1);
        assert_eq!(wd.count(8), 20);
        assert_eq!(wd.count(12), 416);
        assert_eq!(wd.count(16), 1174);
        assert_eq!(wd.min_distance(), Some(8));
        for w in 0..=32 {
            assert_eq!(wd.count(w), wd.count(32 - w));
        }
    }

    #[test]
    fn polar_spectrum() {
        let code = polar_baseline(&bec_profile(32, 0.5).unwrap(), 11).unwrap();
        let wd = weight_distribution(&code).unwrap();
        assert_eq!((wd.count(8), wd.count(12), wd.count(16)), (76, 192, 1510));
    }

    #[test]
    fn gray_matches_naive_sample() {
        let code = example1();
        let g = generator_matrix(&code);
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..1000 {
            let d = BitVector::from_bools((0..11).map(|_| rng.random::<bool>()));
            assert_eq!(g.left_mul(&d).unwrap(), encode(&code, &d).unwrap());
        }
    }

    #[test]
    fn scl_estimate_matches_exhaustive() {
        assert_eq!(min_weight_scl_estimate(&example1(), 2048).unwrap(), 8);
    }

    #[test]
    fn rate_zero_code_estimate() {
        let code = DeepPolarCode::plain(16, vec![16], None).unwrap();
        assert_eq!(min_weight_scl_estimate(&code, 4).unwrap(), 16);
    }

    #[test]
    fn approximation_basics() {
        assert_eq!(ml_bler_approx(1.0, 8, 0.0), 0.5);
        assert!(ml_bler_approx(20.0, 8, 1.0) > ml_bler_approx(20.0, 8, 2.0));
    }

    #[test]
    fn guard() {
        let code = DeepPolarCode::plain(32, (5..=32).collect(), None).unwrap();
        assert!(weight_distribution_with(&code, 20).is_err());
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(16, 15).len(), 16);
        assert_eq!(combinations(5, 2).len(), 10);
    }
}
