//! Bit-channel reliability profiles.
//!
//! Three sources are supported: the exact Bhattacharyya evolution on the
//! BEC, Gaussian-approximation density evolution for the BI-AWGN channel,
//! and externally supplied rank orders such as the 5G NR sequence.
//!
//! Index `i` (1-based) is split MSB first: the most significant bit of
//! `i - 1` selects the first (outermost) channel transform, matching the
//! natural-order `G_N` used throughout the crate.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// 5G NR polar reliability sequence for N = 1024, most reliable first, 1-based.
const NR_SEQUENCE_1024: &str = include_str!("../assets/nr_reliability_1024.txt");

/// Below this mean the exponential fit of `phi` is used, above it the asymptotic form.
pub const PHI_CROSSOVER: f64 = 10.0;

/// Below this mean `ln phi` is interpolated linearly to zero at `m = 0`,
/// where the exponential fit would exceed one.
pub const PHI_LOW: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    BecCapacity,
    DegaMeanLlr,
    RankOrder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelParams {
    Erasure(f64),
    DesignSnr { ebn0_db: f64, sigma2: f64 },
    None,
}

/// Per-index reliability values for one blocklength; larger is more reliable.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityProfile {
    values: Vec<f64>,
    /// Monotone transform of `values` used for ranking when the values underflow.
    log_values: Option<Vec<f64>>,
    kind: ProfileKind,
    params: ChannelParams,
}

impl ReliabilityProfile {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn params(&self) -> ChannelParams {
        self.params
    }

    /// Value of 1-based index `i`.
    pub fn value(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    /// Natural logarithms of the mean LLRs of a DEGA profile; finite even where
    /// the values themselves underflow to zero.
    pub fn log_values(&self) -> Option<&[f64]> {
        self.log_values.as_deref()
    }

    fn key(&self, i: usize) -> f64 {
        match &self.log_values {
            Some(l) => l[i - 1],
            None => self.values[i - 1],
        }
    }

    /// 1-based indices from most to least reliable. Equal values put the
    /// larger index first.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (1..=self.n()).collect();
        idx.sort_by(|&a, &b| self.key(b).total_cmp(&self.key(a)).then_with(|| b.cmp(&a)));
        idx
    }

    /// Profile with index `i` carrying the value of index `N + 1 - i`.
    pub fn mirrored(&self) -> ReliabilityProfile {
        let mut values = self.values.clone();
        values.reverse();
        let log_values = self.log_values.clone().map(|mut l| {
            l.reverse();
            l
        });
        ReliabilityProfile {
            values,
            log_values,
            kind: self.kind,
            params: self.params,
        }
    }
}

fn check_pow2(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(invalid(format!("blocklength {n} is not a power of two")));
    }
    Ok(())
}

/// Exact synthetic-channel capacities `I(W_N^(i)) = 1 - Z` on a BEC with erasure probability `eps`.
pub fn bec_profile(n: usize, eps: f64) -> Result<ReliabilityProfile> {
    check_pow2(n)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(invalid(format!("erasure probability {eps} outside [0, 1]")));
    }
    let mut z = vec![eps];
    while z.len() < n {
        z = z
            .iter()
            .flat_map(|&x| [2.0 * x - x * x, x * x])
            .collect();
    }
    Ok(ReliabilityProfile {
        values: z.into_iter().map(|x| 1.0 - x).collect(),
        log_values: None,
        kind: ProfileKind::BecCapacity,
        params: ChannelParams::Erasure(eps),
    })
}

/// Noise variance of unit-energy BPSK at the given Eb/N0 (dB) and code rate.
pub fn ebn0_to_sigma2(ebn0_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))
}

fn ln_phi_fit(m: f64) -> f64 {
    -0.4527 * m.powf(0.86) + 0.0218
}

/// Slope of the linear piece of `ln phi` on `[0, PHI_LOW]`.
fn low_slope() -> f64 {
    ln_phi_fit(PHI_LOW) / PHI_LOW
}

/// `ln phi(m)` with the two-regime approximation of Chung et al. and a
/// linear piece near zero.
pub fn ln_phi(m: f64) -> f64 {
    if m <= 0.0 {
        0.0
    } else if m < PHI_LOW {
        low_slope() * m
    } else if m < PHI_CROSSOVER {
        ln_phi_fit(m)
    } else {
        0.5 * (std::f64::consts::PI / m).ln() - m / 4.0 + (1.0 - 10.0 / (7.0 * m)).ln()
    }
}

/// Solves `ln phi(m) = target`.
fn inv_ln_phi(target: f64) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    if target > ln_phi_fit(PHI_LOW) {
        return target / low_slope();
    }
    let mut lo = PHI_LOW;
    let mut hi = 1.0;
    while ln_phi(hi) > target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `ln(1 - (1 - phi)^2)` from `ln phi`, accurate when `phi` is close to one.
fn check_target(lp: f64) -> f64 {
    let e = -lp.exp_m1();
    if lp > -1.0 {
        (-e * e).ln_1p()
    } else {
        lp + e.ln_1p()
    }
}

/// Mean LLR after the check-node combination of two independent copies.
pub fn dega_minus(m: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    inv_ln_phi(check_target(ln_phi(m)))
}

/// [`dega_minus`] on logarithms, valid far below the `f64` range of `m`.
fn dega_minus_ln(lm: f64) -> f64 {
    let slope = low_slope();
    if lm >= PHI_LOW.ln() {
        return dega_minus(lm.exp()).ln();
    }
    // linear piece: m- = ln(1 - e^2) / slope with e = 1 - exp(slope m)
    let neg_t_ln = if lm > -150.0 {
        let e = -(slope * lm.exp()).exp_m1();
        (-(-e * e).ln_1p()).ln()
    } else {
        2.0 * ((-slope).ln() + lm)
    };
    neg_t_ln - (-slope).ln()
}

/// Mean LLRs of every bit-channel under the Gaussian approximation for
/// BI-AWGN with unit-energy BPSK at design Eb/N0 `design_snr_db` and code rate `rate`.
pub fn dega_profile(n: usize, design_snr_db: f64, rate: f64) -> Result<ReliabilityProfile> {
    check_pow2(n)?;
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(invalid(format!("rate {rate} outside (0, 1]")));
    }
    if !design_snr_db.is_finite() {
        return Err(invalid("design SNR must be finite"));
    }
    let sigma2 = ebn0_to_sigma2(design_snr_db, rate);
    Ok(dega_profile_sigma2(n, sigma2, design_snr_db))
}

pub(crate) fn dega_profile_sigma2(n: usize, sigma2: f64, ebn0_db: f64) -> ReliabilityProfile {
    let mut lm = vec![(2.0 / sigma2).ln()];
    while lm.len() < n {
        lm = lm
            .iter()
            .flat_map(|&x| [dega_minus_ln(x), x + std::f64::consts::LN_2])
            .collect();
    }
    ReliabilityProfile {
        values: lm.iter().map(|x| x.exp()).collect(),
        log_values: Some(lm),
        kind: ProfileKind::DegaMeanLlr,
        params: ChannelParams::DesignSnr { ebn0_db, sigma2 },
    }
}

fn check_permutation(ordering: &[usize]) -> Result<()> {
    let n = ordering.len();
    let mut seen = vec![false; n];
    for &i in ordering {
        if i == 0 || i > n || std::mem::replace(&mut seen[i - 1], true) {
            return Err(invalid(format!(
                "ordering is not a permutation of 1..={n} (offending entry {i})"
            )));
        }
    }
    Ok(())
}

/// Rank-order profile from a sequence listed in increasing reliability:
/// the index at 1-based position `p` gets value `p`.
pub fn sequence_profile(ordering: &[usize]) -> Result<ReliabilityProfile> {
    check_pow2(ordering.len())?;
    check_permutation(ordering)?;
    let mut values = vec![0.0; ordering.len()];
    for (pos, &i) in ordering.iter().enumerate() {
        values[i - 1] = (pos + 1) as f64;
    }
    Ok(ReliabilityProfile {
        values,
        log_values: None,
        kind: ProfileKind::RankOrder,
        params: ChannelParams::None,
    })
}

/// Rank-order profile from a most-reliable-first sequence (the file convention).
pub fn sequence_profile_most_reliable_first(seq: &[usize]) -> Result<ReliabilityProfile> {
    let ascending: Vec<usize> = seq.iter().rev().copied().collect();
    sequence_profile(&ascending)
}

/// Keeps the entries `<= n` in order; a nested sequence stays valid for `n`.
pub fn restrict_sequence(seq: &[usize], n: usize) -> Vec<usize> {
    seq.iter().copied().filter(|&i| i <= n).collect()
}

/// Parses whitespace-separated 1-based indices, most reliable first.
pub fn parse_sequence(text: &str) -> Result<Vec<usize>> {
    let seq = text
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad index {t:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    check_permutation(&seq)?;
    Ok(seq)
}

pub fn load_sequence(path: &Path) -> Result<Vec<usize>> {
    parse_sequence(&std::fs::read_to_string(path)?)
}

/// The bundled 5G NR sequence (N = 1024, most reliable first).
pub fn nr_sequence() -> Vec<usize> {
    parse_sequence(NR_SEQUENCE_1024).expect("bundled sequence is a permutation")
}

/// The 5G NR sequence restricted to blocklength `n`, most reliable first.
pub fn nr_sequence_for(n: usize) -> Result<Vec<usize>> {
    if n > 1024 {
        return Err(invalid(format!("5G sequence covers N <= 1024, got {n}")));
    }
    Ok(restrict_sequence(&nr_sequence(), n))
}

/// Where a code's reliability values come from. Textual form:
/// `bec:EPS`, `dega:SNR_DB`, `seq:PATH`, or `seq:5g` for the bundled sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSource {
    Bec(f64),
    Dega(f64),
    /// Most reliable first, 1-based.
    Sequence {
        origin: String,
        seq: Vec<usize>,
    },
}

impl ProfileSource {
    pub fn nr() -> Self {
        ProfileSource::Sequence {
            origin: "5g".into(),
            seq: nr_sequence(),
        }
    }

    /// Parses the textual form; relative sequence paths resolve against `base_dir` first.
    pub fn parse_with_base(s: &str, base_dir: Option<&Path>) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("profile {s:?} must look like kind:value")))?;
        let num = |a: &str| {
            a.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad profile parameter {a:?}: {e}")))
        };
        match kind.trim() {
            "bec" => {
                let eps = num(arg)?;
                if !(0.0..=1.0).contains(&eps) {
                    return Err(invalid(format!("erasure probability {eps} outside [0, 1]")));
                }
                Ok(ProfileSource::Bec(eps))
            }
            "dega" => Ok(ProfileSource::Dega(num(arg)?)),
            "seq" => {
                let arg = arg.trim();
                if arg.eq_ignore_ascii_case("5g") || arg.eq_ignore_ascii_case("nr") {
                    return Ok(Self::nr());
                }
                let mut path = PathBuf::from(arg);
                if path.is_relative() {
                    if let Some(base) = base_dir {
                        let candidate = base.join(&path);
                        if candidate.exists() {
                            path = candidate;
                        }
                    }
                }
                Ok(ProfileSource::Sequence {
                    origin: arg.to_string(),
                    seq: load_sequence(&path)?,
                })
            }
            other => Err(Error::Parse(format!("unknown profile kind {other:?}"))),
        }
    }

    /// Profile for blocklength `n`. `rate` converts the DEGA design Eb/N0 to a noise variance.
    pub fn profile(&self, n: usize, rate: f64) -> Result<ReliabilityProfile> {
        match self {
            ProfileSource::Bec(eps) => bec_profile(n, *eps),
            ProfileSource::Dega(snr) => dega_profile(n, *snr, rate),
            ProfileSource::Sequence { seq, .. } => {
                if n > seq.len() {
                    return Err(invalid(format!(
                        "sequence of length {} cannot cover N = {n}",
                        seq.len()
                    )));
                }
                sequence_profile_most_reliable_first(&restrict_sequence(seq, n))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ProfileSource::Bec(eps) => format!("bec:{eps}"),
            ProfileSource::Dega(snr) => format!("dega:{snr}"),
            ProfileSource::Sequence { origin, .. } => format!("seq:{origin}"),
        }
    }
}

impl FromStr for ProfileSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_base(s, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bec_small_cases() {
        assert_eq!(bec_profile(1, 0.5).unwrap().values(), &[0.5]);
        assert_eq!(bec_profile(2, 0.5).unwrap().values(), &[0.25, 0.75]);
        let p = bec_profile(32, 0.5).unwrap();
        assert!(p.value(25) > p.value(12));
        assert!(bec_profile(8, 1.5).is_err());
        assert!(bec_profile(6, 0.5).is_err());
    }

    #[test]
    fn bec_conservation() {
        for n in [1, 2, 4, 64, 1024] {
            for eps in [0.0, 0.1, 0.5, 0.77, 1.0] {
                let p = bec_profile(n, eps).unwrap();
                let s: f64 = p.values().iter().sum();
                assert!((s - n as f64 * (1.0 - eps)).abs() < 1e-12 * n as f64, "{n} {eps}");
                assert!(p.values().iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }

    #[test]
    fn bec_polarization_monotone() {
        let mut prev: Option<(f64, f64)> = None;
        for n in [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024] {
            let p = bec_profile(n, 0.3).unwrap();
            let lo = p.values().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = p.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if let Some((plo, phi)) = prev {
                assert!(lo <= plo && hi >= phi);
            }
            prev = Some((lo, hi));
        }
    }

    #[test]
    fn dega_single_and_plus_branch() {
        let sigma2 = ebn0_to_sigma2(2.0, 0.5);
        let p1 = dega_profile(1, 2.0, 0.5).unwrap();
        assert!((p1.value(1) - 2.0 / sigma2).abs() < 1e-12);
        let p2 = dega_profile(2, 2.0, 0.5).unwrap();
        assert!((p2.value(2) - 2.0 * p1.value(1)).abs() < 1e-12);
        assert!(p2.value(1) < p1.value(1));
    }

    #[test]
    fn dega_positive_and_last_is_max() {
        for (n, snr) in [(128, 1.5), (128, 6.0), (1024, 0.0), (1024, -5.0), (32, -2.0)] {
            let p = dega_profile(n, snr, 0.5).unwrap();
            assert!(p.values().iter().all(|&v| v >= 0.0 && v.is_finite()));
            let l = p.log_values().unwrap();
            assert!(l.iter().all(|x| x.is_finite()));
            let max = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(l[n - 1], max);
            let mut sorted = l.to_vec();
            sorted.sort_by(f64::total_cmp);
            assert!(sorted.windows(2).filter(|w| w[0] == w[1]).count() < n / 8, "{n} {snr}");
        }
    }

    #[test]
    fn minus_is_below_input() {
        for m in [1e-3, 0.1, 0.2, 1.0, 5.0, 9.99, 10.0, 30.0, 500.0, 5000.0] {
            let d = dega_minus(m);
            assert!(d > 0.0 && d < m, "m={m} d={d}");
        }
        for lm in [-1.0f64, -5.0, -40.0, -149.0, -151.0, -1000.0] {
            let d = dega_minus_ln(lm);
            assert!(d.is_finite() && d < lm, "lm={lm} d={d}");
        }
        assert!((dega_minus_ln(-149.9) - dega_minus_ln(-150.1) - 0.4).abs() < 1e-6);
        assert!((dega_minus_ln(0.5f64.ln()) - dega_minus(0.5).ln()).abs() < 1e-12);
    }

    #[test]
    fn ln_phi_is_continuous_and_decreasing() {
        for c in [PHI_LOW, PHI_CROSSOVER] {
            let a = ln_phi(c * (1.0 - 1e-9));
            let b = ln_phi(c * (1.0 + 1e-9));
            assert!((a - b).abs() < 0.05, "{c}");
        }
        let mut prev = 0.0;
        for i in 1..2000 {
            let m = i as f64 * 0.01;
            let v = ln_phi(m);
            if m != PHI_CROSSOVER {
                assert!(v < prev, "{m}");
            }
            prev = v;
        }
        for m in [0.05, 0.3, 3.0, 12.0, 80.0] {
            assert!((inv_ln_phi(ln_phi(m)) - m).abs() < 1e-9 * m.max(1.0));
        }
    }

    #[test]
    fn sequence_identity_and_reverse() {
        let id: Vec<usize> = (1..=8).collect();
        let p = sequence_profile(&id).unwrap();
        for i in 1..=8 {
            assert_eq!(p.value(i), i as f64);
        }
        let rev: Vec<usize> = (1..=8).rev().collect();
        assert_eq!(sequence_profile(&rev).unwrap().ranking()[0], 1);
        assert!(sequence_profile(&[1, 1, 2, 3]).is_err());
        assert!(sequence_profile(&[0, 1, 2, 3]).is_err());
    }

    #[test]
    fn sequence_ranking_reproduces_ordering() {
        let asc = vec![3, 1, 4, 2, 8, 6, 5, 7];
        let p = sequence_profile(&asc).unwrap();
        let mut r = p.ranking();
        r.reverse();
        assert_eq!(r, asc);
    }

    #[test]
    fn nr_sequence_is_nested() {
        let full = nr_sequence();
        assert_eq!(full.len(), 1024);
        assert_eq!(full[0], 1024);
        let s128 = nr_sequence_for(128).unwrap();
        assert_eq!(s128.len(), 128);
        assert_eq!(s128[0], 128);
        let p = ProfileSource::nr().profile(128, 0.5).unwrap();
        assert_eq!(p.ranking()[0], 128);
        assert_eq!(p.ranking(), s128);
        // nested: restricting in two steps gives the same result
        assert_eq!(restrict_sequence(&nr_sequence_for(256).unwrap(), 128), s128);
    }

    #[test]
    fn ties_prefer_larger_index() {
        let p = bec_profile(4, 0.0).unwrap();
        assert_eq!(p.ranking(), vec![4, 3, 2, 1]);
    }

    #[test]
    fn parse_sources() {
        assert_eq!("bec:0.5".parse::<ProfileSource>().unwrap(), ProfileSource::Bec(0.5));
        assert_eq!("dega:1.5".parse::<ProfileSource>().unwrap(), ProfileSource::Dega(1.5));
        assert!(matches!(
            "seq:5g".parse::<ProfileSource>().unwrap(),
            ProfileSource::Sequence { .. }
        ));
        assert!("bec:2".parse::<ProfileSource>().is_err());
        assert!("foo:1".parse::<ProfileSource>().is_err());
        assert!("bec".parse::<ProfileSource>().is_err());
    }

    #[test]
    fn sequence_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.txt");
        std::fs::write(&path, "4 3\n2 1\n").unwrap();
        let src = ProfileSource::parse_with_base("seq:seq.txt", Some(dir.path())).unwrap();
        assert_eq!(src.profile(4, 0.5).unwrap().ranking(), vec![4, 3, 2, 1]);
        assert_eq!(src.profile(2, 0.5).unwrap().ranking(), vec![2, 1]);
        assert!(src.profile(8, 0.5).is_err());
    }
}
