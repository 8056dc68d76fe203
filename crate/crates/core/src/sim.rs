//! Monte Carlo BLER/BER estimation.
//!
//! Trials run in fixed-size batches. Every trial draws its message and noise
//! from its own stream keyed by `(seed, point, trial)`, and stopping is only
//! decided at batch boundaries, so counts do not depend on the thread count.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{format_param, transmit, trial_rng, ChannelModel, SnrAxis};
use crate::codec::ml::{bec_observation, MlDecoder};
use crate::codec::scl::SclOptions;
use crate::codec::{encode, parallel_scl_decode, sc_decode, scl_bpc_decode_with, CrcSpec};
use crate::codec::{DecodeResult, DecoderKind};
use crate::construction::{CodeConfig, DeepPolarCode};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::presets;
use crate::reliability::ProfileSource;

pub const DEFAULT_TARGET_ERRORS: u64 = 200;
pub const DEFAULT_BATCH: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Awgn,
    Bec,
}

/// A code given inline, as a file path, or as `preset:NAME`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeRef {
    Inline(CodeConfig),
    Reference(String),
}

/// Sweep value; strings allow `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Text(String),
}

impl SweepValue {
    pub fn value(&self) -> Result<f64> {
        match self {
            SweepValue::Number(v) => Ok(*v),
            SweepValue::Text(s) => crate::channels::parse_param(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub code: CodeRef,
    pub decoder: DecoderKind,
    #[serde(default = "default_list")]
    pub list: usize,
    pub channel: ChannelKind,
    /// Eb/N0 in dB (or Es/N0 with `snr_axis`) for AWGN, erasure probability for BEC.
    pub points: Vec<SweepValue>,
    #[serde(default)]
    pub snr_axis: SnrAxis,
    pub max_trials: u64,
    #[serde(default = "default_target")]
    pub target_errors: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_batch")]
    pub batch: u64,
    #[serde(default)]
    pub min_sum: bool,
}

fn default_list() -> usize {
    8
}

fn default_target() -> u64 {
    DEFAULT_TARGET_ERRORS
}

fn default_batch() -> u64 {
    DEFAULT_BATCH
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&std::fs::read_to_string(path)?)?;
        if let CodeRef::Reference(r) = &cfg.code {
            if !r.starts_with("preset:") && Path::new(r).is_relative() {
                if let Some(dir) = path.parent() {
                    let candidate = dir.join(r);
                    if candidate.exists() {
                        cfg.code = CodeRef::Reference(candidate.to_string_lossy().into_owned());
                    }
                }
            }
        }
        Ok(cfg)
    }

    pub fn point_values(&self) -> Result<Vec<f64>> {
        self.points.iter().map(SweepValue::value).collect()
    }

    pub fn build_code(&self) -> Result<DeepPolarCode> {
        load_code(&self.code)
    }
}

/// Resolves a code reference.
pub fn load_code(code: &CodeRef) -> Result<DeepPolarCode> {
    let (cfg, base) = resolve_code_config(code)?;
    cfg.build_with_base(base.as_deref())
}

/// Builds a code from `preset:NAME` or a JSON file path.
pub fn load_code_ref(r: &str) -> Result<DeepPolarCode> {
    load_code(&CodeRef::Reference(r.to_string()))
}

/// Configuration behind a code reference, with the directory that relative
/// sequence paths resolve against.
pub fn resolve_code_config(code: &CodeRef) -> Result<(CodeConfig, Option<PathBuf>)> {
    match code {
        CodeRef::Inline(cfg) => Ok((cfg.clone(), None)),
        CodeRef::Reference(r) => {
            if let Some(name) = r.strip_prefix("preset:") {
                let p = presets::find(name)
                    .ok_or_else(|| Error::ConfigRejected(format!("unknown preset {name:?}")))?;
                return Ok((p.config, None));
            }
            let path = PathBuf::from(r);
            let cfg = CodeConfig::load(&path)?;
            Ok((cfg, path.parent().map(Path::to_path_buf)))
        }
    }
}

/// Counts for one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub param: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    pub seconds: f64,
    /// Message bits per trial.
    pub k: usize,
}

impl PointResult {
    pub fn bler(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.block_errors as f64 / self.trials as f64
        }
    }

    pub fn ber(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.bit_errors as f64 / (self.trials as f64 * self.k as f64)
        }
    }

    /// Half-width of the normal-approximation 95% interval.
    pub fn ci95(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let p = self.bler();
        1.96 * (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Same counts, ignoring wall time.
    pub fn counts(&self) -> (u64, u64, u64) {
        (self.trials, self.block_errors, self.bit_errors)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub points: Vec<PointResult>,
}

pub const CSV_HEADER: &str = "param,trials,block_errors,bler,ci95,bit_errors,ber,seconds";

impl SimResult {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{CSV_HEADER}\n");
        for p in &self.points {
            writeln!(
                s,
                "{},{},{},{:e},{:e},{},{:e},{:.3}",
                format_param(p.param),
                p.trials,
                p.block_errors,
                p.bler(),
                p.ci95(),
                p.bit_errors,
                p.ber(),
                p.seconds
            )
            .expect("writing to a string");
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Stopping rule and seeding for one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointPlan {
    pub seed: u64,
    pub point: u64,
    pub max_trials: u64,
    pub target_errors: u64,
    pub batch: u64,
}

/// Decoder run on each received LLR vector.
pub type TrialDecoder<'a> = dyn Fn(&[f64]) -> Result<DecodeResult> + Sync + 'a;

/// Outcome of one trial, for harness checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub block_error: bool,
    pub bit_errors: u64,
}

/// Runs trial `t` of a point.
pub fn run_trial(
    code: &DeepPolarCode,
    model: &ChannelModel,
    plan: &PointPlan,
    t: u64,
    decoder: &TrialDecoder<'_>,
) -> Result<TrialOutcome> {
    let mut rng = trial_rng(plan.seed, plan.point, t);
    let d = BitVector::from_bools((0..code.k()).map(|_| rng.random::<bool>()));
    let x = encode(code, &d)?;
    let llr = transmit(&x, model, &mut rng);
    let res = decoder(&llr)?;
    let bit_errors = res.message.xor(&d).count_ones() as u64;
    Ok(TrialOutcome {
        block_error: bit_errors > 0 || !res.success,
        bit_errors,
    })
}

/// Runs batches of trials until the error target or the trial cap is reached.
pub fn simulate_point(
    code: &DeepPolarCode,
    model: &ChannelModel,
    plan: &PointPlan,
    decoder: &TrialDecoder<'_>,
) -> Result<PointResult> {
    let start = Instant::now();
    let batch = plan.batch.max(1);
    let mut trials = 0u64;
    let mut block_errors = 0u64;
    let mut bit_errors = 0u64;
    while trials < plan.max_trials && block_errors < plan.target_errors {
        let end = (trials + batch).min(plan.max_trials);
        let outcomes: Result<Vec<TrialOutcome>> = (trials..end)
            .into_par_iter()
            .map(|t| run_trial(code, model, plan, t, decoder))
            .collect();
        for o in outcomes? {
            block_errors += o.block_error as u64;
            bit_errors += o.bit_errors;
        }
        trials = end;
    }
    Ok(PointResult {
        param: model.param(),
        trials,
        block_errors,
        bit_errors,
        seconds: start.elapsed().as_secs_f64(),
        k: code.k(),
    })
}

/// Builds the trial decoder named by `kind`.
pub fn make_decoder<'a>(
    code: &'a DeepPolarCode,
    kind: DecoderKind,
    list: usize,
    channel: ChannelKind,
    min_sum: bool,
) -> Result<Box<TrialDecoder<'a>>> {
    match kind {
        DecoderKind::SclBpc => {
            let mut opts = SclOptions::new(list);
            opts.min_sum = min_sum;
            Ok(Box::new(move |llr| scl_bpc_decode_with(code, llr, &opts)))
        }
        DecoderKind::Sc => Ok(Box::new(move |llr| sc_decode(code, llr))),
        DecoderKind::ParallelScl => {
            let m = code.inner_k();
            if m >= 64 || (1u64 << m) > crate::codec::DEFAULT_HYPOTHESIS_BUDGET {
                return Err(Error::ConfigRejected(format!(
                    "parallel-SCL needs 2^{m} hypotheses, above the budget"
                )));
            }
            Ok(Box::new(move |llr| parallel_scl_decode(code, llr, list)))
        }
        DecoderKind::Ml => {
            if code.k() > crate::codec::ml::ML_MAX_K {
                return Err(Error::ConfigRejected(format!(
                    "ML decoding of K = {} is not enumerable",
                    code.k()
                )));
            }
            let dec = MlDecoder::new(code);
            match channel {
                ChannelKind::Awgn => Ok(Box::new(move |llr| dec.decode_awgn(llr))),
                ChannelKind::Bec => Ok(Box::new(move |llr| {
                    dec.decode_bec(&bec_observation(llr)).map(|(r, _)| r)
                })),
            }
        }
    }
}

/// Channel model for a sweep value.
pub fn channel_model(kind: ChannelKind, value: f64, rate: f64, axis: SnrAxis) -> Result<ChannelModel> {
    match kind {
        ChannelKind::Awgn => ChannelModel::awgn_on_axis(value, rate, axis),
        ChannelKind::Bec => ChannelModel::bec(value),
    }
}

/// Runs a full sweep. `progress` receives each finished point.
pub fn run_bler_with(
    config: &SimConfig,
    code: &DeepPolarCode,
    mut progress: impl FnMut(&PointResult),
) -> Result<SimResult> {
    if config.max_trials == 0 {
        return Err(Error::ConfigRejected("max_trials must be at least 1".into()));
    }
    if config.list == 0 {
        return Err(Error::ConfigRejected("list size must be at least 1".into()));
    }
    let values = config.point_values()?;
    if values.is_empty() {
        return Err(Error::ConfigRejected("sweep has no points".into()));
    }
    let models: Vec<ChannelModel> = values
        .iter()
        .map(|&v| channel_model(config.channel, v, code.rate(), config.snr_axis))
        .collect::<Result<_>>()
        .map_err(|e| Error::ConfigRejected(e.to_string()))?;
    let decoder = make_decoder(code, config.decoder, config.list, config.channel, config.min_sum)?;
    let mut points = Vec::with_capacity(models.len());
    for (idx, model) in models.iter().enumerate() {
        let plan = PointPlan {
            seed: config.seed,
            point: idx as u64,
            max_trials: config.max_trials,
            target_errors: config.target_errors,
            batch: config.batch,
        };
        let r = simulate_point(code, model, &plan, decoder.as_ref())?;
        progress(&r);
        points.push(r);
    }
    Ok(SimResult { points })
}

pub fn run_bler(config: &SimConfig) -> Result<SimResult> {
    let code = config.build_code()?;
    run_bler_with(config, &code, |_| {})
}

/// Runs `f` on a pool with `threads` workers (`None` uses the global pool).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::ConfigRejected(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Single-layer polar code on the `k + deg` most reliable indices of `profile`,
/// with the CRC appended to every message.
pub fn ca_polar_baseline(
    n: usize,
    k: usize,
    crc: CrcSpec,
    profile: &ProfileSource,
) -> Result<DeepPolarCode> {
    let ext = k + crc.degree();
    let rel = profile.profile(n, k as f64 / n as f64)?;
    if ext > n {
        return Err(Error::ConstructionInfeasible(format!(
            "{ext} information bits do not fit N = {n}"
        )));
    }
    let info = rel.ranking()[..ext].to_vec();
    Ok(DeepPolarCode::plain(n, info, Some(crc))?.with_profile_label(profile.describe()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_config(decoder: DecoderKind, channel: ChannelKind, points: Vec<SweepValue>) -> SimConfig {
        SimConfig {
            code: CodeRef::Reference("preset:example1".into()),
            decoder,
            list: 4,
            channel,
            points,
            snr_axis: SnrAxis::EbN0,
            max_trials: 2000,
            target_errors: 50,
            seed: 3,
            batch: 128,
            min_sum: false,
        }
    }

    #[test]
    fn noiseless_point_has_no_errors() {
        let cfg = toy_config(
            DecoderKind::SclBpc,
            ChannelKind::Awgn,
            vec![SweepValue::Text("inf".into())],
        );
        let res = run_bler(&cfg).unwrap();
        assert_eq!(res.points[0].trials, 2000);
        assert_eq!(res.points[0].block_errors, 0);
    }

    #[test]
    fn all_erased_is_all_errors() {
        let cfg = toy_config(DecoderKind::Ml, ChannelKind::Bec, vec![SweepValue::Number(1.0)]);
        let res = run_bler(&cfg).unwrap();
        assert_eq!(res.points[0].bler(), 1.0);
        assert_eq!(res.points[0].trials, 128);
    }

    #[test]
    fn thread_count_does_not_change_counts() {
        let cfg = toy_config(
            DecoderKind::SclBpc,
            ChannelKind::Awgn,
            vec![SweepValue::Number(1.0), SweepValue::Number(2.0)],
        );
        let a = with_threads(Some(1), || run_bler(&cfg)).unwrap().unwrap();
        let b = with_threads(Some(4), || run_bler(&cfg)).unwrap().unwrap();
        let ca: Vec<_> = a.points.iter().map(PointResult::counts).collect();
        let cb: Vec<_> = b.points.iter().map(PointResult::counts).collect();
        assert_eq!(ca, cb);
    }

    #[test]
    fn csv_layout() {
        let r = SimResult {
            points: vec![PointResult {
                param: f64::INFINITY,
                trials: 10,
                block_errors: 1,
                bit_errors: 2,
                seconds: 0.5,
                k: 4,
            }],
        };
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert!(lines.next().unwrap().starts_with("inf,10,1,"));
    }

    #[test]
    fn config_json() {
        let text = r#"{"code":"preset:toy","decoder":"parallel-scl","list":2,"channel":"awgn",
                       "points":[1.0,"inf"],"max_trials":100}"#;
        let cfg = SimConfig::from_json(text).unwrap();
        assert_eq!(cfg.point_values().unwrap(), vec![1.0, f64::INFINITY]);
        assert_eq!(cfg.target_errors, DEFAULT_TARGET_ERRORS);
        let inline = r#"{"code":{"layers":[{"n":8,"k":4}],"profile":"bec:0.5"},"decoder":"sc",
                         "channel":"bec","points":[0.1],"max_trials":10}"#;
        assert!(SimConfig::from_json(inline).unwrap().build_code().is_ok());
    }

    #[test]
    fn rejects_parallel_budget() {
        let mut cfg = toy_config(DecoderKind::ParallelScl, ChannelKind::Awgn, vec![SweepValue::Number(1.0)]);
        cfg.code = CodeRef::Inline(CodeConfig {
            layers: vec![
                crate::construction::LayerConfig::new(32, 20, None),
                crate::construction::LayerConfig::new(128, 40, Some(8)),
            ],
            profile: "seq:5g".into(),
            crc: None,
        });
        assert!(matches!(run_bler(&cfg), Err(Error::ConfigRejected(_))));
    }

    #[test]
    fn ca_polar_roundtrip() {
        let code = ca_polar_baseline(128, 64, CrcSpec::CRC6, &ProfileSource::nr()).unwrap();
        assert_eq!(code.k(), 64);
        assert_eq!(code.extended_k(), 70);
        let cfg = SimConfig {
            code: CodeRef::Inline(CodeConfig {
                layers: vec![crate::construction::LayerConfig {
                    n: 128,
                    k: 70,
                    dmin: None,
                    info: Some(code.outer().info().to_vec()),
                    connection: None,
                }],
                profile: "seq:5g".into(),
                crc: Some("0x61".into()),
            }),
            ..toy_config(DecoderKind::SclBpc, ChannelKind::Awgn, vec![SweepValue::Text("inf".into())])
        };
        let res = run_bler(&cfg).unwrap();
        assert_eq!(res.points[0].block_errors, 0);
    }
}
