use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use deep_polar::analysis::{min_weight_scl_estimate, weight_distribution_with, DEFAULT_MAX_K};
use deep_polar::channels::{format_param, parse_param_list, SnrAxis};
use deep_polar::codec::ml::{bec_observation, MlDecoder};
use deep_polar::codec::scl::{scl_bpc_decode_with, SclOptions};
use deep_polar::codec::{decode, encode, DecoderKind};
use deep_polar::error::{Error, Result};
use deep_polar::gf2::BitVector;
use deep_polar::sim::{resolve_code_config, run_bler_with, with_threads, ChannelKind, CodeRef, SimConfig, SweepValue};
use deep_polar::DeepPolarCode;

#[derive(Parser)]
#[command(name = "deep-polar", version, about = "Deep polar codes: construction, decoding and simulation")]
struct Cli {
    /// Reliability profile override: bec:EPS, dega:SNR_DB or seq:PATH (seq:5g for the built-in sequence).
    #[arg(long, global = true, value_name = "SPEC")]
    profile: Option<String>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "T")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CodeArg {
    /// Code configuration: a JSON file or preset:NAME.
    #[arg(long, value_name = "CONFIG")]
    code: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum BitsFormat {
    Bits,
    Hex,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelArg {
    Awgn,
    Bec,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a message given in hex (first message bit is the most significant).
    Encode {
        #[command(flatten)]
        code: CodeArg,
        #[arg(long, value_name = "HEX")]
        msg: String,
        /// Codeword rendering.
        #[arg(long, value_enum, default_value = "bits")]
        format: BitsFormat,
    },
    /// Decode channel LLRs read one per line from FILE.
    Decode {
        #[command(flatten)]
        code: CodeArg,
        #[arg(long, value_name = "FILE")]
        llr: PathBuf,
        #[arg(long, default_value = "scl-bpc")]
        decoder: DecoderKind,
        #[arg(long, default_value_t = 8)]
        list: usize,
        /// Treat zero LLRs as erasures and decode by erasure ML (ml decoder only).
        #[arg(long)]
        erasures: bool,
        /// Min-sum check-node update (scl-bpc only).
        #[arg(long)]
        min_sum: bool,
    },
    /// Exact weight distribution as CSV.
    Weights {
        #[command(flatten)]
        code: CodeArg,
        #[arg(long, default_value_t = DEFAULT_MAX_K)]
        max_k: usize,
    },
    /// List-decoder estimate of the minimum distance.
    DminEst {
        #[command(flatten)]
        code: CodeArg,
        #[arg(long, default_value_t = 10_000)]
        list: usize,
    },
    /// Monte Carlo BLER/BER sweep.
    Simulate {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        /// Output CSV (standard output when omitted).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Per-point status lines on standard error.
        #[arg(long)]
        progress: bool,
        #[arg(long, value_enum)]
        channel: Option<ChannelArg>,
        /// Comma-separated Eb/N0 values in dB (`inf` for noiseless).
        #[arg(long, value_name = "LIST", conflicts_with_all = ["esn0", "eps"])]
        ebn0: Option<String>,
        /// Comma-separated Es/N0 values in dB.
        #[arg(long, value_name = "LIST", conflicts_with = "eps")]
        esn0: Option<String>,
        /// Comma-separated erasure probabilities.
        #[arg(long, value_name = "LIST")]
        eps: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        decoder: Option<DecoderKind>,
        #[arg(long)]
        list: Option<usize>,
        #[arg(long)]
        max_trials: Option<u64>,
        #[arg(long)]
        target_errors: Option<u64>,
        #[arg(long)]
        min_sum: bool,
    },
}

fn load_code(code: &str, profile: Option<&str>) -> Result<DeepPolarCode> {
    build_code_ref(&CodeRef::Reference(code.to_string()), profile)
}

fn build_code_ref(code: &CodeRef, profile: Option<&str>) -> Result<DeepPolarCode> {
    let (mut cfg, base) = resolve_code_config(code)?;
    if let Some(p) = profile {
        cfg.profile = p.to_string();
    }
    cfg.build_with_base(base.as_deref())
}

fn read_llrs(path: &PathBuf) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad LLR {l:?}: {e}")))
        })
        .collect()
}

fn sweep(list: &str) -> Result<Vec<SweepValue>> {
    Ok(parse_param_list(list)?.into_iter().map(SweepValue::Number).collect())
}

fn run(cli: Cli) -> Result<()> {
    let profile = cli.profile.as_deref();
    match cli.command {
        Command::Encode { code, msg, format } => {
            let code = load_code(&code.code, profile)?;
            let d = BitVector::from_hex(&msg, code.k())?;
            let x = encode(&code, &d)?;
            match format {
                BitsFormat::Bits => println!("{}", x.to_binary_string()),
                BitsFormat::Hex => println!("{}", x.to_hex()),
            }
        }
        Command::Decode {
            code,
            llr,
            decoder,
            list,
            erasures,
            min_sum,
        } => {
            let code = load_code(&code.code, profile)?;
            let llr = read_llrs(&llr)?;
            let res = with_threads(cli.threads, || {
                if erasures {
                    if decoder != DecoderKind::Ml {
                        return Err(Error::InvalidArgument(
                            "--erasures requires --decoder ml".into(),
                        ));
                    }
                    if llr.len() != code.n() {
                        return Err(Error::InvalidArgument(format!(
                            "received {} LLRs, code length is {}",
                            llr.len(),
                            code.n()
                        )));
                    }
                    MlDecoder::new(&code)
                        .decode_bec(&bec_observation(&llr))
                        .map(|(r, _)| r)
                } else if decoder == DecoderKind::SclBpc && min_sum {
                    let mut opts = SclOptions::new(list);
                    opts.min_sum = true;
                    scl_bpc_decode_with(&code, &llr, &opts)
                } else {
                    decode(&code, &llr, decoder, list)
                }
            })??;
            println!("{}", res.message.to_hex());
            eprintln!(
                "success={} path_metric={} killed_by_bpc={} pruned_by_metric={}",
                res.success, res.path_metric, res.killed_by_bpc, res.pruned_by_metric
            );
        }
        Command::Weights { code, max_k } => {
            let code = load_code(&code.code, profile)?;
            let wd = with_threads(cli.threads, || weight_distribution_with(&code, max_k))??;
            print!("{}", wd.to_csv());
        }
        Command::DminEst { code, list } => {
            let code = load_code(&code.code, profile)?;
            println!("{}", min_weight_scl_estimate(&code, list)?);
        }
        Command::Simulate {
            config,
            out,
            progress,
            channel,
            ebn0,
            esn0,
            eps,
            seed,
            decoder,
            list,
            max_trials,
            target_errors,
            min_sum,
        } => {
            let mut cfg = SimConfig::load(&config)?;
            if let Some(c) = channel {
                cfg.channel = match c {
                    ChannelArg::Awgn => ChannelKind::Awgn,
                    ChannelArg::Bec => ChannelKind::Bec,
                };
            }
            let snr_given = ebn0.is_some() || esn0.is_some();
            match cfg.channel {
                ChannelKind::Bec if snr_given => {
                    return Err(Error::InvalidArgument("--ebn0/--esn0 apply to the awgn channel".into()))
                }
                ChannelKind::Awgn if eps.is_some() => {
                    return Err(Error::InvalidArgument("--eps applies to the bec channel".into()))
                }
                _ => {}
            }
            if let Some(l) = ebn0 {
                cfg.points = sweep(&l)?;
                cfg.snr_axis = SnrAxis::EbN0;
            }
            if let Some(l) = esn0 {
                cfg.points = sweep(&l)?;
                cfg.snr_axis = SnrAxis::EsN0;
            }
            if let Some(l) = eps {
                cfg.points = sweep(&l)?;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(d) = decoder {
                cfg.decoder = d;
            }
            if let Some(l) = list {
                cfg.list = l;
            }
            if let Some(t) = max_trials {
                cfg.max_trials = t;
            }
            if let Some(t) = target_errors {
                cfg.target_errors = t;
            }
            cfg.min_sum |= min_sum;
            let code = build_code_ref(&cfg.code, profile)?;
            if progress {
                eprintln!("code: {}", code.summary());
            }
            let result = with_threads(cli.threads, || {
                run_bler_with(&cfg, &code, |p| {
                    if progress {
                        eprintln!(
                            "point {}: trials={} block_errors={} bler={:.4e} ci95={:.2e} ber={:.4e} seconds={:.2}",
                            format_param(p.param),
                            p.trials,
                            p.block_errors,
                            p.bler(),
                            p.ci95(),
                            p.ber(),
                            p.seconds
                        );
                    }
                })
            })??;
            match out {
                Some(path) => result.write_csv(&path)?,
                None => print!("{}", result.to_csv()),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::ConfigRejected(_) => 3,
                Error::ConstructionInfeasible(_) => 4,
                _ => 2,
            })
        }
    }
}
