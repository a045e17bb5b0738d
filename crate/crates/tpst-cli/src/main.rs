//! `tpst`: config-driven experiments with twisted-pair superposition codes.
//!
//! Subcommands: `run` (Monte Carlo campaigns), `dump` (code matrices),
//! `encode` / `decode` (hex bit strings on stdin/stdout) and `calibrate`
//! (early-termination threshold learning).

mod config;

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::FileConfig;
use tpst::binlin::BitVector;
use tpst::channel::ChannelParams;
use tpst::sim;
use tpst::tpst::{build_generator, build_parity, encode as tpst_encode, scl_decode};

#[derive(Parser)]
#[command(name = "tpst", version, about = "Twisted-pair superposition transmission toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (defaults to the config's `out`, then stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to TPST_WORKERS, then the config.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the campaign named in the config (fer | genie0 | genie1 | e2 |
    /// calibrate | rate-allocate) and writes CSV or JSON records.
    Run(Common),
    /// Prints G_TPST, H_TPST, R and S as hex rows with dimension headers.
    Dump(Common),
    /// Encodes hex info words (one per line, k bits) from stdin.
    Encode(Common),
    /// Decodes hex hard-decision words (one per line, 2n bits) from stdin.
    Decode(Common),
    /// Learns the early-termination threshold (shortcut for the calibrate
    /// campaign).
    Calibrate(Common),
}

struct CliError {
    field: Option<String>,
    message: String,
}

impl CliError {
    fn plain(message: impl Into<String>) -> Self {
        Self {
            field: None,
            message: message.into(),
        }
    }
}

impl From<tpst::Error> for CliError {
    fn from(e: tpst::Error) -> Self {
        let field = match &e {
            tpst::Error::InvalidParameter { name, .. } => Some((*name).to_string()),
            _ => None,
        };
        Self {
            field,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::plain(format!("io error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => dispatch(c, None),
        Command::Calibrate(c) => dispatch(c, Some("calibrate")),
        Command::Dump(c) => cmd_dump(c),
        Command::Encode(c) => cmd_codec(c, true),
        Command::Decode(c) => cmd_codec(c, false),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = json!({ "error": e.message, "field": e.field });
            eprintln!("{payload}");
            ExitCode::from(2)
        }
    }
}

fn load_config(common: &Common) -> Result<(FileConfig, usize), CliError> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| CliError::plain(format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg: FileConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::plain(format!("config parse error: {e}")))?;
    if let Some(seed) = common.seed {
        cfg.campaign_params.master_seed = seed;
    }
    let workers = common
        .workers
        .or_else(|| {
            std::env::var("TPST_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(cfg.campaign_params.workers);
    Ok((cfg, workers))
}

fn provenance(cfg: &FileConfig) -> String {
    format!(
        "# config_hash={}\n# master_seed={}\n# snr_mode={}\n",
        cfg.result_hash(),
        cfg.campaign_params.master_seed,
        cfg.channel.snr_mode
    )
}

fn emit(common: &Common, cfg: &FileConfig, content: &str) -> Result<(), CliError> {
    let target = common
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from));
    match target {
        Some(path) => fs::write(&path, content)
            .map_err(|e| CliError::plain(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn dispatch(common: &Common, campaign_override: Option<&str>) -> Result<(), CliError> {
    let (cfg, workers) = load_config(common)?;
    let campaign = campaign_override.unwrap_or(&cfg.campaign);
    match campaign {
        "fer" => {
            let exp = cfg.to_experiment(cfg.code.to_spec()?, workers)?;
            let records = sim::simulate_fer(&exp)?;
            let body = format!("{}{}", provenance(&cfg), sim::fer_records_to_csv(&records));
            emit(common, &cfg, &body)
        }
        "genie0" => {
            let spec = cfg.code.to_spec()?;
            let l_max = cfg.genie_l_max.unwrap_or_else(|| spec.l_max());
            let k0 = spec.k0();
            let exp = cfg.to_experiment(spec, workers)?;
            let records = sim::genie_bound_layer0(&exp, l_max)?;
            let body = format!(
                "{}{}",
                provenance(&cfg),
                sim::bound_records_to_csv(&records, k0, l_max)
            );
            emit(common, &cfg, &body)
        }
        "genie1" => {
            let spec = cfg.code.to_spec()?;
            let k1 = spec.k1();
            let exp = cfg.to_experiment(spec, workers)?;
            let records = sim::genie_bound_layer1(&exp)?;
            let body = format!(
                "{}{}",
                provenance(&cfg),
                sim::bound_records_to_csv(&records, k1, 1)
            );
            emit(common, &cfg, &body)
        }
        "e2" => {
            let spec = cfg.code.to_spec()?;
            let k = spec.dim();
            let l_max = spec.l_max();
            let exp = cfg.to_experiment(spec, workers)?;
            let records = sim::ml_lower_bound(&exp)?;
            let body = format!(
                "{}{}",
                provenance(&cfg),
                sim::bound_records_to_csv(&records, k, l_max)
            );
            emit(common, &cfg, &body)
        }
        "calibrate" => {
            let epsilon = cfg.epsilon.ok_or(tpst::Error::InvalidParameter {
                name: "epsilon",
                reason: "threshold calibration needs a quantile".into(),
            })?;
            let exp = cfg.to_experiment(cfg.code.to_spec()?, workers)?;
            let threshold = sim::calibrate_threshold(&exp, epsilon)?;
            let body = format!(
                "{}\n",
                json!({
                    "threshold": threshold,
                    "epsilon": epsilon,
                    "trials_per_point": exp.max_trials,
                    "snr_points": exp.snr_points,
                    "config_hash": cfg.result_hash(),
                    "master_seed": cfg.campaign_params.master_seed,
                    "snr_mode": cfg.channel.snr_mode,
                })
            );
            emit(common, &cfg, &body)
        }
        "rate-allocate" => {
            let ra = cfg.rate_allocate.clone().ok_or(tpst::Error::InvalidParameter {
                name: "rate_allocate",
                reason: "campaign rate-allocate needs its table section".into(),
            })?;
            let layer1 = sim::parse_bound_table(&read_file(&ra.layer1_table)?)?;
            let layer0 = sim::parse_bound_table(&read_file(&ra.layer0_table)?)?;
            let alloc = sim::rate_allocate(&layer1, &layer0, ra.k, ra.target_fer, ra.snr_margin_db)?;
            let body = format!(
                "{}\n",
                json!({
                    "k0": alloc.k0,
                    "k1": alloc.k1,
                    "l_max": alloc.l_max,
                    "layer1_snr_db": alloc.layer1_snr_db,
                    "layer0_snr_db": alloc.layer0_snr_db,
                    "target_fer": ra.target_fer,
                    "snr_margin_db": ra.snr_margin_db,
                    "config_hash": cfg.result_hash(),
                })
            );
            emit(common, &cfg, &body)
        }
        other => Err(CliError {
            field: Some("campaign".into()),
            message: format!(
                "unknown campaign `{other}` (fer | genie0 | genie1 | e2 | calibrate | rate-allocate)"
            ),
        }),
    }
}

fn read_file(path: &str) -> Result<String, CliError> {
    fs::read_to_string(Path::new(path))
        .map_err(|e| CliError::plain(format!("cannot read {path}: {e}")))
}

fn cmd_dump(common: &Common) -> Result<(), CliError> {
    let (cfg, _) = load_config(common)?;
    let spec = cfg.code.to_spec()?;
    let g = build_generator(&spec);
    let h = build_parity(&spec);
    let r = spec.transform();
    let s = spec.selection().to_matrix();
    let mut out = String::new();
    for (name, m) in [("G_TPST", &g), ("H_TPST", &h), ("R", r), ("S", &s)] {
        out.push_str(&format!("{name} rows={} cols={}\n", m.rows(), m.cols()));
        out.push_str(&m.to_hex_rows());
    }
    emit(common, &cfg, &out)
}

fn cmd_codec(common: &Common, encode: bool) -> Result<(), CliError> {
    let (cfg, _) = load_config(common)?;
    let spec = cfg.code.to_spec()?;
    let mut input = String::new();
    std::io::stdin().read_to_string(&mut input)?;
    let mut out = String::new();
    for line in input.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if encode {
            let u = BitVector::from_hex(line, spec.dim())?;
            out.push_str(&tpst_encode(&u, &spec)?.to_hex());
        } else {
            // Hard-decision decoding: map bits to ±1 and use the noise level
            // of the first configured SNR point.
            let c = BitVector::from_hex(line, spec.block_len())?;
            let params = ChannelParams::new(
                *cfg.channel.snr_db.first().ok_or(tpst::Error::InvalidParameter {
                    name: "snr_db",
                    reason: "decode needs one SNR point".into(),
                })?,
                cfg.snr_mode()?,
                spec.rate(),
            )?;
            let y: Vec<f64> = c.iter().map(|b| if b { -1.0 } else { 1.0 }).collect();
            let res = scl_decode(&y, &spec, params.sigma());
            out.push_str(&res.info.to_hex());
        }
        out.push('\n');
    }
    emit(common, &cfg, &out)
}
