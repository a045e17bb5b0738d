//! JSON run configuration and its resolution into domain objects.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use tpst::binlin::{build_selection_matrix, sample_structured_matrix, MatrixKind};
use tpst::channel::SnrMode;
use tpst::convcode::{ConvSpec, PuncturePattern};
use tpst::sim::ExperimentConfig;
use tpst::TpstSpec;

/// Basic TBCC presets: name → (octal generators, memory).
pub const PRESETS: &[(&str, &str, usize)] = &[
    ("tbcc-1/4-(52,56,66,76)", "52,56,66,76", 4),
    ("tbcc-1/3-(52,66,76)", "52,66,76", 4),
    ("tbcc-1/2-(56,62)", "56,62", 4),
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// One of: fer | genie0 | genie1 | e2 | calibrate | rate-allocate.
    #[serde(default = "default_campaign")]
    pub campaign: String,
    pub code: CodeConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub campaign_params: CampaignParams,
    /// Quantile for threshold calibration.
    pub epsilon: Option<f64>,
    /// List size used by the genie0 campaign (defaults to the code's l_max).
    pub genie_l_max: Option<usize>,
    pub rate_allocate: Option<RateAllocateConfig>,
    /// Output path; `--out` overrides, stdout if neither is given.
    pub out: Option<String>,
}

fn default_campaign() -> String {
    "fer".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub preset: Option<String>,
    pub generators0: Option<String>,
    pub memory0: Option<usize>,
    pub generators1: Option<String>,
    pub memory1: Option<usize>,
    pub k0: usize,
    pub k1: usize,
    /// Basic code length after puncturing; the TPST block length is 2n.
    pub n: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_r_kind")]
    pub r_kind: String,
    #[serde(default = "default_r_seed")]
    pub r_seed: u64,
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    /// Early-termination threshold; absent means no early termination.
    pub threshold: Option<f64>,
    /// Explicit keep masks ("110" keeps two of every three bits); when
    /// absent, a homogeneous pattern bridges mother length and n.
    pub puncture0: Option<String>,
    pub puncture1: Option<String>,
}

fn default_alpha() -> f64 {
    1.0
}
fn default_r_kind() -> String {
    "permutation".into()
}
fn default_r_seed() -> u64 {
    1
}
fn default_l_max() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(default = "default_snr_points")]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_snr_mode")]
    pub snr_mode: String,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            snr_db: default_snr_points(),
            snr_mode: default_snr_mode(),
        }
    }
}

fn default_snr_points() -> Vec<f64> {
    vec![2.0]
}
fn default_snr_mode() -> String {
    "ebn0".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignParams {
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default = "default_trials")]
    pub max_trials: usize,
    /// 0 disables the error-count stop rule.
    #[serde(default)]
    pub max_errors: usize,
    /// 0 means one worker per core.
    #[serde(default)]
    pub workers: usize,
}

impl Default for CampaignParams {
    fn default() -> Self {
        Self {
            master_seed: default_seed(),
            max_trials: default_trials(),
            max_errors: 0,
            workers: 0,
        }
    }
}

fn default_seed() -> u64 {
    1
}
fn default_trials() -> usize {
    1000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateAllocateConfig {
    pub layer1_table: String,
    pub layer0_table: String,
    pub k: usize,
    pub target_fer: f64,
    #[serde(default = "default_margin")]
    pub snr_margin_db: f64,
}

fn default_margin() -> f64 {
    0.2
}

impl CodeConfig {
    fn layer(&self, which: usize) -> Result<ConvSpec, tpst::Error> {
        let (gens_field, gens, memory, k, punct): (
            &'static str,
            Option<&String>,
            Option<usize>,
            usize,
            Option<&String>,
        ) = if which == 0 {
            ("generators0", self.generators0.as_ref(), self.memory0, self.k0, self.puncture0.as_ref())
        } else {
            ("generators1", self.generators1.as_ref(), self.memory1, self.k1, self.puncture1.as_ref())
        };
        let preset = match &self.preset {
            Some(name) => Some(
                PRESETS
                    .iter()
                    .find(|(p, _, _)| p == name)
                    .ok_or_else(|| tpst::Error::InvalidParameter {
                        name: "preset",
                        reason: format!(
                            "unknown preset `{name}`; available: {}",
                            PRESETS
                                .iter()
                                .map(|(p, _, _)| *p)
                                .collect::<Vec<_>>()
                                .join(", ")
                        ),
                    })?,
            ),
            None => None,
        };
        let (generators, memory) = match (gens, preset) {
            (Some(g), _) => (
                g.clone(),
                memory.ok_or_else(|| tpst::Error::InvalidParameter {
                    name: if which == 0 { "memory0" } else { "memory1" },
                    reason: "explicit generators need an explicit memory".into(),
                })?,
            ),
            (None, Some(&(_, g, m))) => (g.to_string(), m),
            (None, None) => {
                return Err(tpst::Error::InvalidParameter {
                    name: gens_field,
                    reason: "provide a preset or explicit generators".into(),
                })
            }
        };
        let probe = ConvSpec::new(&generators, memory, k, None)?;
        let mother = probe.mother_len();
        let pattern = match punct {
            Some(mask) => {
                let bits: Result<Vec<u8>, _> = mask
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(0u8),
                        '1' => Ok(1u8),
                        _ => Err(tpst::Error::InvalidParameter {
                            name: if which == 0 { "puncture0" } else { "puncture1" },
                            reason: format!("keep mask must be 0/1 digits, got `{mask}`"),
                        }),
                    })
                    .collect();
                Some(PuncturePattern::new(&bits?)?)
            }
            None if mother > self.n => Some(PuncturePattern::homogeneous(mother, self.n)?),
            None => None,
        };
        let spec = ConvSpec::new(&generators, memory, k, pattern)?;
        if spec.code_len() != self.n {
            return Err(tpst::Error::InvalidParameter {
                name: "n",
                reason: format!(
                    "layer {which} punctures to length {} but n = {}",
                    spec.code_len(),
                    self.n
                ),
            });
        }
        Ok(spec)
    }

    pub fn to_spec(&self) -> Result<TpstSpec, tpst::Error> {
        let basic0 = self.layer(0)?;
        let basic1 = self.layer(1)?;
        let kind = MatrixKind::parse(&self.r_kind)?;
        let transform = sample_structured_matrix(self.n, kind, self.r_seed);
        let selection = build_selection_matrix(self.n, self.alpha)?;
        TpstSpec::new(
            basic0,
            basic1,
            transform,
            selection,
            self.l_max,
            self.threshold.unwrap_or(f64::INFINITY),
        )
    }
}

impl FileConfig {
    pub fn snr_mode(&self) -> Result<SnrMode, tpst::Error> {
        SnrMode::parse(&self.channel.snr_mode)
    }

    pub fn to_experiment(&self, spec: TpstSpec, workers: usize) -> Result<ExperimentConfig, tpst::Error> {
        Ok(ExperimentConfig {
            spec,
            snr_points: self.channel.snr_db.clone(),
            snr_mode: self.snr_mode()?,
            master_seed: self.campaign_params.master_seed,
            max_trials: self.campaign_params.max_trials,
            max_errors: self.campaign_params.max_errors,
            workers,
        })
    }

    /// Hash of everything that determines the results. Worker count and
    /// output path are excluded so reruns at different parallelism stay
    /// byte-identical.
    pub fn result_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.campaign_params.workers = 0;
        canonical.out = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
