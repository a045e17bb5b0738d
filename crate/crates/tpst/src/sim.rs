//! Monte Carlo campaigns: end-to-end frame error rate, genie-aided layer
//! bounds, the ML lower bound, threshold calibration and rate allocation.
//!
//! Every trial is a pure function of `(master_seed, campaign, point index,
//! trial index)`, and per-point aggregation only sums integers, so results
//! are bit-identical for any worker count or scheduling order. The stop rule
//! (`max_errors`) is applied by scanning trial outcomes in index order, which
//! keeps the truncation point scheduling-independent as well.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::binlin::BitVector;
use crate::channel::{bpsk_awgn_with, log_likelihood, ChannelParams, SnrMode};
use crate::convcode::{viterbi_tb, ListEnumerator};
use crate::tpst::{conditional_llr_layer1, encode, llr_layer0, scl_decode, TpstSpec};
use crate::{Error, Result};

const TAG_FER: u64 = 1;
const TAG_GENIE0: u64 = 2;
const TAG_GENIE1: u64 = 3;
const TAG_CALIBRATE: u64 = 4;

/// Margin subtracted from a degenerate (or never-rejecting) calibration
/// sample so the returned threshold sits strictly below it.
pub const CALIBRATION_MARGIN: f64 = 1e-3;

/// A Monte Carlo campaign description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub spec: TpstSpec,
    pub snr_points: Vec<f64>,
    pub snr_mode: SnrMode,
    pub master_seed: u64,
    /// Trials per SNR point.
    pub max_trials: usize,
    /// Stop a point early once this many event frames accumulate (0 = never).
    pub max_errors: usize,
    /// Worker threads (0 = one per core).
    pub workers: usize,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.max_trials < 1 {
            return Err(Error::InvalidParameter {
                name: "max_trials",
                reason: "at least one trial is required".into(),
            });
        }
        if self.snr_points.is_empty() {
            return Err(Error::InvalidParameter {
                name: "snr_db",
                reason: "at least one SNR point is required".into(),
            });
        }
        Ok(())
    }

    fn channel(&self, snr_db: f64) -> Result<ChannelParams> {
        ChannelParams::new(snr_db, self.snr_mode, self.spec.rate())
    }
}

/// Frame-error campaign result for one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct FerRecord {
    pub snr_db: f64,
    pub trials: usize,
    pub frame_errors: usize,
    pub fer: f64,
    pub avg_list_size: f64,
    pub early_term_rate: f64,
    /// Trials where the output differed from the transmitted codeword and
    /// was strictly more likely.
    pub e2_count: usize,
}

impl FerRecord {
    pub fn std_err(&self) -> f64 {
        binomial_std_err(self.fer, self.trials)
    }
}

/// Event-frequency estimate for one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRecord {
    pub snr_db: f64,
    pub trials: usize,
    pub event_count: usize,
    pub estimate: f64,
    pub std_err: f64,
}

impl BoundRecord {
    fn from_events(snr_db: f64, events: &[bool]) -> Self {
        let trials = events.len();
        let event_count = events.iter().filter(|&&e| e).count();
        let estimate = event_count as f64 / trials as f64;
        Self {
            snr_db,
            trials,
            event_count,
            estimate,
            std_err: binomial_std_err(estimate, trials),
        }
    }
}

fn binomial_std_err(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_seed(master: u64, tag: u64, point: u64, trial: u64) -> u64 {
    let mut s = splitmix64(master);
    s = splitmix64(s ^ tag);
    s = splitmix64(s ^ point);
    splitmix64(s ^ trial)
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter {
            name: "workers",
            reason: e.to_string(),
        })
}

/// Runs trials in fixed chunks, scanning outcomes in trial order so the
/// early-stop truncation point does not depend on scheduling.
fn run_trials<S, F, E>(
    pool: &rayon::ThreadPool,
    max_trials: usize,
    max_errors: usize,
    is_event: E,
    trial: F,
) -> Vec<S>
where
    S: Send,
    F: Fn(usize) -> S + Sync,
    E: Fn(&S) -> bool,
{
    const CHUNK: usize = 256;
    let mut out = Vec::with_capacity(max_trials.min(1 << 20));
    let mut events = 0usize;
    let mut next = 0usize;
    while next < max_trials {
        let hi = (next + CHUNK).min(max_trials);
        let mut chunk: Vec<S> = pool.install(|| (next..hi).into_par_iter().map(&trial).collect());
        for (i, s) in chunk.iter().enumerate() {
            if is_event(s) {
                events += 1;
                if max_errors > 0 && events >= max_errors {
                    chunk.truncate(i + 1);
                    out.append(&mut chunk);
                    return out;
                }
            }
        }
        out.append(&mut chunk);
        next = hi;
    }
    out
}

struct FerTrial {
    error: bool,
    e2: bool,
    list_used: usize,
    early: bool,
}

/// End-to-end frame error rate of the SCL decoder, one record per SNR point.
pub fn simulate_fer(config: &ExperimentConfig) -> Result<Vec<FerRecord>> {
    config.validate()?;
    let pool = build_pool(config.workers)?;
    let spec = &config.spec;
    let mut records = Vec::with_capacity(config.snr_points.len());
    for (pi, &snr_db) in config.snr_points.iter().enumerate() {
        let sigma = config.channel(snr_db)?.sigma();
        let stats = run_trials(
            &pool,
            config.max_trials,
            config.max_errors,
            |s: &FerTrial| s.error,
            |t| {
                let seed = derive_seed(config.master_seed, TAG_FER, pi as u64, t as u64);
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let u = BitVector::random(spec.dim(), &mut rng);
                let c = encode(&u, spec).expect("info word has dimension k");
                let y = bpsk_awgn_with(&c, sigma, &mut rng);
                let res = scl_decode(&y, spec, sigma);
                let error = res.codeword != c;
                let e2 = error
                    && res.final_metric
                        > log_likelihood(&y, &c, sigma).expect("lengths match");
                FerTrial {
                    error,
                    e2,
                    list_used: res.list_used,
                    early: res.terminated_early,
                }
            },
        );
        let trials = stats.len();
        let frame_errors = stats.iter().filter(|s| s.error).count();
        let e2_count = stats.iter().filter(|s| s.e2).count();
        let list_sum: u64 = stats.iter().map(|s| s.list_used as u64).sum();
        let early = stats.iter().filter(|s| s.early).count();
        records.push(FerRecord {
            snr_db,
            trials,
            frame_errors,
            fer: frame_errors as f64 / trials as f64,
            avg_list_size: list_sum as f64 / trials as f64,
            early_term_rate: early as f64 / trials as f64,
            e2_count,
        });
    }
    Ok(records)
}

/// Genie-aided Layer-0 bound P(E₀): the transmitted basic codeword is missed
/// by the size-`l_max` list over the binary interference channel, where the
/// interfering half is drawn i.u.d. as the layer LLRs assume.
pub fn genie_bound_layer0(config: &ExperimentConfig, l_max: usize) -> Result<Vec<BoundRecord>> {
    config.validate()?;
    if l_max < 1 {
        return Err(Error::InvalidParameter {
            name: "l_max",
            reason: "list size must be at least 1".into(),
        });
    }
    let pool = build_pool(config.workers)?;
    let spec = &config.spec;
    let n = spec.n();
    let mut records = Vec::with_capacity(config.snr_points.len());
    for (pi, &snr_db) in config.snr_points.iter().enumerate() {
        let sigma = config.channel(snr_db)?.sigma();
        let events = run_trials(
            &pool,
            config.max_trials,
            config.max_errors,
            |&e: &bool| e,
            |t| {
                let seed = derive_seed(config.master_seed, TAG_GENIE0, pi as u64, t as u64);
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let u0 = BitVector::random(spec.k0(), &mut rng);
                let v0 = spec.basic0().encode_basic(&u0).expect("length k0");
                let c1 = BitVector::random(n, &mut rng);
                let c0 = v0.xor(&spec.selection().mask(&c1));
                let y = bpsk_awgn_with(&c0.concat(&c1), sigma, &mut rng);
                let (y0, y1) = y.split_at(n);
                let lam = llr_layer0(y0, y1, spec, sigma);
                let lam_mother = spec.basic0().depuncture(&lam).expect("length n");
                let found = ListEnumerator::new(&lam_mother, spec.basic0())
                    .expect("mother length")
                    .take(l_max)
                    .any(|e| e.info == u0);
                !found
            },
        );
        records.push(BoundRecord::from_events(snr_db, &events));
    }
    Ok(records)
}

/// Genie-aided Layer-1 bound P(E₁): maximum-likelihood decoding of the basic
/// code over the repetition channel with the interference pair known.
pub fn genie_bound_layer1(config: &ExperimentConfig) -> Result<Vec<BoundRecord>> {
    config.validate()?;
    let pool = build_pool(config.workers)?;
    let spec = &config.spec;
    let n = spec.n();
    let mut records = Vec::with_capacity(config.snr_points.len());
    for (pi, &snr_db) in config.snr_points.iter().enumerate() {
        let sigma = config.channel(snr_db)?.sigma();
        let events = run_trials(
            &pool,
            config.max_trials,
            config.max_errors,
            |&e: &bool| e,
            |t| {
                let seed = derive_seed(config.master_seed, TAG_GENIE1, pi as u64, t as u64);
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let u1 = BitVector::random(spec.k1(), &mut rng);
                let v1 = spec.basic1().encode_basic(&u1).expect("length k1");
                // Known interference; uniform rather than structured, which
                // is exactly why this bound is blind to R.
                let w0 = BitVector::random(n, &mut rng);
                let v0 = BitVector::random(n, &mut rng);
                let c1 = v1.xor(&w0);
                let c0 = v0.xor(&spec.selection().mask(&c1));
                let y = bpsk_awgn_with(&c0.concat(&c1), sigma, &mut rng);
                let (y0, y1) = y.split_at(n);
                let lam = conditional_llr_layer1(y0, y1, &w0, &v0, spec.selection(), sigma);
                let lam_mother = spec.basic1().depuncture(&lam).expect("length n");
                let decoded = viterbi_tb(&lam_mother, spec.basic1()).expect("mother length");
                decoded.info != u1
            },
        );
        records.push(BoundRecord::from_events(snr_db, &events));
    }
    Ok(records)
}

/// ML lower bound P(E₂): frequency of the full SCL pipeline (early
/// termination disabled) emitting a wrong codeword strictly more likely than
/// the transmitted one. Shares trial seeds with [`simulate_fer`], so the
/// estimate never exceeds the matching FER.
pub fn ml_lower_bound(config: &ExperimentConfig) -> Result<Vec<BoundRecord>> {
    let mut cfg = config.clone();
    cfg.spec = cfg.spec.with_threshold(f64::INFINITY);
    let records = simulate_fer(&cfg)?;
    Ok(records
        .into_iter()
        .map(|r| BoundRecord {
            snr_db: r.snr_db,
            trials: r.trials,
            event_count: r.e2_count,
            estimate: r.e2_count as f64 / r.trials as f64,
            std_err: binomial_std_err(r.e2_count as f64 / r.trials as f64, r.trials),
        })
        .collect())
}

/// Learns the early-termination threshold as the `epsilon`-quantile of the
/// empirical divergence of the true codeword, pooled over all configured SNR
/// points (so the true codeword is rejected with probability ≈ `epsilon`).
pub fn calibrate_threshold(config: &ExperimentConfig, epsilon: f64) -> Result<f64> {
    config.validate()?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: format!("quantile must lie strictly inside (0, 1), got {epsilon}"),
        });
    }
    let pool = build_pool(config.workers)?;
    let spec = &config.spec;
    let mut samples: Vec<f64> = Vec::with_capacity(config.max_trials * config.snr_points.len());
    for (pi, &snr_db) in config.snr_points.iter().enumerate() {
        let sigma = config.channel(snr_db)?.sigma();
        let ds = run_trials(
            &pool,
            config.max_trials,
            0,
            |_: &f64| false,
            |t| {
                let seed = derive_seed(config.master_seed, TAG_CALIBRATE, pi as u64, t as u64);
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let u = BitVector::random(spec.dim(), &mut rng);
                let c = encode(&u, spec).expect("dimension k");
                let y = bpsk_awgn_with(&c, sigma, &mut rng);
                crate::channel::edf(&y, &c, sigma)
            },
        );
        samples.extend(ds);
    }
    samples.sort_by(f64::total_cmp);
    let first = *samples.first().expect("at least one trial");
    let last = *samples.last().expect("at least one trial");
    if first == last {
        return Ok(first - CALIBRATION_MARGIN);
    }
    let m = (epsilon * samples.len() as f64).floor() as usize;
    Ok(if m == 0 {
        first - CALIBRATION_MARGIN
    } else {
        samples[m.min(samples.len()) - 1]
    })
}

/// One row of an off-line genie-bound table.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTableRow {
    pub k: usize,
    pub l_max: usize,
    pub snr_db: f64,
    pub trials: usize,
    pub events: usize,
    pub estimate: f64,
    pub std_err: f64,
}

pub const BOUND_TABLE_HEADER: &str = "k,l_max,snr_db,trials,events,estimate,std_err";

/// Serializes bound records into the table CSV format.
pub fn bound_records_to_csv(records: &[BoundRecord], k: usize, l_max: usize) -> String {
    let mut s = String::from(BOUND_TABLE_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{:.6e},{:.6e}\n",
            k, l_max, r.snr_db, r.trials, r.event_count, r.estimate, r.std_err
        ));
    }
    s
}

pub const FER_CSV_HEADER: &str =
    "snr_db,trials,frame_errors,fer,avg_list_size,early_term_rate,e2_count,std_err";

/// Serializes FER records with the fixed column set.
pub fn fer_records_to_csv(records: &[FerRecord]) -> String {
    let mut s = String::from(FER_CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&format!(
            "{},{},{},{:.6e},{:.6e},{:.6e},{},{:.6e}\n",
            r.snr_db,
            r.trials,
            r.frame_errors,
            r.fer,
            r.avg_list_size,
            r.early_term_rate,
            r.e2_count,
            r.std_err()
        ));
    }
    s
}

/// Parses a bound table CSV (comment lines starting with `#` are skipped).
pub fn parse_bound_table(text: &str) -> Result<Vec<BoundTableRow>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == BOUND_TABLE_HEADER {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse(format!(
                "bound table line {}: expected 7 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse_err = |what: &str| Error::Parse(format!("bound table line {}: bad {what}", lineno + 1));
        rows.push(BoundTableRow {
            k: fields[0].parse().map_err(|_| parse_err("k"))?,
            l_max: fields[1].parse().map_err(|_| parse_err("l_max"))?,
            snr_db: fields[2].parse().map_err(|_| parse_err("snr_db"))?,
            trials: fields[3].parse().map_err(|_| parse_err("trials"))?,
            events: fields[4].parse().map_err(|_| parse_err("events"))?,
            estimate: fields[5].parse().map_err(|_| parse_err("estimate"))?,
            std_err: fields[6].parse().map_err(|_| parse_err("std_err"))?,
        });
    }
    Ok(rows)
}

/// Result of the rate-allocation procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct RateAllocation {
    pub k0: usize,
    pub k1: usize,
    pub l_max: usize,
    /// SNR (dB) at which the chosen Layer-1 code meets the target.
    pub layer1_snr_db: f64,
    /// SNR (dB) at which the chosen Layer-0 list configuration meets it.
    pub layer0_snr_db: f64,
}

/// Smallest SNR in the rows at which the estimate meets the target.
fn achieving_snr(rows: &[&BoundTableRow], target: f64) -> Option<f64> {
    rows.iter()
        .filter(|r| r.estimate <= target)
        .map(|r| r.snr_db)
        .min_by(f64::total_cmp)
}

/// Allocates layer dimensions and the list size for a target dimension `k`.
///
/// For each candidate `k₁` with a Layer-1 (repetition channel) achieving SNR,
/// the complementary `k₀ = k − k₁` must reach the target over the binary
/// interference channel with some tabulated list size at an SNR no more than
/// `snr_margin_db` above Layer 1's. Among feasible pairs the lowest Layer-1
/// achieving SNR wins, with the smallest sufficient list size.
pub fn rate_allocate(
    layer1_table: &[BoundTableRow],
    layer0_table: &[BoundTableRow],
    k: usize,
    target_fer: f64,
    snr_margin_db: f64,
) -> Result<RateAllocation> {
    if layer1_table.is_empty() || layer0_table.is_empty() {
        return Err(Error::Infeasible("empty bound table".into()));
    }
    let mut k1_values: Vec<usize> = layer1_table.iter().map(|r| r.k).collect();
    k1_values.sort_unstable();
    k1_values.dedup();

    let mut feasible: Vec<RateAllocation> = Vec::new();
    let mut best_gap: Option<(usize, f64)> = None;
    for &k1 in &k1_values {
        if k1 >= k {
            continue;
        }
        let rows1: Vec<&BoundTableRow> = layer1_table.iter().filter(|r| r.k == k1).collect();
        let Some(snr1) = achieving_snr(&rows1, target_fer) else {
            continue;
        };
        let k0 = k - k1;
        let mut l_values: Vec<usize> = layer0_table
            .iter()
            .filter(|r| r.k == k0)
            .map(|r| r.l_max)
            .collect();
        l_values.sort_unstable();
        l_values.dedup();
        for &l in &l_values {
            let rows0: Vec<&BoundTableRow> = layer0_table
                .iter()
                .filter(|r| r.k == k0 && r.l_max == l)
                .collect();
            if let Some(snr0) = achieving_snr(&rows0, target_fer) {
                let gap = snr0 - (snr1 + snr_margin_db);
                if gap <= 0.0 {
                    feasible.push(RateAllocation {
                        k0,
                        k1,
                        l_max: l,
                        layer1_snr_db: snr1,
                        layer0_snr_db: snr0,
                    });
                    break;
                }
                match best_gap {
                    Some((_, g)) if g <= gap => {}
                    _ => best_gap = Some((k1, gap)),
                }
            }
        }
    }
    feasible
        .into_iter()
        .min_by(|a, b| {
            a.layer1_snr_db
                .total_cmp(&b.layer1_snr_db)
                .then(a.l_max.cmp(&b.l_max))
                .then(a.k1.cmp(&b.k1))
        })
        .ok_or_else(|| match best_gap {
            Some((k1, gap)) => Error::Infeasible(format!(
                "no (k0, l_max) reaches the target within the margin; closest is k1={k1} \
                 with layer-0 achieving SNR {gap:.2} dB above the allowance"
            )),
            None => Error::Infeasible(format!(
                "no table entry reaches target frame error rate {target_fer:e}"
            )),
        })
}
