//! Tail-biting convolutional basic codes.
//!
//! Encoding is feedforward with the encoder state initialized to the last
//! `m` information bits, so every output stream is the cyclic convolution of
//! the input with that stream's generator taps. Decoding is exact over the
//! tail-biting trellis: [`viterbi_tb`] returns the global correlation-metric
//! maximizer and [`list_viterbi_tb`] the global top-ℓ, obtained by a serial
//! list Viterbi search per start state merged through one best-first queue.
//!
//! Generators are written in the left-justified octal convention of the
//! classic TBCC tables: the octal digits are expanded to bits (three per
//! digit, most significant first) and the first `m+1` bits are the
//! coefficients of D⁰…Dᵐ. For memory 4, `(56)₈ = 101110₂` is the polynomial
//! `1+D²+D³+D⁴` and `(62)₈ = 110010₂` is `1+D+D⁴`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::binlin::BitVector;
use crate::{Error, Result};

/// A periodic puncturing pattern applied cyclically over the serialized
/// mother codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuncturePattern {
    keep: Vec<bool>,
}

impl PuncturePattern {
    /// Pattern from 0/1 keep flags; at least one position per period must be
    /// kept.
    pub fn new(keep_mask: &[u8]) -> Result<Self> {
        if keep_mask.is_empty() || keep_mask.iter().all(|&b| b == 0) {
            return Err(Error::InvalidParameter {
                name: "keep_mask",
                reason: "puncturing pattern must keep at least one position per period".into(),
            });
        }
        Ok(Self {
            keep: keep_mask.iter().map(|&b| b & 1 == 1).collect(),
        })
    }

    pub fn all_keep() -> Self {
        Self { keep: vec![true] }
    }

    /// Pattern of period `mother_len` that drops `mother_len − target_len`
    /// positions spread as uniformly as possible (the same floor-counter rule
    /// used for the selection matrix, applied to the dropped positions).
    pub fn homogeneous(mother_len: usize, target_len: usize) -> Result<Self> {
        if target_len == 0 || target_len > mother_len {
            return Err(Error::InvalidParameter {
                name: "target_len",
                reason: format!("punctured length {target_len} not in [1, {mother_len}]"),
            });
        }
        let drops = mother_len - target_len;
        let keep: Vec<bool> = (0..mother_len)
            .map(|j| !((j + 1) * drops / mother_len > j * drops / mother_len))
            .collect();
        Ok(Self { keep })
    }

    pub fn period(&self) -> usize {
        self.keep.len()
    }

    #[inline]
    pub fn keeps(&self, j: usize) -> bool {
        self.keep[j % self.keep.len()]
    }

    /// Length after puncturing a codeword of `mother_len` bits.
    pub fn punctured_len(&self, mother_len: usize) -> usize {
        (0..mother_len).filter(|&j| self.keeps(j)).count()
    }
}

/// Keeps exactly the positions whose cyclic keep flag is set, in order.
pub fn puncture(c: &BitVector, pattern: &PuncturePattern) -> BitVector {
    let mut out = BitVector::zeros(pattern.punctured_len(c.len()));
    let mut k = 0;
    for j in 0..c.len() {
        if pattern.keeps(j) {
            out.set(k, c.get(j));
            k += 1;
        }
    }
    out
}

/// Spreads punctured-domain LLRs back to mother length; dropped positions
/// become erasures (LLR exactly 0).
pub fn depuncture_llr(
    llr: &[f64],
    pattern: &PuncturePattern,
    mother_len: usize,
) -> Result<Vec<f64>> {
    let expected = pattern.punctured_len(mother_len);
    if llr.len() != expected {
        return Err(Error::DimensionMismatch {
            context: "punctured LLR length",
            expected,
            got: llr.len(),
        });
    }
    let mut out = vec![0.0; mother_len];
    let mut k = 0;
    for (j, slot) in out.iter_mut().enumerate() {
        if pattern.keeps(j) {
            *slot = llr[k];
            k += 1;
        }
    }
    Ok(out)
}

/// A tail-biting convolutional basic code: feedforward generators, memory,
/// information length and an optional puncturing pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvSpec {
    taps: Vec<u32>,
    memory: usize,
    info_len: usize,
    puncture: Option<PuncturePattern>,
}

impl ConvSpec {
    /// Builds a spec from octal generators such as `"56,62"`.
    pub fn new(
        generators: &str,
        memory: usize,
        info_len: usize,
        puncture: Option<PuncturePattern>,
    ) -> Result<Self> {
        Self::from_taps(parse_octal_generators(generators, memory)?, memory, info_len, puncture)
    }

    /// Builds a spec from raw tap masks; bit `i` of a mask is the coefficient
    /// of Dⁱ.
    pub fn from_taps(
        taps: Vec<u32>,
        memory: usize,
        info_len: usize,
        puncture: Option<PuncturePattern>,
    ) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidParameter {
                name: "generators",
                reason: "at least one generator polynomial is required".into(),
            });
        }
        if memory >= 30 {
            return Err(Error::InvalidParameter {
                name: "memory",
                reason: format!("memory {memory} is out of range"),
            });
        }
        for &t in &taps {
            if t == 0 || t >> (memory + 1) != 0 {
                return Err(Error::InvalidParameter {
                    name: "generators",
                    reason: format!("tap mask {t:#b} is zero or exceeds degree {memory}"),
                });
            }
        }
        if info_len < memory.max(1) {
            return Err(Error::InvalidParameter {
                name: "info_len",
                reason: format!(
                    "tail-biting needs info_len ≥ memory ({info_len} < {memory})"
                ),
            });
        }
        Ok(Self {
            taps,
            memory,
            info_len,
            puncture,
        })
    }

    pub fn taps(&self) -> &[u32] {
        &self.taps
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn info_len(&self) -> usize {
        self.info_len
    }

    pub fn puncture_pattern(&self) -> Option<&PuncturePattern> {
        self.puncture.as_ref()
    }

    /// Output bits per input bit.
    pub fn streams(&self) -> usize {
        self.taps.len()
    }

    /// Serialized codeword length before puncturing.
    pub fn mother_len(&self) -> usize {
        self.streams() * self.info_len
    }

    /// Codeword length after puncturing (the basic code length `n`).
    pub fn code_len(&self) -> usize {
        match &self.puncture {
            Some(p) => p.punctured_len(self.mother_len()),
            None => self.mother_len(),
        }
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory
    }

    /// Encodes and punctures in one step.
    pub fn encode_basic(&self, u: &BitVector) -> Result<BitVector> {
        let mother = encode_tbcc(u, self)?;
        Ok(match &self.puncture {
            Some(p) => puncture(&mother, p),
            None => mother,
        })
    }

    /// Spreads length-`code_len` LLRs back over the mother codeword.
    pub fn depuncture(&self, llr: &[f64]) -> Result<Vec<f64>> {
        match &self.puncture {
            Some(p) => depuncture_llr(llr, p, self.mother_len()),
            None => {
                if llr.len() != self.mother_len() {
                    return Err(Error::DimensionMismatch {
                        context: "LLR length",
                        expected: self.mother_len(),
                        got: llr.len(),
                    });
                }
                Ok(llr.to_vec())
            }
        }
    }

    /// Punctures a mother-length codeword down to `code_len`.
    pub fn puncture_codeword(&self, c: &BitVector) -> BitVector {
        match &self.puncture {
            Some(p) => puncture(c, p),
            None => c.clone(),
        }
    }
}

/// Parses comma-separated octal generators in the left-justified convention.
pub fn parse_octal_generators(s: &str, memory: usize) -> Result<Vec<u32>> {
    s.split(',')
        .map(|tok| octal_to_taps(tok.trim(), memory))
        .collect()
}

fn octal_to_taps(token: &str, memory: usize) -> Result<u32> {
    if token.is_empty() {
        return Err(Error::InvalidParameter {
            name: "generators",
            reason: "empty generator token".into(),
        });
    }
    let mut bits = Vec::with_capacity(token.len() * 3);
    for c in token.chars() {
        let d = c.to_digit(8).ok_or_else(|| Error::InvalidParameter {
            name: "generators",
            reason: format!("invalid octal digit `{c}` in generator `{token}`"),
        })?;
        bits.push(d >> 2 & 1);
        bits.push(d >> 1 & 1);
        bits.push(d & 1);
    }
    if bits.len() < memory + 1 {
        return Err(Error::InvalidParameter {
            name: "generators",
            reason: format!("generator `{token}` has fewer than {} taps", memory + 1),
        });
    }
    if bits[memory + 1..].iter().any(|&b| b != 0) {
        return Err(Error::InvalidParameter {
            name: "generators",
            reason: format!("generator `{token}` has degree greater than memory {memory}"),
        });
    }
    let mut mask = 0u32;
    for (i, &b) in bits[..=memory].iter().enumerate() {
        mask |= b << i;
    }
    Ok(mask)
}

/// Tail-biting encoding: each output stream is the cyclic convolution of the
/// info word with that stream's taps; streams are interleaved per input bit.
pub fn encode_tbcc(u: &BitVector, spec: &ConvSpec) -> Result<BitVector> {
    if u.len() != spec.info_len {
        return Err(Error::DimensionMismatch {
            context: "info word length",
            expected: spec.info_len,
            got: u.len(),
        });
    }
    let k = spec.info_len;
    let m = spec.memory;
    let n0 = spec.streams();
    let mut out = BitVector::zeros(n0 * k);
    // After the shift below, window bit i = u_{t−i} (wrapped cyclically);
    // seed it with the state before step 0, i.e. bit j = u_{k−1−j}.
    let mut window: u32 = 0;
    for j in 0..m {
        window |= u32::from(u.get(k - 1 - j)) << j;
    }
    for t in 0..k {
        window = (window << 1 | u32::from(u.get(t))) & ((1 << (m + 1)) - 1);
        for (s, &taps) in spec.taps.iter().enumerate() {
            out.set(t * n0 + s, (taps & window).count_ones() & 1 == 1);
        }
    }
    Ok(out)
}

/// One candidate from the (list) Viterbi decoder: a mother-length codeword,
/// its info word and the correlation metric Σⱼ (1−2cⱼ)·Λⱼ.
#[derive(Debug, Clone)]
pub struct ListEntry {
    pub codeword: BitVector,
    pub info: BitVector,
    pub metric: f64,
}

struct Node {
    /// Correlation metric of the best full path through this node.
    f: f64,
    /// Full info word: committed bits up to `t`, greedy-best completion after.
    word: BitVector,
    t: usize,
    state: usize,
    start: usize,
    /// Metric accumulated over the committed prefix.
    g: f64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap: higher metric first, then lexicographically smaller word.
        self.f
            .total_cmp(&other.f)
            .then_with(|| other.word.cmp_lex(&self.word))
            .then_with(|| self.t.cmp(&other.t))
            .then_with(|| self.state.cmp(&other.state))
            .then_with(|| self.start.cmp(&other.start))
    }
}

/// Lazy exact enumeration of tail-biting codewords in non-increasing metric
/// order (ties broken toward the lexicographically smallest info word).
///
/// For every start state a backward Viterbi pass yields the exact best
/// completion metric from any trellis node back to that state. A best-first
/// queue over partial paths keyed by prefix metric plus completion metric
/// then emits full paths in global order; each queue entry carries the full
/// info word of its best completion so that metric ties resolve
/// deterministically.
pub struct ListEnumerator<'a> {
    spec: &'a ConvSpec,
    /// Branch metrics, indexed `t * 2^(m+1) + window`.
    bm: Vec<f64>,
    /// Per start state: completion metrics, indexed `t * 2^m + state`.
    h: Vec<Vec<f64>>,
    heap: BinaryHeap<Node>,
}

impl<'a> ListEnumerator<'a> {
    /// `llr` must be mother length (already depunctured).
    pub fn new(llr: &[f64], spec: &'a ConvSpec) -> Result<Self> {
        if llr.len() != spec.mother_len() {
            return Err(Error::DimensionMismatch {
                context: "LLR length (mother codeword)",
                expected: spec.mother_len(),
                got: llr.len(),
            });
        }
        let k = spec.info_len;
        let m = spec.memory;
        let nstates = 1 << m;
        let nwindows = 1 << (m + 1);
        let n0 = spec.streams();

        let mut bm = vec![0.0; k * nwindows];
        for t in 0..k {
            for w in 0..nwindows {
                let mut acc = 0.0;
                for (s, &taps) in spec.taps.iter().enumerate() {
                    let bit = (taps & w as u32).count_ones() & 1 == 1;
                    acc += if bit { -llr[t * n0 + s] } else { llr[t * n0 + s] };
                }
                bm[t * nwindows + w] = acc;
            }
        }

        let mut h = Vec::with_capacity(nstates);
        for start in 0..nstates {
            let mut table = vec![f64::NEG_INFINITY; (k + 1) * nstates];
            table[k * nstates + start] = 0.0;
            for t in (0..k).rev() {
                for q in 0..nstates {
                    let mut best = f64::NEG_INFINITY;
                    for b in 0..2usize {
                        let w = q << 1 | b;
                        let next = w & (nstates - 1);
                        let cand = bm[t * nwindows + w] + table[(t + 1) * nstates + next];
                        if cand > best {
                            best = cand;
                        }
                    }
                    table[t * nstates + q] = best;
                }
            }
            h.push(table);
        }

        let mut this = Self {
            spec,
            bm,
            h,
            heap: BinaryHeap::new(),
        };
        for start in 0..nstates {
            let f = this.h[start][start];
            if f > f64::NEG_INFINITY {
                let mut word = BitVector::zeros(k);
                this.complete(&mut word, 0, start, start);
                this.heap.push(Node {
                    f,
                    word,
                    t: 0,
                    state: start,
                    start,
                    g: 0.0,
                });
            }
        }
        Ok(this)
    }

    /// Writes the greedy-best completion (ties toward bit 0) into
    /// `word[t..]`, starting from `state` and closing at `start`.
    fn complete(&self, word: &mut BitVector, t: usize, mut state: usize, start: usize) {
        let k = self.spec.info_len;
        let nstates = self.spec.num_states();
        let nwindows = nstates << 1;
        let table = &self.h[start];
        for tt in t..k {
            let w0 = state << 1;
            let w1 = w0 | 1;
            let v0 = self.bm[tt * nwindows + w0] + table[(tt + 1) * nstates + (w0 & (nstates - 1))];
            let v1 = self.bm[tt * nwindows + w1] + table[(tt + 1) * nstates + (w1 & (nstates - 1))];
            let b = v1 > v0;
            word.set(tt, b);
            state = (if b { w1 } else { w0 }) & (nstates - 1);
        }
    }
}

impl Iterator for ListEnumerator<'_> {
    type Item = ListEntry;

    fn next(&mut self) -> Option<ListEntry> {
        let k = self.spec.info_len;
        let nstates = self.spec.num_states();
        let nwindows = nstates << 1;
        while let Some(node) = self.heap.pop() {
            if node.t == k {
                let codeword = encode_tbcc(&node.word, self.spec).expect("word has length k");
                return Some(ListEntry {
                    codeword,
                    info: node.word,
                    metric: node.f,
                });
            }
            let bit = node.word.get(node.t);
            let w_follow = node.state << 1 | usize::from(bit);
            let w_dev = node.state << 1 | usize::from(!bit);

            // Deviating child: fresh completion from the sibling branch.
            let dev_state = w_dev & (nstates - 1);
            let dev_h = self.h[node.start][(node.t + 1) * nstates + dev_state];
            if dev_h > f64::NEG_INFINITY {
                let g = node.g + self.bm[node.t * nwindows + w_dev];
                // Clamp: the sibling can never beat this node's own bound.
                let f = (g + dev_h).min(node.f);
                let mut word = node.word.clone();
                word.set(node.t, !bit);
                self.complete(&mut word, node.t + 1, dev_state, node.start);
                self.heap.push(Node {
                    f,
                    word,
                    t: node.t + 1,
                    state: dev_state,
                    start: node.start,
                    g,
                });
            }

            // Following child keeps the same target word and bound.
            self.heap.push(Node {
                f: node.f,
                word: node.word,
                t: node.t + 1,
                state: w_follow & (nstates - 1),
                start: node.start,
                g: node.g + self.bm[node.t * nwindows + w_follow],
            });
        }
        None
    }
}

/// Exact maximum-correlation tail-biting decoding; ties resolve to the
/// lexicographically smallest info word.
pub fn viterbi_tb(llr: &[f64], spec: &ConvSpec) -> Result<ListEntry> {
    let mut e = ListEnumerator::new(llr, spec)?;
    Ok(e.next().expect("a tail-biting code is never empty"))
}

/// Exact top-`l_max` tail-biting codewords in non-increasing metric order.
pub fn list_viterbi_tb(llr: &[f64], spec: &ConvSpec, l_max: usize) -> Result<Vec<ListEntry>> {
    if l_max < 1 {
        return Err(Error::InvalidParameter {
            name: "l_max",
            reason: "list size must be at least 1".into(),
        });
    }
    Ok(ListEnumerator::new(llr, spec)?.take(l_max).collect())
}
