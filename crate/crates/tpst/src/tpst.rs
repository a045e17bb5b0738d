//! The twisted-pair superposition code: generator/parity-check construction,
//! encoding, per-layer LLRs and successive cancellation list decoding.
//!
//! Encoding runs three steps over basic codewords v⁽⁰⁾, v⁽¹⁾ of length n:
//! forward superposition w⁽⁰⁾ = v⁽⁰⁾R, c⁽¹⁾ = v⁽¹⁾ + w⁽⁰⁾, then backward
//! superposition c⁽⁰⁾ = v⁽⁰⁾ + c⁽¹⁾S. The block generator form is
//!
//! ```text
//! G = | G₀+G₀RS  G₀R |        H = | H₀      H₀Sᵀ        |
//!     | G₁S      G₁  |            | H₁Rᵀ    H₁+H₁RᵀSᵀ   |
//! ```
//!
//! The decoder lists candidates for v⁽⁰⁾ from the combined LLRs of the
//! backward pair, then for each candidate removes its interference and
//! decodes v⁽¹⁾ over the resulting repetition channel, keeping the most
//! likely reconstruction. A candidate whose empirical divergence exceeds the
//! threshold is accepted immediately.

use crate::binlin::{mat_vec_mul, BitMatrix, BitVector, SelectionMatrix};
use crate::channel::{edf, log_likelihood};
use crate::convcode::{viterbi_tb, ConvSpec, ListEnumerator};
use crate::{Error, Result};

/// A full TPST code: two basic codes of common punctured length n, the
/// transformation R, the selection matrix S, the list size and the early
/// termination threshold (`f64::INFINITY` disables early termination).
#[derive(Debug, Clone)]
pub struct TpstSpec {
    basic0: ConvSpec,
    basic1: ConvSpec,
    transform: BitMatrix,
    selection: SelectionMatrix,
    l_max: usize,
    threshold: f64,
}

impl TpstSpec {
    pub fn new(
        basic0: ConvSpec,
        basic1: ConvSpec,
        transform: BitMatrix,
        selection: SelectionMatrix,
        l_max: usize,
        threshold: f64,
    ) -> Result<Self> {
        let n = basic0.code_len();
        if basic1.code_len() != n {
            return Err(Error::DimensionMismatch {
                context: "basic code lengths",
                expected: n,
                got: basic1.code_len(),
            });
        }
        if transform.rows() != n || transform.cols() != n {
            return Err(Error::DimensionMismatch {
                context: "transformation matrix size",
                expected: n,
                got: transform.rows(),
            });
        }
        if selection.len() != n {
            return Err(Error::DimensionMismatch {
                context: "selection diagonal length",
                expected: n,
                got: selection.len(),
            });
        }
        if l_max < 1 {
            return Err(Error::InvalidParameter {
                name: "l_max",
                reason: "list size must be at least 1".into(),
            });
        }
        if threshold.is_nan() {
            return Err(Error::InvalidParameter {
                name: "threshold",
                reason: "threshold must be a number or +inf".into(),
            });
        }
        Ok(Self {
            basic0,
            basic1,
            transform,
            selection,
            l_max,
            threshold,
        })
    }

    /// Basic code length n (after puncturing).
    pub fn n(&self) -> usize {
        self.basic0.code_len()
    }

    /// TPST block length 2n.
    pub fn block_len(&self) -> usize {
        2 * self.n()
    }

    /// Code dimension k = k₀+k₁.
    pub fn dim(&self) -> usize {
        self.k0() + self.k1()
    }

    pub fn k0(&self) -> usize {
        self.basic0.info_len()
    }

    pub fn k1(&self) -> usize {
        self.basic1.info_len()
    }

    /// Overall rate k/(2n).
    pub fn rate(&self) -> f64 {
        self.dim() as f64 / self.block_len() as f64
    }

    pub fn basic0(&self) -> &ConvSpec {
        &self.basic0
    }

    pub fn basic1(&self) -> &ConvSpec {
        &self.basic1
    }

    pub fn transform(&self) -> &BitMatrix {
        &self.transform
    }

    pub fn selection(&self) -> &SelectionMatrix {
        &self.selection
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_l_max(mut self, l_max: usize) -> Self {
        self.l_max = l_max.max(1);
        self
    }
}

/// Output of the SCL decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// The selected TPST codeword (length 2n).
    pub codeword: BitVector,
    /// The corresponding information word (u⁽⁰⁾ then u⁽¹⁾).
    pub info: BitVector,
    /// Number of Layer-0 candidates examined.
    pub list_used: usize,
    /// Whether the divergence threshold fired before the list was exhausted.
    pub terminated_early: bool,
    /// Log-likelihood of the selected codeword.
    pub final_metric: f64,
}

/// Generator matrix of the punctured basic code: row i is the encoding of
/// the i-th unit info vector.
fn basic_generator(spec: &ConvSpec) -> BitMatrix {
    let k = spec.info_len();
    let rows: Vec<BitVector> = (0..k)
        .map(|i| {
            let mut e = BitVector::zeros(k);
            e.set(i, true);
            spec.encode_basic(&e).expect("unit vector has length k")
        })
        .collect();
    BitMatrix::from_rows(&rows)
}

fn stack_blocks(left_top: &BitMatrix, right_top: &BitMatrix, left_bot: &BitMatrix, right_bot: &BitMatrix) -> BitMatrix {
    let mut rows = Vec::with_capacity(left_top.rows() + left_bot.rows());
    for i in 0..left_top.rows() {
        rows.push(left_top.row(i).concat(&right_top.row(i)));
    }
    for i in 0..left_bot.rows() {
        rows.push(left_bot.row(i).concat(&right_bot.row(i)));
    }
    BitMatrix::from_rows(&rows)
}

/// The (k₀+k₁)×2n generator [[G₀+G₀RS, G₀R], [G₁S, G₁]].
pub fn build_generator(spec: &TpstSpec) -> BitMatrix {
    let g0 = basic_generator(&spec.basic0);
    let g1 = basic_generator(&spec.basic1);
    let s = spec.selection.to_matrix();
    let g0r = g0.mul(&spec.transform);
    let top_left = g0.add(&g0r.mul(&s));
    let bot_left = g1.mul(&s);
    stack_blocks(&top_left, &g0r, &bot_left, &g1)
}

/// The (2n−k)×2n parity check [[H₀, H₀Sᵀ], [H₁Rᵀ, H₁+H₁RᵀSᵀ]], with Hᵢ the
/// nullspace of the basic generator Gᵢ.
pub fn build_parity(spec: &TpstSpec) -> BitMatrix {
    let h0 = basic_generator(&spec.basic0).nullspace();
    let h1 = basic_generator(&spec.basic1).nullspace();
    let st = spec.selection.to_matrix(); // diagonal, so Sᵀ = S
    let rt = spec.transform.transpose();
    let h1rt = h1.mul(&rt);
    stack_blocks(&h0, &h0.mul(&st), &h1rt, &h1.add(&h1rt.mul(&st)))
}

/// Encodes u = (u⁽⁰⁾, u⁽¹⁾) into the length-2n TPST codeword (c⁽⁰⁾, c⁽¹⁾).
pub fn encode(u: &BitVector, spec: &TpstSpec) -> Result<BitVector> {
    if u.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            context: "TPST info word length",
            expected: spec.dim(),
            got: u.len(),
        });
    }
    let k0 = spec.k0();
    let mut u0 = BitVector::zeros(k0);
    for j in 0..k0 {
        u0.set(j, u.get(j));
    }
    let mut u1 = BitVector::zeros(spec.k1());
    for j in 0..spec.k1() {
        u1.set(j, u.get(k0 + j));
    }
    let v0 = spec.basic0.encode_basic(&u0)?;
    let v1 = spec.basic1.encode_basic(&u1)?;
    let (c0, c1) = superpose(&v0, &v1, spec);
    Ok(c0.concat(&c1))
}

/// Forward then backward superposition of two basic codewords.
fn superpose(v0: &BitVector, v1: &BitVector, spec: &TpstSpec) -> (BitVector, BitVector) {
    let w0 = mat_vec_mul(v0, &spec.transform).expect("v0 has length n");
    let c1 = v1.xor(&w0);
    let c0 = v0.xor(&spec.selection.mask(&c1));
    (c0, c1)
}

/// Numerically stable boxplus: the LLR of the XOR of two independent bits,
/// log((1+e^{a+b})/(e^a+e^b)).
pub fn boxplus(a: f64, b: f64) -> f64 {
    fn ln_1p_exp_neg(x: f64) -> f64 {
        (-x).exp().ln_1p()
    }
    a.signum() * b.signum() * a.abs().min(b.abs()) + ln_1p_exp_neg((a + b).abs())
        - ln_1p_exp_neg((a - b).abs())
}

/// LLRs of v⁽⁰⁾ from the received pair, treating c⁽¹⁾ as uniform random
/// interference: the plain channel LLR where sⱼ=0, the boxplus combination
/// of both halves where sⱼ=1.
pub fn llr_layer0(y0: &[f64], y1: &[f64], spec: &TpstSpec, sigma: f64) -> Vec<f64> {
    let n = spec.n();
    assert_eq!(y0.len(), n);
    assert_eq!(y1.len(), n);
    let s = 2.0 / (sigma * sigma);
    (0..n)
        .map(|j| {
            let a = s * y0[j];
            if spec.selection.selected(j) {
                boxplus(a, s * y1[j])
            } else {
                a
            }
        })
        .collect()
}

/// LLRs of v⁽¹⁾ given a Layer-0 candidate `v0_hat` (length n, punctured
/// domain); the interference w⁽⁰⁾ is derived as v̂⁽⁰⁾R.
pub fn llr_layer1(
    y0: &[f64],
    y1: &[f64],
    v0_hat: &BitVector,
    spec: &TpstSpec,
    sigma: f64,
) -> Vec<f64> {
    let w0 = mat_vec_mul(v0_hat, &spec.transform).expect("candidate has length n");
    conditional_llr_layer1(y0, y1, &w0, v0_hat, &spec.selection, sigma)
}

/// Repetition-channel LLRs of v⁽¹⁾ with the interference pair (w⁽⁰⁾, v⁽⁰⁾)
/// known: Λⱼ = (1−2wⱼ)·2y1ⱼ/σ² + sⱼ·(1−2(wⱼ⊕v0ⱼ))·2y0ⱼ/σ².
pub fn conditional_llr_layer1(
    y0: &[f64],
    y1: &[f64],
    w0: &BitVector,
    v0: &BitVector,
    selection: &SelectionMatrix,
    sigma: f64,
) -> Vec<f64> {
    let n = selection.len();
    assert_eq!(y0.len(), n);
    assert_eq!(y1.len(), n);
    assert_eq!(w0.len(), n);
    assert_eq!(v0.len(), n);
    let s = 2.0 / (sigma * sigma);
    (0..n)
        .map(|j| {
            let sign1 = if w0.get(j) { -1.0 } else { 1.0 };
            let mut l = sign1 * s * y1[j];
            if selection.selected(j) {
                let sign0 = if w0.get(j) ^ v0.get(j) { -1.0 } else { 1.0 };
                l += sign0 * s * y0[j];
            }
            l
        })
        .collect()
}

/// Successive cancellation list decoding with early termination.
///
/// Candidates for v⁽⁰⁾ are drawn lazily in exact metric order; each is
/// completed by maximum-likelihood decoding of Layer 1, reconstructed into a
/// TPST codeword and scored. The first candidate whose empirical divergence
/// exceeds the threshold is returned immediately; otherwise the most likely
/// reconstruction wins (ties toward the earlier candidate).
pub fn scl_decode(y: &[f64], spec: &TpstSpec, sigma: f64) -> DecodeResult {
    let n = spec.n();
    assert_eq!(y.len(), 2 * n, "received vector must have length 2n");
    assert!(sigma > 0.0);
    let (y0, y1) = y.split_at(n);

    let lam0 = llr_layer0(y0, y1, spec, sigma);
    let lam0_mother = spec
        .basic0
        .depuncture(&lam0)
        .expect("layer-0 LLRs have length n");
    let candidates =
        ListEnumerator::new(&lam0_mother, &spec.basic0).expect("mother-length LLRs");

    let mut best: Option<DecodeResult> = None;
    let mut examined = 0;
    for entry in candidates.take(spec.l_max) {
        examined += 1;
        let v0 = spec.basic0.puncture_codeword(&entry.codeword);
        let lam1 = llr_layer1(y0, y1, &v0, spec, sigma);
        let lam1_mother = spec
            .basic1
            .depuncture(&lam1)
            .expect("layer-1 LLRs have length n");
        let layer1 = viterbi_tb(&lam1_mother, &spec.basic1).expect("mother-length LLRs");
        let v1 = spec.basic1.puncture_codeword(&layer1.codeword);

        let (c0, c1) = superpose(&v0, &v1, spec);
        let codeword = c0.concat(&c1);
        let info = entry.info.concat(&layer1.info);
        let ll = log_likelihood(y, &codeword, sigma).expect("codeword has length 2n");

        if edf(y, &codeword, sigma) > spec.threshold {
            return DecodeResult {
                codeword,
                info,
                list_used: examined,
                terminated_early: true,
                final_metric: ll,
            };
        }
        match &best {
            Some(b) if b.final_metric >= ll => {}
            _ => {
                best = Some(DecodeResult {
                    codeword,
                    info,
                    list_used: examined,
                    terminated_early: false,
                    final_metric: ll,
                });
            }
        }
    }
    let mut result = best.expect("list decoder yields at least one candidate");
    result.list_used = examined;
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binlin::{build_selection_matrix, sample_structured_matrix, MatrixKind};
    use crate::channel::bpsk_awgn_with;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Rate-1 identity basic code of length 2 (memory 0, single stream).
    fn identity_code(k: usize) -> ConvSpec {
        ConvSpec::new("4", 0, k, None).unwrap()
    }

    fn toy_spec() -> TpstSpec {
        let mut swap = BitMatrix::zeros(2, 2);
        swap.set(0, 1, true);
        swap.set(1, 0, true);
        TpstSpec::new(
            identity_code(2),
            identity_code(2),
            swap,
            build_selection_matrix(2, 1.0).unwrap(),
            1,
            f64::INFINITY,
        )
        .unwrap()
    }

    fn small_spec(alpha: f64, l_max: usize, threshold: f64) -> TpstSpec {
        let basic = ConvSpec::new("7,5", 2, 8, None).unwrap();
        let n = basic.code_len();
        TpstSpec::new(
            basic.clone(),
            basic,
            sample_structured_matrix(n, MatrixKind::Permutation, 17),
            build_selection_matrix(n, alpha).unwrap(),
            l_max,
            threshold,
        )
        .unwrap()
    }

    #[test]
    fn toy_generator_matches_block_form() {
        let g = build_generator(&toy_spec());
        // [[I+P, P], [I, I]] with P the swap.
        let expect = BitMatrix::from_rows(&[
            BitVector::from_bits(&[1, 1, 0, 1]),
            BitVector::from_bits(&[1, 1, 1, 0]),
            BitVector::from_bits(&[1, 0, 1, 0]),
            BitVector::from_bits(&[0, 1, 0, 1]),
        ]);
        assert_eq!(g, expect);
    }

    #[test]
    fn toy_encode_hand_example() {
        let spec = toy_spec();
        let c = encode(&BitVector::from_bits(&[1, 0, 0, 0]), &spec).unwrap();
        assert_eq!(c, BitVector::from_bits(&[1, 1, 0, 1]));
        // Full-rate basic codes leave an empty parity matrix.
        assert_eq!(build_parity(&spec).rows(), 0);
    }

    #[test]
    fn encode_agrees_with_generator_rows() {
        let spec = small_spec(0.75, 4, f64::INFINITY);
        let g = build_generator(&spec);
        assert_eq!(g.rows(), spec.dim());
        assert_eq!(g.cols(), spec.block_len());
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..200 {
            let u = BitVector::random(spec.dim(), &mut rng);
            assert_eq!(encode(&u, &spec).unwrap(), mat_vec_mul(&u, &g).unwrap());
        }
        assert!(encode(&BitVector::zeros(spec.dim() + 1), &spec).is_err());
        assert!(encode(&BitVector::zeros(spec.dim()), &spec).unwrap().is_zero());
    }

    #[test]
    fn generator_parity_duality() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for alpha in [0.0, 0.5, 1.0] {
            for kind in [MatrixKind::Permutation, MatrixKind::DenseRandom] {
                let spec = {
                    let basic = ConvSpec::new("7,5", 2, 8, None).unwrap();
                    TpstSpec::new(
                        basic.clone(),
                        basic,
                        sample_structured_matrix(16, kind, rng.gen()),
                        build_selection_matrix(16, alpha).unwrap(),
                        2,
                        f64::INFINITY,
                    )
                    .unwrap()
                };
                let g = build_generator(&spec);
                let h = build_parity(&spec);
                assert_eq!(h.rows(), spec.block_len() - spec.dim());
                assert_eq!(g.mul(&h.transpose()), BitMatrix::zeros(g.rows(), h.rows()));
                assert_eq!(g.rank(), spec.dim());
                // Every codeword satisfies the parity check.
                for _ in 0..50 {
                    let u = BitVector::random(spec.dim(), &mut rng);
                    let c = encode(&u, &spec).unwrap();
                    assert!(mat_vec_mul(&c, &h.transpose()).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn random_words_violate_parity() {
        let spec = small_spec(0.75, 2, f64::INFINITY);
        let h = build_parity(&spec);
        let ht = h.transpose();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let trials = 10_000;
        let violations = (0..trials)
            .filter(|_| {
                let w = BitVector::random(spec.block_len(), &mut rng);
                !mat_vec_mul(&w, &ht).unwrap().is_zero()
            })
            .count();
        // 2n−k = 16 parity bits: expect all but ~trials/2^16 to violate.
        assert!(violations as f64 >= trials as f64 * (1.0 - 4.0 / 65536.0));
    }

    #[test]
    fn boxplus_closed_form_and_limits() {
        let expect = ((1.0 + (2.0f64).exp()) / ((1.2f64).exp() + (0.8f64).exp())).ln();
        assert!((boxplus(1.2, 0.8) - expect).abs() < 1e-12);
        assert_eq!(boxplus(3.0, 0.0), 0.0);
        assert!((boxplus(2.5, 1e9) - 2.5).abs() < 1e-9);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let a = rng.gen_range(-20.0..20.0);
            let b = rng.gen_range(-20.0..20.0);
            assert!((boxplus(a, b) - boxplus(b, a)).abs() < 1e-12);
            let brute = ((1.0 + (a + b).exp()) / (a.exp() + b.exp())).ln();
            assert!((boxplus(a, b) - brute).abs() < 1e-9, "a={a} b={b}");
        }
    }

    /// Density of y given transmitted bit.
    fn dens(y: f64, bit: bool, sigma: f64) -> f64 {
        let x = if bit { -1.0 } else { 1.0 };
        (-(y - x) * (y - x) / (2.0 * sigma * sigma)).exp()
    }

    #[test]
    fn llr_layer0_matches_four_term_marginalization() {
        let spec = small_spec(0.5, 2, f64::INFINITY);
        let n = spec.n();
        let sigma = 0.9;
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        for _ in 0..100 {
            let y0: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let y1: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let lam = llr_layer0(&y0, &y1, &spec, sigma);
            for j in 0..n {
                let want = if spec.selection().selected(j) {
                    let num = dens(y0[j], false, sigma) * dens(y1[j], false, sigma)
                        + dens(y0[j], true, sigma) * dens(y1[j], true, sigma);
                    let den = dens(y0[j], true, sigma) * dens(y1[j], false, sigma)
                        + dens(y0[j], false, sigma) * dens(y1[j], true, sigma);
                    (num / den).ln()
                } else {
                    2.0 * y0[j] / (sigma * sigma)
                };
                assert!((lam[j] - want).abs() < 1e-9, "j={j}");
            }
        }
    }

    #[test]
    fn llr_layer1_matches_two_hypothesis_oracle() {
        let spec = small_spec(0.5, 2, f64::INFINITY);
        let n = spec.n();
        let sigma = 1.1;
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let y0: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let y1: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let v0 = BitVector::random(n, &mut rng);
            let lam = llr_layer1(&y0, &y1, &v0, &spec, sigma);
            let w0 = mat_vec_mul(&v0, spec.transform()).unwrap();
            for j in 0..n {
                // P(y0, y1 | v1=b) with c1 = b⊕w and c0 = v0⊕s·c1.
                let prob = |b: bool| {
                    let c1 = b ^ w0.get(j);
                    let c0 = v0.get(j) ^ (spec.selection().selected(j) && c1);
                    dens(y1[j], c1, sigma) * dens(y0[j], c0, sigma)
                };
                let want = (prob(false) / prob(true)).ln();
                assert!((lam[j] - want).abs() < 1e-9, "j={j}: {} vs {want}", lam[j]);
            }
        }
    }

    #[test]
    fn llr_layer1_special_cases() {
        let spec = small_spec(1.0, 2, f64::INFINITY);
        let n = spec.n();
        let sigma = 1.0;
        let y0: Vec<f64> = (0..n).map(|j| 0.1 * j as f64 - 0.7).collect();
        let y1: Vec<f64> = (0..n).map(|j| 0.05 * j as f64 + 0.2).collect();
        // Zero candidate: pure repetition combining.
        let lam = llr_layer1(&y0, &y1, &BitVector::zeros(n), &spec, sigma);
        for j in 0..n {
            assert!((lam[j] - 2.0 * (y0[j] + y1[j])).abs() < 1e-12);
        }
        // Known interference flips the sign of the affected half.
        let spec0 = small_spec(0.0, 2, f64::INFINITY);
        let ones = BitVector::from_bits(&vec![1; n]);
        let zeros = BitVector::zeros(n);
        let lam = conditional_llr_layer1(&y0, &y1, &ones, &zeros, spec0.selection(), sigma);
        for j in 0..n {
            assert!((lam[j] + 2.0 * y1[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn scl_noiseless_terminates_on_first_candidate() {
        let spec = small_spec(0.75, 8, 0.9);
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..20 {
            let u = BitVector::random(spec.dim(), &mut rng);
            let c = encode(&u, &spec).unwrap();
            let y: Vec<f64> = c.iter().map(|b| if b { -1.0 } else { 1.0 }).collect();
            let res = scl_decode(&y, &spec, 0.05);
            assert_eq!(res.codeword, c);
            assert_eq!(res.info, u);
            assert_eq!(res.list_used, 1);
            assert!(res.terminated_early);
        }
    }

    #[test]
    fn scl_infinite_threshold_exhausts_list() {
        let spec = small_spec(0.75, 8, f64::INFINITY);
        let h = build_parity(&spec);
        let ht = h.transpose();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..50 {
            let u = BitVector::random(spec.dim(), &mut rng);
            let c = encode(&u, &spec).unwrap();
            let y = bpsk_awgn_with(&c, 0.9, &mut rng);
            let res = scl_decode(&y, &spec, 0.9);
            assert!(!res.terminated_early);
            assert_eq!(res.list_used, 8);
            // Output is always a valid TPST codeword.
            assert!(mat_vec_mul(&res.codeword, &ht).unwrap().is_zero());
            assert_eq!(encode(&res.info, &spec).unwrap(), res.codeword);
        }
    }

    #[test]
    fn scl_list_growth_never_hurts() {
        let base = small_spec(0.75, 1, f64::INFINITY);
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        for _ in 0..30 {
            let u = BitVector::random(base.dim(), &mut rng);
            let c = encode(&u, &base).unwrap();
            let y = bpsk_awgn_with(&c, 1.0, &mut rng);
            let mut prev = f64::NEG_INFINITY;
            for l in [1usize, 2, 4, 16, 64, 256] {
                let res = scl_decode(&y, &base.clone().with_l_max(l), 1.0);
                assert!(
                    res.final_metric >= prev - 1e-12,
                    "likelihood dropped when list grew to {l}"
                );
                prev = res.final_metric;
            }
        }
    }

    #[test]
    fn scl_full_list_errors_imply_better_likelihood() {
        // Whenever the full-list decoder errs, its output beats the
        // transmitted codeword in likelihood (the membership test of the ML
        // lower-bound event).
        let spec = small_spec(1.0, 256, f64::INFINITY);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let sigma = 1.2;
        let mut errors = 0;
        for _ in 0..200 {
            let u = BitVector::random(spec.dim(), &mut rng);
            let c = encode(&u, &spec).unwrap();
            let y = bpsk_awgn_with(&c, sigma, &mut rng);
            let res = scl_decode(&y, &spec, sigma);
            if res.codeword != c {
                errors += 1;
                let ll_tx = log_likelihood(&y, &c, sigma).unwrap();
                assert!(
                    res.final_metric >= ll_tx,
                    "full-list output less likely than transmitted"
                );
            }
        }
        assert!(errors > 0, "test needs some decoding errors to be meaningful");
    }
}
