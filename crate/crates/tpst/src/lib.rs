//! Twisted-pair superposition transmission (TPST) codes.
//!
//! A TPST code mixes a pair of length-`n` basic codes into one block code of
//! length `2n`: the Layer-0 codeword is passed through a random transformation
//! `R` and superimposed onto Layer 1 (forward superposition), and the
//! resulting Layer-1 sequence is masked by a diagonal selection matrix `S` and
//! superimposed back onto Layer 0 (backward superposition). Decoding runs a
//! successive cancellation list decoder driven by an exact list Viterbi
//! decoder of the Layer-0 basic code, with optional early termination on an
//! empirical divergence threshold.
//!
//! The crate is organized along the natural seams of the scheme:
//!
//! - [`binlin`]: bit-packed GF(2) vectors and matrices, the random
//!   transformation and the selection matrix.
//! - [`convcode`]: tail-biting convolutional basic codes with periodic
//!   puncturing, exact Viterbi and exact list Viterbi decoding.
//! - [`channel`]: BPSK over AWGN, channel LLRs, codeword log-likelihood and
//!   the empirical divergence function.
//! - [`tpst`]: the TPST code itself: generator/parity construction,
//!   encoding, layer LLRs and the SCL decoder.
//! - [`sim`]: Monte Carlo campaigns: frame error rate, genie-aided layer
//!   bounds, the ML lower bound, threshold calibration and rate allocation.

pub mod binlin;
pub mod channel;
pub mod convcode;
pub mod sim;
pub mod tpst;

pub use binlin::{BitMatrix, BitVector, MatrixKind, SelectionMatrix};
pub use channel::ChannelParams;
pub use convcode::{ConvSpec, ListEntry, PuncturePattern};
pub use sim::{BoundRecord, ExperimentConfig, FerRecord};
pub use tpst::{DecodeResult, TpstSpec};

/// Errors reported by encoder, decoder and campaign construction.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Operand dimensions do not line up.
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    /// A parameter is outside its documented range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    /// Rate allocation found no feasible configuration in the given tables.
    #[error("rate allocation infeasible: {0}")]
    Infeasible(String),
    /// A bound table or config file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
