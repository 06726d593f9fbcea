//! Decoding toolkit for binary LDPC codes built around cooperative
//! optimization.
//!
//! The crate is split into:
//!
//! - [`codes`]: parity-check matrices, code constructors, encoders and AList I/O.
//! - [`channel`]: BPSK over AWGN and log-likelihood ratios.
//! - [`coop`]: the generic cooperative optimization engine (propagation
//!   matrices, the assignment-constraint update, lower bounds, consensus and
//!   optimality-gap certificates).
//! - [`ldpc`]: the cooperative engine specialized to LDPC maximum-likelihood
//!   decoding over the Tanner graph.
//! - [`spa`]: the sum-product (belief propagation) baseline decoder.
//! - [`oracle`]: exhaustive references used by the test suites.
//! - [`instances`]: random problem and code generators.

pub mod channel;
pub mod codes;
pub mod coop;
mod error;
pub mod instances;
pub mod ldpc;
pub mod oracle;
pub mod spa;

pub use error::{Error, Result};

/// Outcome classification shared by all iterative decoders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecodeStatus {
    /// Consensus reached on a valid codeword.
    Consensus,
    /// Valid codeword without a consensus certificate.
    SyndromeOnly,
    /// Iteration cap hit.
    MaxIterations,
}

impl DecodeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecodeStatus::Consensus => "consensus",
            DecodeStatus::SyndromeOnly => "syndrome_only",
            DecodeStatus::MaxIterations => "max_iterations",
        }
    }
}

/// Result of a single decode call.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub codeword: Vec<u8>,
    pub consensus: bool,
    pub syndrome_ok: bool,
    pub iterations: usize,
    pub gap_certificate: Option<f64>,
    pub lower_bound_trace: Vec<f64>,
    pub status: DecodeStatus,
}
