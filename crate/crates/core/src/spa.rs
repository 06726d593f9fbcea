//! Flooding sum-product decoder in the LLR domain.
//!
//! Channel LLRs follow the crate convention `a = log P(y|1) / P(y|0)`;
//! messages internally use `log P(0) / P(1)`, the usual sign for the tanh rule.

use crate::codes::{LinearCode, ParityCheckMatrix};
use crate::error::{check_len, Error, Result};
use crate::{DecodeResult, DecodeStatus};

/// Message magnitudes entering the tanh rule are clamped to this value.
pub const LLR_CLAMP: f64 = 30.0;

/// Edge-indexed message buffers; edges are numbered check by check.
#[derive(Debug, Clone)]
pub struct BpState {
    pub var_to_check: Vec<f64>,
    pub check_to_var: Vec<f64>,
    pub iteration: usize,
}

/// Sum-product decoder bound to one parity-check matrix.
#[derive(Debug, Clone)]
pub struct SumProductDecoder {
    h: ParityCheckMatrix,
    /// First edge of each check, plus a final sentinel.
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    /// Edges incident to each variable.
    var_edges: Vec<Vec<usize>>,
    max_iterations: usize,
}

impl SumProductDecoder {
    pub const DEFAULT_MAX_ITERATIONS: usize = 30;

    pub fn new(h: &ParityCheckMatrix, max_iterations: usize) -> Result<Self> {
        if max_iterations == 0 {
            return Err(Error::Parameter("max_iterations must be at least 1".into()));
        }
        let mut check_start = Vec::with_capacity(h.num_checks() + 1);
        let mut edge_var = Vec::with_capacity(h.num_edges());
        let mut var_edges = vec![Vec::new(); h.num_vars()];
        for j in 0..h.num_checks() {
            check_start.push(edge_var.len());
            for &v in h.row(j) {
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
            }
        }
        check_start.push(edge_var.len());
        Ok(SumProductDecoder {
            h: h.clone(),
            check_start,
            edge_var,
            var_edges,
            max_iterations,
        })
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    fn new_state(&self) -> BpState {
        BpState {
            var_to_check: vec![0.0; self.edge_var.len()],
            check_to_var: vec![0.0; self.edge_var.len()],
            iteration: 0,
        }
    }

    /// One flooding iteration; returns posteriors in the `log P(0)/P(1)` sign.
    fn step(&self, state: &mut BpState, channel: &[f64], posterior: &mut [f64]) {
        for (v, edges) in self.var_edges.iter().enumerate() {
            let total: f64 = channel[v] + edges.iter().map(|&e| state.check_to_var[e]).sum::<f64>();
            for &e in edges {
                state.var_to_check[e] = total - state.check_to_var[e];
            }
        }
        let mut prefix = Vec::new();
        for j in 0..self.check_start.len() - 1 {
            let (lo, hi) = (self.check_start[j], self.check_start[j + 1]);
            let t: Vec<f64> = state.var_to_check[lo..hi]
                .iter()
                .map(|&m| (m.clamp(-LLR_CLAMP, LLR_CLAMP) / 2.0).tanh())
                .collect();
            // products excluding each edge without dividing by a possible zero
            prefix.clear();
            let mut acc = 1.0;
            for &x in &t {
                prefix.push(acc);
                acc *= x;
            }
            let mut suffix = 1.0;
            for k in (0..t.len()).rev() {
                state.check_to_var[lo + k] = 2.0 * (prefix[k] * suffix).atanh();
                suffix *= t[k];
            }
        }
        for (v, edges) in self.var_edges.iter().enumerate() {
            posterior[v] = channel[v] + edges.iter().map(|&e| state.check_to_var[e]).sum::<f64>();
        }
        state.iteration += 1;
    }

    pub fn decode(&self, llr: &[f64]) -> Result<DecodeResult> {
        let n = self.h.num_vars();
        check_len(n, llr.len())?;
        let channel: Vec<f64> = llr.iter().map(|&a| -a).collect();
        let mut state = self.new_state();
        let mut posterior = vec![0.0; n];
        let mut bits = vec![0u8; n];
        for k in 1..=self.max_iterations {
            self.step(&mut state, &channel, &mut posterior);
            for (b, &p) in bits.iter_mut().zip(&posterior) {
                *b = u8::from(p < 0.0);
            }
            if self.h.is_codeword(&bits) {
                return Ok(result(bits, true, k, DecodeStatus::SyndromeOnly));
            }
        }
        Ok(result(bits, false, self.max_iterations, DecodeStatus::MaxIterations))
    }

    /// Posterior LLRs (`log P(1)/P(0)`) after exactly `iterations` flooding
    /// iterations, with no early stop. Exact bitwise MAP on a cycle-free graph
    /// once `iterations` reaches its depth.
    pub fn posteriors(&self, llr: &[f64], iterations: usize) -> Result<Vec<f64>> {
        check_len(self.h.num_vars(), llr.len())?;
        let channel: Vec<f64> = llr.iter().map(|&a| -a).collect();
        let mut state = self.new_state();
        let mut posterior = channel.clone();
        for _ in 0..iterations {
            self.step(&mut state, &channel, &mut posterior);
        }
        Ok(posterior.into_iter().map(|p| -p).collect())
    }
}

fn result(codeword: Vec<u8>, syndrome_ok: bool, iterations: usize, status: DecodeStatus) -> DecodeResult {
    DecodeResult {
        codeword,
        consensus: false,
        syndrome_ok,
        iterations,
        gap_certificate: None,
        lower_bound_trace: Vec::new(),
        status,
    }
}

pub fn decode_sum_product(code: &LinearCode, llr: &[f64], max_iterations: usize) -> Result<DecodeResult> {
    SumProductDecoder::new(code.h(), max_iterations)?.decode(llr)
}

/// Bitwise posterior LLRs after `iterations` flooding iterations.
pub fn bitwise_posteriors(h: &ParityCheckMatrix, llr: &[f64], iterations: usize) -> Result<Vec<f64>> {
    SumProductDecoder::new(h, iterations.max(1))?.posteriors(llr, iterations)
}
