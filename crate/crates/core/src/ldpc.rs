//! Cooperative decoding of binary LDPC codes.
//!
//! ML decoding is posed as minimizing `sum_i f_i(x_i)` subject to every
//! parity check, with `f_i(0) = 2 a_i` and `f_i(1) = -2 a_i` for channel LLRs
//! `a_i`. Sub-problem `i` holds `f_i` together with every check touching `x_i`
//! (whole, since a hard constraint split any way is still `0` or `inf`), and
//! its scope is the depth-1 Tanner neighborhood of `x_i`.
//!
//! The decoder works with `f_i - min(f_i)`, which leaves every decision and
//! consensus unchanged but keeps the cost nonnegative so that the lower bound
//! and certificate guarantees of [`crate::coop`] apply.

use crate::codes::{LinearCode, ParityCheckMatrix};
use crate::coop::{
    build_propagation_matrix, AssignmentConstraints, Blend, CoopEngine, Decomposition, LambdaSchedule,
    PropagationMatrix,
};
use crate::coop::CertificateTracker;
use crate::error::{check_len, Error, Result};
use crate::{DecodeResult, DecodeStatus};

/// Paper-form unary costs `(f_i(0), f_i(1)) = (2 a_i, -2 a_i)`.
pub fn unary_costs(llr: &[f64]) -> Vec<[f64; 2]> {
    llr.iter().map(|&a| [2.0 * a, -2.0 * a]).collect()
}

/// Unary costs shifted so the cheaper value costs zero.
pub fn normalized_unary_costs(llr: &[f64]) -> Vec<[f64; 2]> {
    llr.iter()
        .map(|&a| [2.0 * a + 2.0 * a.abs(), -2.0 * a + 2.0 * a.abs()])
        .collect()
}

/// Minimum of `sum_k cost_k(x_k)` over bit vectors whose XOR equals
/// `required_parity`, with the lexicographically smallest minimizer.
///
/// Takes the free optimum (ties to 0) and, on a parity mismatch, flips the
/// cheapest bit. Among equally cheap flips it lowers the first 1 it can,
/// otherwise raises the last 0.
pub fn parity_constrained_min(costs: &[(f64, f64)], required_parity: u8) -> (f64, Vec<u8>) {
    assert!(!costs.is_empty(), "parity constraint over no variables");
    let mut bits: Vec<u8> = costs.iter().map(|&(c0, c1)| u8::from(c1 < c0)).collect();
    let mut total: f64 = costs.iter().map(|&(c0, c1)| c0.min(c1)).sum();
    let parity = bits.iter().fold(0, |acc, &b| acc ^ b);
    if parity == required_parity & 1 {
        return (total, bits);
    }
    let deltas: Vec<f64> = costs.iter().map(|&(c0, c1)| (c1 - c0).abs()).collect();
    let dmin = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let tied = || deltas.iter().enumerate().filter(|&(_, &d)| d == dmin).map(|(k, _)| k);
    let k = tied()
        .find(|&k| bits[k] == 1)
        .or_else(|| tied().next_back())
        .expect("non-empty");
    bits[k] ^= 1;
    total += dmin;
    (total, bits)
}

/// Running minimum of a parity-constrained sum, one variable at a time.
#[derive(Debug, Clone, Copy)]
struct ParityAcc {
    sum: f64,
    parity: u8,
    min_flip: f64,
}

impl ParityAcc {
    fn new() -> Self {
        ParityAcc {
            sum: 0.0,
            parity: 0,
            min_flip: f64::INFINITY,
        }
    }

    #[inline]
    fn free(&mut self, c0: f64, c1: f64) {
        if c1 < c0 {
            self.sum += c1;
            self.parity ^= 1;
        } else {
            self.sum += c0;
        }
        self.min_flip = self.min_flip.min((c1 - c0).abs());
    }

    #[inline]
    fn fixed(&mut self, cost: f64, bit: usize) {
        self.sum += cost;
        self.parity ^= bit as u8;
    }

    #[inline]
    fn min_with_parity(&self, parity: usize) -> f64 {
        if self.parity as usize == parity {
            self.sum
        } else {
            self.sum + self.min_flip
        }
    }
}

#[derive(Debug, Clone)]
struct TannerSub {
    scope: Vec<usize>,
    owner_pos: usize,
    check_ids: Vec<usize>,
    /// Scope positions of each adjacent check's other members.
    check_slots: Vec<Vec<usize>>,
    /// `1 / (number of adjacent checks containing the position)`: a variable
    /// shared by two adjacent checks (a 4-cycle) is split into copies.
    share: Vec<f64>,
}

/// Code-dependent part of the Tanner decomposition, reusable across frames.
#[derive(Debug, Clone)]
pub struct TannerStructure {
    h: ParityCheckMatrix,
    subs: Vec<TannerSub>,
}

impl TannerStructure {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let subs = (0..h.num_vars())
            .map(|i| {
                let check_ids = h.col(i).to_vec();
                let mut scope = vec![i];
                for &j in &check_ids {
                    scope.extend_from_slice(h.row(j));
                }
                scope.sort_unstable();
                scope.dedup();
                let pos = |v: usize| scope.binary_search(&v).expect("in scope");
                let check_slots: Vec<Vec<usize>> = check_ids
                    .iter()
                    .map(|&j| h.row(j).iter().filter(|&&v| v != i).map(|&v| pos(v)).collect())
                    .collect();
                let mut copies = vec![0usize; scope.len()];
                for slots in &check_slots {
                    for &p in slots {
                        copies[p] += 1;
                    }
                }
                let share = copies.iter().map(|&c| if c > 1 { 1.0 / c as f64 } else { 1.0 }).collect();
                TannerSub {
                    owner_pos: pos(i),
                    scope,
                    check_ids,
                    check_slots,
                    share,
                }
            })
            .collect();
        TannerStructure { h: h.clone(), subs }
    }

    pub fn h(&self) -> &ParityCheckMatrix {
        &self.h
    }

    pub fn scope(&self, var: usize) -> &[usize] {
        &self.subs[var].scope
    }

    /// Variables sharing at least one check with each variable.
    pub fn neighbor_sets(&self) -> Vec<Vec<usize>> {
        self.subs
            .iter()
            .enumerate()
            .map(|(i, s)| s.scope.iter().copied().filter(|&v| v != i).collect())
            .collect()
    }

    /// Symmetric propagation matrix over the shared-check neighborhoods.
    pub fn propagation_matrix(&self) -> Result<PropagationMatrix> {
        build_propagation_matrix(&self.neighbor_sets())
    }
}

/// Tanner decomposition of one received frame.
#[derive(Debug, Clone)]
pub struct TannerDecomposition<'s> {
    structure: &'s TannerStructure,
    unary: Vec<[f64; 2]>,
}

impl<'s> TannerDecomposition<'s> {
    /// Uses the normalized unary costs of `llr`.
    pub fn new(structure: &'s TannerStructure, llr: &[f64]) -> Result<Self> {
        check_len(structure.h.num_vars(), llr.len())?;
        Ok(Self::with_unary(structure, normalized_unary_costs(llr)))
    }

    pub fn with_unary(structure: &'s TannerStructure, unary: Vec<[f64; 2]>) -> Self {
        TannerDecomposition { structure, unary }
    }

    pub fn unary(&self) -> &[[f64; 2]] {
        &self.unary
    }

    /// Check constraints adjacent to variable `i`.
    pub fn checks_of(&self, i: usize) -> &[usize] {
        &self.structure.subs[i].check_ids
    }

    /// Eq.-(5) update of one table entry: `x_i` pinned to `pin`, blended with
    /// `c_prev` through row `i` of `w`.
    pub fn subproblem_min(
        &self,
        i: usize,
        pin: u8,
        c_prev: &AssignmentConstraints,
        lambda: f64,
        w: &PropagationMatrix,
    ) -> f64 {
        let s = &self.structure.subs[i];
        let mut blend = Blend::zeros(1.0 - lambda, s.scope.iter().map(|_| 2));
        let mut outside = 0.0;
        for &(j, wij) in w.row(i) {
            match s.scope.binary_search(&j) {
                Ok(p) => {
                    for (t, &c) in blend.soft_mut(p).iter_mut().zip(c_prev.get(j)) {
                        *t = lambda * wij * c;
                    }
                }
                Err(_) => outside += lambda * wij * c_prev.min(j),
            }
        }
        self.min_pinned(i, s.owner_pos, usize::from(pin), &blend) + outside
    }
}

impl TannerDecomposition<'_> {
    /// Both pinned values of the owner: the check accumulators do not depend
    /// on the pin, only the parity they are asked for.
    fn owner_minima(&self, s: &TannerSub, sub: usize, blend: &Blend, out: &mut [f64]) {
        let own = blend.soft(s.owner_pos);
        let mut totals = [
            blend.own_weight * self.unary[sub][0] + own[0],
            blend.own_weight * self.unary[sub][1] + own[1],
        ];
        for slots in &s.check_slots {
            let mut acc = ParityAcc::new();
            for &p in slots {
                let share = s.share[p];
                let soft = blend.soft(p);
                acc.free(share * soft[0], share * soft[1]);
            }
            totals[0] += acc.min_with_parity(0);
            totals[1] += acc.min_with_parity(1);
        }
        out.copy_from_slice(&totals);
    }
}

impl Decomposition for TannerDecomposition<'_> {
    fn num_vars(&self) -> usize {
        self.unary.len()
    }

    fn domain_size(&self, _var: usize) -> usize {
        2
    }

    fn scope(&self, sub: usize) -> &[usize] {
        &self.structure.subs[sub].scope
    }

    fn min_pinned(&self, sub: usize, pin_pos: usize, pin_value: usize, blend: &Blend) -> f64 {
        let mut both = [0.0; 2];
        let s = &self.structure.subs[sub];
        if pin_pos == s.owner_pos {
            self.owner_minima(s, sub, blend, &mut both);
            return both[pin_value];
        }
        let mut best = f64::INFINITY;
        for b in 0..2 {
            let mut total = blend.own_weight * self.unary[sub][b] + blend.soft(s.owner_pos)[b];
            for slots in &s.check_slots {
                let mut acc = ParityAcc::new();
                for &p in slots {
                    let share = s.share[p];
                    let soft = blend.soft(p);
                    if p == pin_pos {
                        acc.fixed(share * soft[pin_value], pin_value);
                    } else {
                        acc.free(share * soft[0], share * soft[1]);
                    }
                }
                // the other members must carry the owner's bit
                total += acc.min_with_parity(b);
            }
            best = best.min(total);
        }
        best
    }

    fn min_pinned_all(&self, sub: usize, pin_pos: usize, blend: &Blend, out: &mut [f64]) {
        let s = &self.structure.subs[sub];
        if pin_pos == s.owner_pos {
            self.owner_minima(s, sub, blend, out);
        } else {
            for (v, slot) in out.iter_mut().enumerate() {
                *slot = self.min_pinned(sub, pin_pos, v, blend);
            }
        }
    }

    fn evaluate(&self, sub: usize, x: &[usize]) -> Option<f64> {
        let s = &self.structure.subs[sub];
        let h = &self.structure.h;
        let ok = s
            .check_ids
            .iter()
            .all(|&j| h.row(j).iter().fold(0, |acc, &v| acc ^ x[v]) == 0);
        ok.then(|| self.unary[sub][x[sub]])
    }
}

/// Settings of the cooperative decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct CoopDecoderConfig {
    pub lambda: LambdaSchedule,
    pub max_iterations: usize,
    /// Consecutive consensus iterations (same codeword) needed to stop.
    pub consensus_window: usize,
    /// Consecutive valid-syndrome iterations without consensus before
    /// giving up on a certificate.
    pub syndrome_patience: usize,
    pub parallel: bool,
}

impl Default for CoopDecoderConfig {
    fn default() -> Self {
        CoopDecoderConfig {
            lambda: LambdaSchedule::Constant(0.9),
            max_iterations: 120,
            consensus_window: 1,
            syndrome_patience: 3,
            parallel: false,
        }
    }
}

impl CoopDecoderConfig {
    pub fn validate(&self) -> Result<()> {
        self.lambda.validate()?;
        if self.max_iterations == 0 || self.consensus_window == 0 || self.syndrome_patience == 0 {
            return Err(Error::Parameter(
                "max_iterations, consensus_window and syndrome_patience must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Cooperative decoder bound to one code; shareable across threads.
#[derive(Debug, Clone)]
pub struct CooperativeDecoder {
    structure: TannerStructure,
    w: PropagationMatrix,
    config: CoopDecoderConfig,
}

impl CooperativeDecoder {
    pub fn new(h: &ParityCheckMatrix, config: CoopDecoderConfig) -> Result<Self> {
        config.validate()?;
        let structure = TannerStructure::new(h);
        let w = structure.propagation_matrix()?;
        Ok(CooperativeDecoder { structure, w, config })
    }

    pub fn structure(&self) -> &TannerStructure {
        &self.structure
    }

    pub fn propagation_matrix(&self) -> &PropagationMatrix {
        &self.w
    }

    pub fn config(&self) -> &CoopDecoderConfig {
        &self.config
    }

    pub fn decode(&self, llr: &[f64]) -> Result<DecodeResult> {
        let h = &self.structure.h;
        let dec = TannerDecomposition::new(&self.structure, llr)?;
        let engine = CoopEngine::new(&dec, &self.w)?;
        let mut state = AssignmentConstraints::for_decomposition(&dec);
        let mut tracker = CertificateTracker::new(true, 0.0);
        let mut lower_bound_trace = Vec::new();
        let mut syndrome_streak = 0;
        let mut bits = vec![0u8; h.num_vars()];
        let mut last = (false, false, None);
        for k in 1..=self.config.max_iterations {
            let lambda = self.config.lambda.at(k);
            let next = engine.update(&state, lambda, self.config.parallel)?;
            let candidate = next.candidate();
            for (b, &v) in bits.iter_mut().zip(&candidate) {
                *b = v as u8;
            }
            let lower_bound = next.lower_bound();
            lower_bound_trace.push(lower_bound);
            let syndrome_ok = h.is_codeword(&bits);
            // consensus implies every check holds, so skip the marginals otherwise
            let consensus = syndrome_ok && engine.consensus(&state, &next, lambda, false).0;
            let cost = syndrome_ok.then(|| candidate.iter().enumerate().map(|(i, &v)| dec.unary[i][v]).sum());
            let gap = tracker.observe(lambda, &candidate, consensus, lower_bound, cost)?;
            syndrome_streak = if syndrome_ok { syndrome_streak + 1 } else { 0 };
            state = next;
            last = (consensus, syndrome_ok, gap);
            let status = if tracker.streak_len() >= self.config.consensus_window {
                Some(DecodeStatus::Consensus)
            } else if syndrome_streak >= self.config.syndrome_patience && !consensus {
                Some(DecodeStatus::SyndromeOnly)
            } else {
                None
            };
            if let Some(status) = status {
                return Ok(DecodeResult {
                    codeword: bits,
                    consensus,
                    syndrome_ok,
                    iterations: k,
                    gap_certificate: gap,
                    lower_bound_trace,
                    status,
                });
            }
        }
        Ok(DecodeResult {
            codeword: bits,
            consensus: last.0,
            syndrome_ok: last.1,
            iterations: self.config.max_iterations,
            gap_certificate: last.2,
            lower_bound_trace,
            status: DecodeStatus::MaxIterations,
        })
    }
}

/// One-shot cooperative decode of `llr` for `code`.
pub fn decode_cooperative(code: &LinearCode, llr: &[f64], config: &CoopDecoderConfig) -> Result<DecodeResult> {
    CooperativeDecoder::new(code.h(), config.clone())?.decode(llr)
}
