use std::io::{self, Write};

use rayon::prelude::*;

use super::{
    consensus_check, gap_certificate, AssignmentConstraints, Blend, CoopConfig, Decomposition, IterationReport,
    Marginals, PropagationMatrix, SubMarginals,
};
use crate::error::{Error, Result};

/// How the entries of one row of `W` meet sub-problem `i`'s scope.
#[derive(Debug, Clone)]
struct Coupling {
    owner_pos: usize,
    /// Blend offsets of the scope positions.
    layout: Vec<usize>,
    /// In-scope couplings as `(blend offset, table offset, length, w_ij)`.
    loads: Vec<(usize, usize, usize, f64)>,
    /// Variables outside the scope enter through `min_v c_j(v)`.
    outside: Vec<(usize, f64)>,
}

/// Cooperative iteration bound to a decomposition and a propagation matrix.
pub struct CoopEngine<'a, D: Decomposition + ?Sized> {
    dec: &'a D,
    couplings: Vec<Coupling>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Consensus,
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: Vec<IterationReport>,
    pub state: AssignmentConstraints,
    pub stop: StopReason,
}

impl RunOutcome {
    pub fn last(&self) -> &IterationReport {
        self.trace.last().expect("at least one iteration")
    }
}

impl<'a, D: Decomposition + ?Sized> CoopEngine<'a, D> {
    pub fn new(dec: &'a D, w: &'a PropagationMatrix) -> Result<Self> {
        let n = dec.num_vars();
        if w.n() != n {
            return Err(Error::Dimension { expected: n, got: w.n() });
        }
        let mut table_offsets = vec![0];
        for v in 0..n {
            table_offsets.push(table_offsets[v] + dec.domain_size(v));
        }
        let couplings = (0..n)
            .map(|i| {
                let scope = dec.scope(i);
                let owner_pos = scope.binary_search(&i).map_err(|_| {
                    Error::Parameter(format!("scope of sub-problem {i} does not contain variable {i}"))
                })?;
                let mut layout = vec![0];
                for &v in scope {
                    layout.push(layout.last().unwrap() + dec.domain_size(v));
                }
                let mut loads = Vec::new();
                let mut outside = Vec::new();
                for &(j, wij) in w.row(i) {
                    match scope.binary_search(&j) {
                        Ok(pos) => loads.push((layout[pos], table_offsets[j], dec.domain_size(j), wij)),
                        Err(_) => outside.push((j, wij)),
                    }
                }
                Ok(Coupling {
                    owner_pos,
                    layout,
                    loads,
                    outside,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CoopEngine { dec, couplings })
    }

    pub fn decomposition(&self) -> &D {
        self.dec
    }

    /// Lays `blend` out over the scope of `sub` and loads `lambda * w_ij * c_j`;
    /// returns the constant contributed by coupled variables outside the scope.
    fn fill_blend(&self, sub: usize, c_prev: &AssignmentConstraints, lambda: f64, blend: &mut Blend) -> f64 {
        let coupling = &self.couplings[sub];
        blend.set_layout(1.0 - lambda, &coupling.layout);
        for &(dst, src, len, wij) in &coupling.loads {
            let scale = lambda * wij;
            for (s, &cv) in blend.soft[dst..dst + len].iter_mut().zip(&c_prev.values[src..src + len]) {
                *s = scale * cv;
            }
        }
        coupling
            .outside
            .iter()
            .map(|&(j, wij)| lambda * wij * c_prev.min(j))
            .sum()
    }

    fn check_state(&self, c: &AssignmentConstraints) -> Result<()> {
        let n = self.dec.num_vars();
        if c.num_vars() != n {
            return Err(Error::Dimension { expected: n, got: c.num_vars() });
        }
        for i in 0..n {
            if c.domain_size(i) != self.dec.domain_size(i) {
                return Err(Error::Dimension {
                    expected: self.dec.domain_size(i),
                    got: c.domain_size(i),
                });
            }
        }
        Ok(())
    }

    fn update_row(
        &self,
        sub: usize,
        c_prev: &AssignmentConstraints,
        lambda: f64,
        blend: &mut Blend,
        out: &mut [f64],
    ) -> Result<()> {
        let constant = self.fill_blend(sub, c_prev, lambda, blend);
        let owner_pos = self.couplings[sub].owner_pos;
        self.dec.min_pinned_all(sub, owner_pos, blend, out);
        for slot in out.iter_mut() {
            *slot += constant;
            if !slot.is_finite() {
                return Err(Error::Infeasible { subproblem: sub });
            }
        }
        Ok(())
    }

    /// Synchronous update: every new table is computed from `c_prev`.
    pub fn update(&self, c_prev: &AssignmentConstraints, lambda: f64, parallel: bool) -> Result<AssignmentConstraints> {
        self.check_state(c_prev)?;
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::Parameter(format!("cooperation strength {lambda} outside [0, 1)")));
        }
        let mut next = c_prev.clone();
        if parallel {
            next.tables_mut()
                .into_par_iter()
                .enumerate()
                .try_for_each_init(
                    || Blend::zeros(0.0, []),
                    |blend, (i, row)| self.update_row(i, c_prev, lambda, blend, row),
                )?;
        } else {
            let mut blend = Blend::zeros(0.0, []);
            for (i, row) in next.tables_mut().into_iter().enumerate() {
                self.update_row(i, c_prev, lambda, &mut blend, row)?;
            }
        }
        next.set_iteration(c_prev.iteration() + 1);
        Ok(next)
    }

    /// Consensus of the step `c_prev -> c_next`: marginal agreement across
    /// sub-problems, plus every sub-problem attaining its minimum at the
    /// candidate. Marginals are returned when requested.
    pub fn consensus(
        &self,
        c_prev: &AssignmentConstraints,
        c_next: &AssignmentConstraints,
        lambda: f64,
        with_marginals: bool,
    ) -> (bool, Option<Marginals>) {
        let candidate = c_next.candidate();
        let mut subs = Vec::new();
        let mut attained = true;
        for i in 0..self.dec.num_vars() {
            let mut blend = Blend::zeros(0.0, []);
            let constant = self.fill_blend(i, c_prev, lambda, &mut blend);
            attained &= self.attains(i, &blend, constant, c_next.get(i)[candidate[i]], &candidate);
            if !attained && !with_marginals {
                return (false, None);
            }
            let values = self
                .dec
                .marginals(i, &blend)
                .into_iter()
                .map(|g| g.into_iter().map(|v| v + constant).collect())
                .collect();
            subs.push(SubMarginals {
                scope: self.dec.scope(i).to_vec(),
                values,
            });
            if !with_marginals && !consensus_check(&Marginals { subs: vec![subs.last().unwrap().clone()] }) {
                return (false, None);
            }
        }
        let marginals = Marginals { subs };
        let agreed = consensus_check(&marginals);
        (agreed && attained, with_marginals.then_some(marginals))
    }

    fn attains(&self, sub: usize, blend: &Blend, constant: f64, c_value: f64, x: &[usize]) -> bool {
        let Some(e) = self.dec.evaluate(sub, x) else {
            return false;
        };
        let soft: f64 = self
            .dec
            .scope(sub)
            .iter()
            .enumerate()
            .map(|(p, &v)| blend.soft(p)[x[v]])
            .sum();
        let value = blend.own_weight * e + soft + constant;
        c_value >= value - 1e-9 * (1.0 + value.abs())
    }

    /// One update plus its diagnostics (no gap certificate; see [`Self::run`]).
    pub fn iterate(
        &self,
        c_prev: &AssignmentConstraints,
        lambda: f64,
        with_marginals: bool,
        parallel: bool,
    ) -> Result<(AssignmentConstraints, IterationReport)> {
        let next = self.update(c_prev, lambda, parallel)?;
        let (consensus, marginals) = self.consensus(c_prev, &next, lambda, with_marginals);
        let candidate = next.candidate();
        let report = IterationReport {
            iteration: next.iteration(),
            lambda,
            lower_bound: next.lower_bound(),
            consensus,
            gap_certificate: None,
            residual: next.sup_distance(c_prev),
            candidate_cost: self.dec.total_cost(&candidate),
            candidate,
            marginals,
        };
        Ok((next, report))
    }

    /// Iterates from `c0` (zeros when `None`) until consensus has held on the
    /// same candidate for `consensus_window` steps, the residual drops below
    /// tolerance, or `max_iterations` is reached.
    ///
    /// Gap certificates are issued only from a zero start or with
    /// `lambda_1 = 0`, where the tables bound the optimum from below.
    pub fn run(&self, config: &CoopConfig, c0: Option<AssignmentConstraints>) -> Result<RunOutcome> {
        config.validate()?;
        let mut state = c0.unwrap_or_else(|| AssignmentConstraints::for_decomposition(self.dec));
        self.check_state(&state)?;
        let mut tracker = CertificateTracker::new(state.is_zero() || config.lambda.at(1) == 0.0, state.lower_bound());
        let mut trace = Vec::new();
        let mut stop = StopReason::MaxIterations;
        for k in 1..=config.max_iterations {
            let lambda = config.lambda.at(k);
            let (next, mut report) = self.iterate(&state, lambda, config.record_marginals, config.parallel)?;
            report.gap_certificate = tracker.observe(
                lambda,
                &report.candidate,
                report.consensus,
                report.lower_bound,
                report.candidate_cost,
            )?;
            let streak = tracker.streak_len();
            let residual = report.residual;
            trace.push(report);
            state = next;
            if streak >= config.consensus_window {
                stop = StopReason::Consensus;
                break;
            }
            if residual < config.residual_tolerance {
                stop = StopReason::Converged;
                break;
            }
        }
        Ok(RunOutcome { trace, state, stop })
    }
}

/// Runs one cooperative step from scratch (builds the engine each call).
pub fn coop_iterate<D: Decomposition + ?Sized>(
    dec: &D,
    w: &PropagationMatrix,
    c_prev: &AssignmentConstraints,
    lambda: f64,
) -> Result<(AssignmentConstraints, IterationReport)> {
    CoopEngine::new(dec, w)?.iterate(c_prev, lambda, true, false)
}

#[derive(Debug, Clone)]
struct Streak {
    candidate: Vec<usize>,
    lambda_product: f64,
    lower_bound_before: f64,
    len: usize,
}

/// Tracks runs of consensus on an unchanged candidate and the certificate
/// `prod lambda_k * (E(x~) - lower bound before the run)`.
#[derive(Debug, Clone)]
pub(crate) struct CertificateTracker {
    certified: bool,
    prev_lower_bound: f64,
    streak: Option<Streak>,
}

impl CertificateTracker {
    pub(crate) fn new(certified: bool, initial_lower_bound: f64) -> Self {
        CertificateTracker {
            certified,
            prev_lower_bound: initial_lower_bound,
            streak: None,
        }
    }

    pub(crate) fn streak_len(&self) -> usize {
        self.streak.as_ref().map_or(0, |s| s.len)
    }

    pub(crate) fn observe(
        &mut self,
        lambda: f64,
        candidate: &[usize],
        consensus: bool,
        lower_bound: f64,
        candidate_cost: Option<f64>,
    ) -> Result<Option<f64>> {
        let prev = std::mem::replace(&mut self.prev_lower_bound, lower_bound);
        if !consensus {
            self.streak = None;
            return Ok(None);
        }
        match &mut self.streak {
            Some(s) if s.candidate == candidate => {
                s.lambda_product *= lambda;
                s.len += 1;
            }
            _ => {
                self.streak = Some(Streak {
                    candidate: candidate.to_vec(),
                    lambda_product: lambda,
                    lower_bound_before: prev,
                    len: 1,
                })
            }
        }
        let s = self.streak.as_ref().expect("streak set");
        match (self.certified, candidate_cost) {
            (true, Some(cost)) => gap_certificate(cost, s.lower_bound_before, s.lambda_product).map(Some),
            _ => Ok(None),
        }
    }
}

/// Writes `k,lower_bound,residual,consensus,candidate_cost`, one row per step.
pub fn write_trace_csv<W: Write>(trace: &[IterationReport], mut out: W) -> io::Result<()> {
    writeln!(out, "k,lower_bound,residual,consensus,candidate_cost")?;
    for r in trace {
        let cost = r.candidate_cost.map(|c| c.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{},{}", r.iteration, r.lower_bound, r.residual, r.consensus, cost)?;
    }
    Ok(())
}
