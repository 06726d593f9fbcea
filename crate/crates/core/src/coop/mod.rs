//! Cooperative optimization over a decomposed cost function.
//!
//! A cost `E(x) = sum_i E_i(x)` over discrete variables is split into one
//! sub-problem per variable. Each sub-problem keeps a soft-decision table
//! `c_i(x_i)` (its assignment constraint) and repeatedly re-solves
//!
//! ```text
//! c_i(v) = min over scope(i) \ {x_i} of (1 - lambda) E_i(x) + lambda * sum_j w_ij c_j(x_j),  x_i = v
//! ```
//!
//! using the previous tables of its neighbors. With a nonnegative cost and a
//! zero start, `sum_i min_v c_i(v)` is a lower bound on the optimum that never
//! decreases under a constant `lambda`, and a symmetric `W` makes the update a
//! `lambda`-contraction in the sup norm.

mod engine;
mod factor;
mod propagation;

pub(crate) use engine::CertificateTracker;
pub use engine::{coop_iterate, write_trace_csv, CoopEngine, RunOutcome, StopReason};
pub use factor::{Factor, FactorDecomposition};
pub use propagation::{build_propagation_matrix, PropagationMatrix, ValidationReport, Violation};

use crate::error::{Error, Result};

/// A cost function split into one sub-problem per variable.
///
/// Sub-problem `i` owns variable `i`; its scope is a sorted variable list that
/// contains `i`. Hard constraints are handled inside the sub-problem: an
/// infeasible configuration evaluates to `None` and an infeasible pin
/// minimizes to `f64::INFINITY`.
pub trait Decomposition: Sync {
    fn num_vars(&self) -> usize;

    fn domain_size(&self, var: usize) -> usize;

    fn scope(&self, sub: usize) -> &[usize];

    /// Minimum over the scope of `blend.own_weight * E_sub(x) + sum_p soft_p(x_p)`
    /// with the scope variable at `pin_pos` fixed to `pin_value`.
    fn min_pinned(&self, sub: usize, pin_pos: usize, pin_value: usize, blend: &Blend) -> f64;

    /// `min_pinned` for every value of the position, written into `out`.
    fn min_pinned_all(&self, sub: usize, pin_pos: usize, blend: &Blend, out: &mut [f64]) {
        for (v, slot) in out.iter_mut().enumerate() {
            *slot = self.min_pinned(sub, pin_pos, v, blend);
        }
    }

    /// `E_sub` at a full assignment, `None` when a hard constraint fails.
    fn evaluate(&self, sub: usize, x: &[usize]) -> Option<f64>;

    /// Marginal minima of the blended sub-problem for every scope position.
    fn marginals(&self, sub: usize, blend: &Blend) -> Vec<Vec<f64>> {
        self.scope(sub)
            .iter()
            .enumerate()
            .map(|(pos, &var)| {
                let mut values = vec![0.0; self.domain_size(var)];
                self.min_pinned_all(sub, pos, blend, &mut values);
                values
            })
            .collect()
    }

    /// `E(x) = sum_i E_i(x)`, `None` when infeasible.
    fn total_cost(&self, x: &[usize]) -> Option<f64> {
        (0..self.num_vars()).try_fold(0.0, |acc, i| self.evaluate(i, x).map(|e| acc + e))
    }
}

/// Per-sub-problem blend weights: the own-cost weight `1 - lambda` and, for
/// each scope position, the table `lambda * w_ij * c_j(.)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Blend {
    pub own_weight: f64,
    soft: Vec<f64>,
    offsets: Vec<usize>,
}

impl Blend {
    /// Zero soft costs over domains of the given sizes.
    pub fn zeros(own_weight: f64, domain_sizes: impl IntoIterator<Item = usize>) -> Self {
        let mut offsets = vec![0];
        for m in domain_sizes {
            offsets.push(offsets.last().unwrap() + m);
        }
        Blend {
            own_weight,
            soft: vec![0.0; *offsets.last().unwrap()],
            offsets,
        }
    }

    /// Re-lays the blend out over new domains, keeping its allocations.
    pub fn reshape(&mut self, own_weight: f64, domain_sizes: impl IntoIterator<Item = usize>) {
        self.own_weight = own_weight;
        self.offsets.clear();
        self.offsets.push(0);
        for m in domain_sizes {
            self.offsets.push(self.offsets.last().unwrap() + m);
        }
        self.soft.clear();
        self.soft.resize(*self.offsets.last().unwrap(), 0.0);
    }

    /// Zeroed blend over a precomputed offset table.
    pub(crate) fn set_layout(&mut self, own_weight: f64, offsets: &[usize]) {
        self.own_weight = own_weight;
        self.offsets.clear();
        self.offsets.extend_from_slice(offsets);
        self.soft.clear();
        self.soft.resize(*offsets.last().unwrap(), 0.0);
    }

    pub fn from_tables(own_weight: f64, tables: &[Vec<f64>]) -> Self {
        let mut b = Self::zeros(own_weight, tables.iter().map(Vec::len));
        for (p, t) in tables.iter().enumerate() {
            b.soft_mut(p).copy_from_slice(t);
        }
        b
    }

    #[inline]
    pub fn soft(&self, pos: usize) -> &[f64] {
        &self.soft[self.offsets[pos]..self.offsets[pos + 1]]
    }

    #[inline]
    pub fn soft_mut(&mut self, pos: usize) -> &mut [f64] {
        &mut self.soft[self.offsets[pos]..self.offsets[pos + 1]]
    }

    pub fn positions(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// The soft-decision tables `c_i(.)` of all variables.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentConstraints {
    values: Vec<f64>,
    offsets: Vec<usize>,
    iteration: usize,
}

impl AssignmentConstraints {
    pub fn zeros(domain_sizes: impl IntoIterator<Item = usize>) -> Self {
        let mut offsets = vec![0];
        for m in domain_sizes {
            offsets.push(offsets.last().unwrap() + m);
        }
        AssignmentConstraints {
            values: vec![0.0; *offsets.last().unwrap()],
            offsets,
            iteration: 0,
        }
    }

    pub fn for_decomposition<D: Decomposition + ?Sized>(dec: &D) -> Self {
        Self::zeros((0..dec.num_vars()).map(|i| dec.domain_size(i)))
    }

    /// Tables given explicitly; every entry must be finite.
    pub fn from_tables(tables: Vec<Vec<f64>>) -> Result<Self> {
        let mut c = Self::zeros(tables.iter().map(Vec::len));
        for (i, t) in tables.iter().enumerate() {
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parameter(format!("assignment constraint {i} has a non-finite entry")));
            }
            c.get_mut(i).copy_from_slice(t);
        }
        Ok(c)
    }

    pub fn num_vars(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn domain_size(&self, var: usize) -> usize {
        self.offsets[var + 1] - self.offsets[var]
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub(crate) fn set_iteration(&mut self, k: usize) {
        self.iteration = k;
    }

    #[inline]
    pub fn get(&self, var: usize) -> &[f64] {
        &self.values[self.offsets[var]..self.offsets[var + 1]]
    }

    #[inline]
    pub fn get_mut(&mut self, var: usize) -> &mut [f64] {
        &mut self.values[self.offsets[var]..self.offsets[var + 1]]
    }

    pub fn tables(&self) -> Vec<Vec<f64>> {
        (0..self.num_vars()).map(|i| self.get(i).to_vec()).collect()
    }

    /// Every table as a mutable slice, in variable order.
    pub fn tables_mut(&mut self) -> Vec<&mut [f64]> {
        let mut rest = self.values.as_mut_slice();
        let mut out = Vec::with_capacity(self.offsets.len() - 1);
        for w in self.offsets.windows(2) {
            let (head, tail) = rest.split_at_mut(w[1] - w[0]);
            out.push(head);
            rest = tail;
        }
        out
    }

    /// Favoured value of `var`; ties go to the smallest value.
    pub fn argmin(&self, var: usize) -> usize {
        argmin(self.get(var))
    }

    pub fn min(&self, var: usize) -> f64 {
        self.get(var).iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn candidate(&self) -> Vec<usize> {
        (0..self.num_vars()).map(|i| self.argmin(i)).collect()
    }

    /// `sum_i min_v c_i(v)`.
    pub fn lower_bound(&self) -> f64 {
        (0..self.num_vars()).map(|i| self.min(i)).sum()
    }

    /// `sum_i c_i(x_i)`.
    pub fn eval(&self, x: &[usize]) -> f64 {
        x.iter().enumerate().map(|(i, &v)| self.get(i)[v]).sum()
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (v, &c) in values.iter().enumerate().skip(1) {
        if c < values[best] {
            best = v;
        }
    }
    best
}

/// Argmin that refuses near-ties.
pub(crate) fn strict_argmin(values: &[f64]) -> Option<usize> {
    let best = argmin(values);
    let tol = 1e-12 * (1.0 + values[best].abs());
    let tied = values
        .iter()
        .enumerate()
        .any(|(v, &c)| v != best && c - values[best] <= tol);
    if tied || !values[best].is_finite() {
        None
    } else {
        Some(best)
    }
}

/// How `lambda_k` evolves with the iteration index `k >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaSchedule {
    Constant(f64),
    /// `lambda_k = values[k - 1]`, holding the last value afterwards.
    Sequence(Vec<f64>),
}

impl LambdaSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            LambdaSchedule::Constant(l) => *l,
            LambdaSchedule::Sequence(v) => v[(k.max(1) - 1).min(v.len() - 1)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |l: f64| (0.0..1.0).contains(&l);
        match self {
            LambdaSchedule::Constant(l) if ok(*l) => Ok(()),
            LambdaSchedule::Sequence(v) if !v.is_empty() && v.iter().all(|&l| ok(l)) => Ok(()),
            other => Err(Error::Parameter(format!("cooperation strength must lie in [0, 1): {other:?}"))),
        }
    }
}

/// Iteration controls for [`CoopEngine::run`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoopConfig {
    pub lambda: LambdaSchedule,
    pub max_iterations: usize,
    /// Consecutive consensus steps on the same candidate needed to stop.
    pub consensus_window: usize,
    /// Stop once the sup-norm change of the tables falls below this.
    pub residual_tolerance: f64,
    /// Evaluate sub-problems on the rayon pool; results are identical.
    pub parallel: bool,
    /// Keep per-step marginals in the trace.
    pub record_marginals: bool,
}

impl Default for CoopConfig {
    fn default() -> Self {
        CoopConfig {
            lambda: LambdaSchedule::Constant(0.9),
            max_iterations: 120,
            consensus_window: 1,
            residual_tolerance: 1e-12,
            parallel: false,
            record_marginals: false,
        }
    }
}

impl CoopConfig {
    pub fn validate(&self) -> Result<()> {
        self.lambda.validate()?;
        if self.max_iterations == 0 {
            return Err(Error::Parameter("max_iterations must be at least 1".into()));
        }
        if self.consensus_window == 0 {
            return Err(Error::Parameter("consensus_window must be at least 1".into()));
        }
        Ok(())
    }
}

/// Marginal minima `g_{j,i}(v)` of every blended sub-problem `j` over each
/// variable `i` of its scope.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    pub subs: Vec<SubMarginals>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubMarginals {
    pub scope: Vec<usize>,
    /// `values[p][v]` for scope position `p`.
    pub values: Vec<Vec<f64>>,
}

/// True iff, for every variable, all sub-problems containing it pick the same
/// strict argmin of their marginal. Any tie makes the answer `false`.
pub fn consensus_check(marginals: &Marginals) -> bool {
    let n = marginals
        .subs
        .iter()
        .flat_map(|s| s.scope.iter())
        .map(|&v| v + 1)
        .max()
        .unwrap_or(0);
    let mut chosen: Vec<Option<usize>> = vec![None; n];
    for sub in &marginals.subs {
        for (&var, g) in sub.scope.iter().zip(&sub.values) {
            let Some(best) = strict_argmin(g) else {
                return false;
            };
            match chosen[var] {
                None => chosen[var] = Some(best),
                Some(prev) if prev != best => return false,
                Some(_) => {}
            }
        }
    }
    true
}

/// Optimality-gap certificate `lambda_product * (e_tilde - lower_bound_prev)`,
/// bounding `E(x~) - E*` when `x~` has been a consensus solution for every
/// step whose `lambda` enters the product.
pub fn gap_certificate(e_tilde: f64, lower_bound_prev: f64, lambda_product: f64) -> Result<f64> {
    let tol = 1e-9 * (1.0 + e_tilde.abs());
    if e_tilde < lower_bound_prev - tol {
        return Err(Error::InvariantViolation(format!(
            "lower bound {lower_bound_prev} exceeds the candidate cost {e_tilde}"
        )));
    }
    if lambda_product == 0.0 {
        return Ok(0.0);
    }
    Ok(lambda_product * (e_tilde - lower_bound_prev).max(0.0))
}

/// One step of the cooperative iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub iteration: usize,
    pub lambda: f64,
    /// Per-variable argmin of the new tables (smallest value on ties).
    pub candidate: Vec<usize>,
    /// `sum_i min_v c_i(v)` of the new tables.
    pub lower_bound: f64,
    pub consensus: bool,
    pub gap_certificate: Option<f64>,
    /// Sup-norm change of the tables.
    pub residual: f64,
    /// `E(candidate)`, `None` when infeasible.
    pub candidate_cost: Option<f64>,
    pub marginals: Option<Marginals>,
}
