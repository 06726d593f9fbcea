//! Table-driven decompositions for small discrete problems.

use super::{Blend, Decomposition};
use crate::error::{Error, Result};

/// Largest scope assignment space a sub-problem may enumerate.
const MAX_SCOPE_SPACE: usize = 1 << 22;

/// A cost table over a few variables, first variable most significant.
/// Entries are nonnegative; `+inf` marks a forbidden combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub vars: Vec<usize>,
    pub table: Vec<f64>,
}

impl Factor {
    pub fn new(vars: Vec<usize>, table: Vec<f64>) -> Self {
        Factor { vars, table }
    }

    /// A two-variable factor from a row-major matrix.
    pub fn pairwise(a: usize, b: usize, table: [[f64; 2]; 2]) -> Self {
        Factor::new(vec![a, b], table.iter().flatten().copied().collect())
    }

    fn index(&self, domains: &[usize], value_of: impl Fn(usize) -> usize) -> usize {
        self.vars
            .iter()
            .fold(0, |acc, &v| acc * domains[v] + value_of(v))
    }
}

#[derive(Debug, Clone)]
struct Term {
    factor: usize,
    share: f64,
    /// Scope position of each factor variable.
    positions: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Sub {
    scope: Vec<usize>,
    terms: Vec<Term>,
}

/// `E(x) = sum_f f(x)` with every factor split among sub-problems by shares
/// summing to one, so that `sum_i E_i = E` holds pointwise.
#[derive(Debug, Clone)]
pub struct FactorDecomposition {
    domains: Vec<usize>,
    factors: Vec<Factor>,
    subs: Vec<Sub>,
}

impl FactorDecomposition {
    /// Each factor is divided equally among the sub-problems of its variables;
    /// sub-problem `i` covers `i` and every variable sharing a factor with it.
    pub fn even_split(domains: Vec<usize>, factors: Vec<Factor>) -> Result<Self> {
        let n = domains.len();
        let mut shares = vec![Vec::new(); n];
        for (f, factor) in factors.iter().enumerate() {
            let mut vars = factor.vars.clone();
            vars.sort_unstable();
            vars.dedup();
            for &v in &vars {
                if v >= n {
                    return Err(Error::Parameter(format!("factor {f} references variable {v}, n = {n}")));
                }
                shares[v].push((f, 1.0 / vars.len() as f64));
            }
        }
        Self::with_shares(domains, factors, shares)
    }

    /// Explicit split: `shares[i]` lists `(factor, share)` owned by
    /// sub-problem `i`. Every factor's shares must sum to one.
    pub fn with_shares(domains: Vec<usize>, factors: Vec<Factor>, shares: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = domains.len();
        if shares.len() != n {
            return Err(Error::Dimension { expected: n, got: shares.len() });
        }
        if let Some(i) = domains.iter().position(|&m| m == 0) {
            return Err(Error::Parameter(format!("variable {i} has an empty domain")));
        }
        for (f, factor) in factors.iter().enumerate() {
            if factor.vars.is_empty() {
                return Err(Error::Parameter(format!("factor {f} has no variables")));
            }
            if let Some(&v) = factor.vars.iter().find(|&&v| v >= n) {
                return Err(Error::Parameter(format!("factor {f} references variable {v}, n = {n}")));
            }
            let size: usize = factor.vars.iter().map(|&v| domains[v]).product();
            if factor.table.len() != size {
                return Err(Error::Dimension { expected: size, got: factor.table.len() });
            }
            if factor.table.iter().any(|&t| t.is_nan() || t < 0.0) {
                return Err(Error::Parameter(format!(
                    "factor {f} has a negative or NaN entry; costs must be nonnegative"
                )));
            }
        }
        let mut total = vec![0.0; factors.len()];
        for list in &shares {
            for &(f, s) in list {
                if f >= factors.len() || !(s > 0.0) {
                    return Err(Error::Parameter(format!("invalid share ({f}, {s})")));
                }
                total[f] += s;
            }
        }
        if let Some(f) = total.iter().position(|t| (t - 1.0).abs() > 1e-12) {
            return Err(Error::Parameter(format!("shares of factor {f} sum to {}, not 1", total[f])));
        }
        let subs = shares
            .into_iter()
            .enumerate()
            .map(|(i, list)| {
                let mut scope = vec![i];
                for &(f, _) in &list {
                    scope.extend(&factors[f].vars);
                }
                scope.sort_unstable();
                scope.dedup();
                let space: usize = scope.iter().map(|&v| domains[v]).product();
                if space > MAX_SCOPE_SPACE {
                    return Err(Error::Capacity(format!(
                        "sub-problem {i} spans {space} assignments (limit {MAX_SCOPE_SPACE})"
                    )));
                }
                let terms = list
                    .into_iter()
                    .map(|(f, share)| Term {
                        factor: f,
                        share,
                        positions: factors[f]
                            .vars
                            .iter()
                            .map(|v| scope.binary_search(v).expect("in scope"))
                            .collect(),
                    })
                    .collect();
                Ok(Sub { scope, terms })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FactorDecomposition { domains, factors, subs })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn domains(&self) -> &[usize] {
        &self.domains
    }

    /// `E(x)` straight from the factors, `None` when a forbidden entry is hit.
    pub fn direct_cost(&self, x: &[usize]) -> Option<f64> {
        let mut sum = 0.0;
        for f in &self.factors {
            let t = f.table[f.index(&self.domains, |v| x[v])];
            if t.is_infinite() {
                return None;
            }
            sum += t;
        }
        Some(sum)
    }

    fn sub_cost(&self, sub: &Sub, local: &[usize]) -> f64 {
        sub.terms
            .iter()
            .map(|t| {
                let f = &self.factors[t.factor];
                let idx = t
                    .positions
                    .iter()
                    .zip(&f.vars)
                    .fold(0, |acc, (&p, &v)| acc * self.domains[v] + local[p]);
                t.share * f.table[idx]
            })
            .sum()
    }
}

impl Decomposition for FactorDecomposition {
    fn num_vars(&self) -> usize {
        self.domains.len()
    }

    fn domain_size(&self, var: usize) -> usize {
        self.domains[var]
    }

    fn scope(&self, sub: usize) -> &[usize] {
        &self.subs[sub].scope
    }

    fn min_pinned(&self, sub: usize, pin_pos: usize, pin_value: usize, blend: &Blend) -> f64 {
        let s = &self.subs[sub];
        let radix: Vec<usize> = s.scope.iter().map(|&v| self.domains[v]).collect();
        let mut local = vec![0usize; s.scope.len()];
        local[pin_pos] = pin_value;
        let mut best = f64::INFINITY;
        loop {
            let own = self.sub_cost(s, &local);
            if own.is_finite() {
                let soft: f64 = local.iter().enumerate().map(|(p, &v)| blend.soft(p)[v]).sum();
                best = best.min(blend.own_weight * own + soft);
            }
            // odometer over every position except the pinned one
            let mut p = local.len();
            loop {
                if p == 0 {
                    return best;
                }
                p -= 1;
                if p == pin_pos {
                    continue;
                }
                local[p] += 1;
                if local[p] < radix[p] {
                    break;
                }
                local[p] = 0;
            }
        }
    }

    fn evaluate(&self, sub: usize, x: &[usize]) -> Option<f64> {
        let s = &self.subs[sub];
        let local: Vec<usize> = s.scope.iter().map(|&v| x[v]).collect();
        let e = self.sub_cost(s, &local);
        e.is_finite().then_some(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_split_matches_direct_cost() {
        let dec = FactorDecomposition::even_split(
            vec![2, 3, 2],
            vec![
                Factor::new(vec![0, 1], vec![1.0, 2.0, 0.5, 3.0, 0.0, 4.0]),
                Factor::new(vec![1, 2], vec![0.0, 1.0, f64::INFINITY, 2.0, 1.0, 1.0]),
                Factor::new(vec![2], vec![0.25, 0.0]),
            ],
        )
        .unwrap();
        for a in 0..2 {
            for b in 0..3 {
                for c in 0..2 {
                    let x = [a, b, c];
                    match (dec.direct_cost(&x), dec.total_cost(&x)) {
                        (Some(d), Some(t)) => assert!((d - t).abs() < 1e-12),
                        (None, None) => {}
                        other => panic!("mismatch at {x:?}: {other:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_negative_costs_and_bad_shares() {
        let f = vec![Factor::pairwise(0, 1, [[0.0, -1.0], [1.0, 1.0]])];
        assert!(FactorDecomposition::even_split(vec![2, 2], f).is_err());
        let f = vec![Factor::pairwise(0, 1, [[0.0, 1.0], [1.0, 1.0]])];
        assert!(FactorDecomposition::with_shares(vec![2, 2], f, vec![vec![(0, 0.5)], vec![]]).is_err());
    }

    #[test]
    fn pinned_minimum_by_enumeration() {
        let dec = FactorDecomposition::even_split(
            vec![2, 2],
            vec![Factor::pairwise(0, 1, [[4.0, 0.0], [2.0, 6.0]])],
        )
        .unwrap();
        let blend = Blend::from_tables(1.0, &[vec![0.0, 0.0], vec![0.0, 0.0]]);
        // E_0 = f/2
        assert_eq!(dec.min_pinned(0, 0, 0, &blend), 0.0);
        assert_eq!(dec.min_pinned(0, 0, 1, &blend), 1.0);
        assert_eq!(dec.min_pinned(0, 1, 0, &blend), 1.0);
        let blend = Blend::from_tables(0.5, &[vec![0.0, 0.0], vec![0.0, 10.0]]);
        assert_eq!(dec.min_pinned(0, 0, 0, &blend), 1.0);
    }
}
