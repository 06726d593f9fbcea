//! Propagation matrices: nonnegative, irreducible, unit column sums.

use std::collections::VecDeque;

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Sparse square matrix `W` stored by rows; entry `(i, j)` weighs the soft
/// decision of variable `j` inside sub-problem `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

/// First property a candidate propagation matrix fails, if any.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Negative { row: usize, col: usize, value: f64 },
    ColumnSum { col: usize, sum: f64 },
    /// Support graph not strongly connected; `unreached` cannot be reached
    /// from (or cannot reach) variable 0.
    Reducible { unreached: usize },
    Asymmetric { row: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violation: Option<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

impl PropagationMatrix {
    /// Builds a matrix from `(row, col, weight)` triplets. Repeated positions
    /// are summed. Only the shape is checked here; see [`Self::validate`].
    pub fn from_triplets(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, j, w) in entries {
            if i >= n || j >= n {
                return Err(Error::Parameter(format!("entry ({i}, {j}) outside a {n}x{n} matrix")));
            }
            if !w.is_finite() {
                return Err(Error::Parameter(format!("entry ({i}, {j}) is not finite")));
            }
            rows[i].push((j, w));
        }
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, w) in row.iter() {
                match merged.last_mut() {
                    Some((pj, pw)) if *pj == j => *pw += w,
                    _ => merged.push((j, w)),
                }
            }
            *row = merged;
        }
        Ok(PropagationMatrix { n, rows })
    }

    pub fn from_dense(dense: &[Vec<f64>]) -> Result<Self> {
        let n = dense.len();
        let mut entries = Vec::new();
        for (i, row) in dense.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, got: row.len() });
            }
            entries.extend(row.iter().enumerate().filter(|(_, &w)| w != 0.0).map(|(j, &w)| (i, j, w)));
        }
        Self::from_triplets(n, entries)
    }

    /// The matrix with every entry equal to `1/n`.
    pub fn uniform(n: usize) -> Self {
        let w = 1.0 / n as f64;
        PropagationMatrix {
            n,
            rows: (0..n).map(|_| (0..n).map(|j| (j, w)).collect()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Nonzero entries of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map_or(0.0, |k| self.rows[i][k].1)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for row in &self.rows {
            for &(j, w) in row {
                sums[j] += w;
            }
        }
        sums
    }

    /// Largest row sum; the sup-norm Lipschitz factor of the cooperative update
    /// is `lambda` times this.
    pub fn max_row_sum(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(_, w)| w).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Checks nonnegativity, unit column sums, irreducibility (strong
    /// connectivity of the support) and, if asked, symmetry, in that order.
    pub fn validate(&self, require_symmetric: bool) -> ValidationReport {
        let violation = self.first_violation(require_symmetric);
        ValidationReport { violation }
    }

    fn first_violation(&self, require_symmetric: bool) -> Option<Violation> {
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(&(j, w)) = row.iter().find(|&&(_, w)| w < 0.0) {
                return Some(Violation::Negative { row: i, col: j, value: w });
            }
        }
        for (j, sum) in self.column_sums().into_iter().enumerate() {
            if (sum - 1.0).abs() > SUM_TOL {
                return Some(Violation::ColumnSum { col: j, sum });
            }
        }
        if let Some(unreached) = self.strongly_connected_witness() {
            return Some(Violation::Reducible { unreached });
        }
        if require_symmetric {
            for (i, row) in self.rows.iter().enumerate() {
                for &(j, w) in row {
                    if (self.get(j, i) - w).abs() > SUM_TOL {
                        return Some(Violation::Asymmetric { row: i, col: j });
                    }
                }
            }
        }
        None
    }

    /// A vertex not strongly connected with vertex 0, if any.
    fn strongly_connected_witness(&self) -> Option<usize> {
        if self.n == 0 {
            return None;
        }
        let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                if w > 0.0 {
                    reverse[j].push(i);
                }
            }
        }
        let forward = |v: usize| self.rows[v].iter().filter(|&&(_, w)| w > 0.0).map(|&(j, _)| j).collect::<Vec<_>>();
        let reach_fwd = reachable(self.n, forward);
        let reach_bwd = reachable(self.n, |v| reverse[v].clone());
        (0..self.n).find(|&v| !reach_fwd[v] || !reach_bwd[v])
    }
}

fn reachable(n: usize, next: impl Fn(usize) -> Vec<usize>) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for u in next(v) {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen
}

/// Symmetric propagation matrix over a neighbor relation.
///
/// With `d` the largest neighborhood size, off-diagonal neighbors get `1/d`
/// and the diagonal takes the remainder `1 - deg(i)/d`. If that leaves the
/// whole diagonal empty on a bipartite graph, `d + 1` is used instead so
/// every variable keeps some self weight.
pub fn build_propagation_matrix(neighbor_sets: &[Vec<usize>]) -> Result<PropagationMatrix> {
    let n = neighbor_sets.len();
    let sets: Vec<Vec<usize>> = neighbor_sets
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut s: Vec<usize> = s.iter().copied().filter(|&j| j != i).collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    for (i, s) in sets.iter().enumerate() {
        for &j in s {
            if j >= n {
                return Err(Error::Topology(format!("variable {i} lists neighbor {j}, n = {n}")));
            }
            if sets[j].binary_search(&i).is_err() {
                return Err(Error::Topology(format!(
                    "neighbor relation is not symmetric: {j} is a neighbor of {i} but not vice versa"
                )));
            }
        }
    }
    if n > 0 {
        let seen = reachable(n, |v| sets[v].clone());
        if let Some(v) = (0..n).find(|&v| !seen[v]) {
            let component: Vec<usize> = {
                let comp = reachable_from(n, v, &sets);
                (0..n).filter(|&u| comp[u]).collect()
            };
            return Err(Error::Topology(format!(
                "neighbor graph is disconnected: variables {component:?} are separated from variable 0"
            )));
        }
    }
    let max_degree = sets.iter().map(Vec::len).max().unwrap_or(0);
    let zero_diagonal = sets.iter().all(|s| s.len() == max_degree);
    let denom = if max_degree == 0 {
        1
    } else if zero_diagonal && is_bipartite(&sets) {
        max_degree + 1
    } else {
        max_degree
    } as f64;
    let entries = sets.iter().enumerate().flat_map(|(i, s)| {
        let own = 1.0 - s.len() as f64 / denom;
        std::iter::once((i, i, own))
            .filter(|&(_, _, w)| w > 0.0)
            .chain(s.iter().map(move |&j| (i, j, 1.0 / denom)))
            .collect::<Vec<_>>()
    });
    PropagationMatrix::from_triplets(n, entries)
}

fn reachable_from(n: usize, start: usize, sets: &[Vec<usize>]) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        for &u in &sets[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen
}

fn is_bipartite(sets: &[Vec<usize>]) -> bool {
    let mut color: Vec<Option<bool>> = vec![None; sets.len()];
    for start in 0..sets.len() {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let c = color[v].expect("colored");
            for &u in &sets[v] {
                match color[u] {
                    None => {
                        color[u] = Some(!c);
                        queue.push_back(u);
                    }
                    Some(cu) if cu == c => return false,
                    Some(_) => {}
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_reducible() {
        let w = PropagationMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(w.validate(false).violation, Some(Violation::Reducible { unreached: 1 }));
    }

    #[test]
    fn uniform_passes() {
        assert!(PropagationMatrix::uniform(5).validate(true).passed());
    }

    #[test]
    fn detects_each_violation() {
        let neg = PropagationMatrix::from_dense(&[vec![1.5, 0.5], vec![-0.5, 0.5]]).unwrap();
        assert!(matches!(neg.validate(false).violation, Some(Violation::Negative { row: 1, col: 0, .. })));
        let sums = PropagationMatrix::from_dense(&[vec![0.5, 0.5], vec![0.4, 0.5]]).unwrap();
        assert!(matches!(sums.validate(false).violation, Some(Violation::ColumnSum { col: 0, .. })));
        let asym = PropagationMatrix::from_dense(&[vec![0.5, 0.25], vec![0.5, 0.75]]).unwrap();
        assert!(asym.validate(false).passed());
        assert!(matches!(asym.validate(true).violation, Some(Violation::Asymmetric { .. })));
    }

    #[test]
    fn triangle_weights() {
        let w = build_propagation_matrix(&[vec![1, 2], vec![0, 2], vec![0, 1]]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(w.get(i, j), if i == j { 0.0 } else { 0.5 });
            }
        }
        assert!(w.validate(true).passed());
    }

    #[test]
    fn path_weights() {
        let w = build_propagation_matrix(&[vec![1], vec![0, 2], vec![1]]).unwrap();
        assert_eq!(w.get(0, 1), 0.5);
        assert_eq!(w.get(1, 2), 0.5);
        assert_eq!(w.get(0, 0), 0.5);
        assert_eq!(w.get(1, 1), 0.0);
        assert_eq!(w.get(2, 2), 0.5);
        assert!(w.column_sums().iter().all(|&s| (s - 1.0).abs() < 1e-12));
        assert!(w.validate(true).passed());
    }

    #[test]
    fn even_cycle_gets_self_loops() {
        // 4-cycle: regular and bipartite
        let w = build_propagation_matrix(&[vec![1, 3], vec![0, 2], vec![1, 3], vec![0, 2]]).unwrap();
        for i in 0..4 {
            assert!((w.get(i, i) - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(w.validate(true).passed());
    }

    #[test]
    fn topology_errors() {
        let err = build_propagation_matrix(&[vec![1], vec![0], vec![3], vec![2]]).unwrap_err();
        match err {
            Error::Topology(msg) => assert!(msg.contains("[2, 3]"), "{msg}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(build_propagation_matrix(&[vec![1], vec![]]), Err(Error::Topology(_))));
    }

    #[test]
    fn singleton() {
        let w = build_propagation_matrix(&[vec![]]).unwrap();
        assert_eq!(w.get(0, 0), 1.0);
        assert!(w.validate(true).passed());
    }
}
