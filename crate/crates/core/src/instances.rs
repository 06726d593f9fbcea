//! Random problem instances for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::codes::ParityCheckMatrix;
use crate::coop::{build_propagation_matrix, Decomposition, Factor, FactorDecomposition, PropagationMatrix};
use crate::error::Result;

/// Connected pairwise binary problem on `n` variables: a random spanning
/// tree plus each remaining pair with probability `extra_edge_prob`, every
/// factor and unary with costs uniform in `[0, max_cost)`.
pub fn random_pairwise<R: Rng>(n: usize, extra_edge_prob: f64, max_cost: f64, rng: &mut R) -> FactorDecomposition {
    assert!(n >= 2, "need at least two variables");
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.random_range(0..k)];
        edges.push((parent.min(order[k]), parent.max(order[k])));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !edges.contains(&(a, b)) && rng.random_bool(extra_edge_prob) {
                edges.push((a, b));
            }
        }
    }
    edges.sort_unstable();
    let mut cost = || rng.random_range(0.0..max_cost);
    let mut factors: Vec<Factor> = edges
        .iter()
        .map(|&(a, b)| Factor::pairwise(a, b, [[cost(), cost()], [cost(), cost()]]))
        .collect();
    factors.extend((0..n).map(|i| Factor::new(vec![i], vec![cost(), cost()])));
    FactorDecomposition::even_split(vec![2; n], factors).expect("valid random instance")
}

/// Propagation matrix over the scopes of `dec` (neighbors = scope members).
pub fn scope_propagation_matrix<D: Decomposition + ?Sized>(dec: &D) -> Result<PropagationMatrix> {
    let sets: Vec<Vec<usize>> = (0..dec.num_vars())
        .map(|i| dec.scope(i).iter().copied().filter(|&j| j != i).collect())
        .collect();
    build_propagation_matrix(&sets)
}

/// Connected cycle-free parity-check matrix on `n >= 2` variables with
/// check degrees between 2 and `max_check_degree`.
pub fn random_tree_code<R: Rng>(n: usize, max_check_degree: usize, rng: &mut R) -> ParityCheckMatrix {
    assert!(n >= 2 && max_check_degree >= 2);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let first = rng.random_range(2..=max_check_degree.min(n));
    let mut rows = vec![order[..first].to_vec()];
    let mut used = first;
    while used < n {
        // one variable already in the tree plus fresh ones keeps it acyclic
        let fresh = rng.random_range(1..max_check_degree).min(n - used);
        let mut row = vec![order[rng.random_range(0..used)]];
        row.extend_from_slice(&order[used..used + fresh]);
        used += fresh;
        rows.push(row);
    }
    ParityCheckMatrix::new(n, rows).expect("valid tree code")
}

/// AWGN LLRs `2 y / sigma^2` for a given codeword.
pub fn noisy_llr<R: Rng>(x: &[u8], sigma: f64, rng: &mut R) -> Vec<f64> {
    let normal = rand_distr::Normal::new(0.0, sigma).expect("positive sigma");
    x.iter()
        .map(|&b| {
            let s = if b == 1 { 1.0 } else { -1.0 };
            2.0 * (s + rng.sample(normal)) / (sigma * sigma)
        })
        .collect()
}
