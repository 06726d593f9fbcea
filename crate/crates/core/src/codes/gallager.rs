//! Random column/row-regular LDPC codes.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LinearCode, ParityCheckMatrix};
use crate::error::{Error, Result};

/// A regular code together with construction metadata.
#[derive(Debug, Clone)]
pub struct GallagerCode {
    pub code: LinearCode,
    /// Length-4 cycles left after the removal pass.
    pub residual_four_cycles: usize,
}

/// Builds a random `(col_weight, row_weight)`-regular code with `n` bits.
///
/// When `row_weight` divides `n` the rows come from Gallager's stacked
/// permutation blocks; otherwise edge sockets are permuted as a whole and
/// repeated edges are redrawn. A best-effort pass of degree-preserving edge
/// swaps then removes 4-cycles. Same inputs give the same matrix.
pub fn build_gallager_regular(n: usize, col_weight: usize, row_weight: usize, seed: u64) -> Result<GallagerCode> {
    if col_weight == 0 || row_weight < 2 || row_weight > n {
        return Err(Error::Parameter(format!(
            "need col_weight >= 1 and 2 <= row_weight <= n (n={n}, col_weight={col_weight}, row_weight={row_weight})"
        )));
    }
    if !(n * col_weight).is_multiple_of(row_weight) {
        return Err(Error::Parameter(format!(
            "n * col_weight = {} is not divisible by row_weight = {row_weight}",
            n * col_weight
        )));
    }
    let checks = n * col_weight / row_weight;
    if col_weight > checks {
        return Err(Error::Parameter(format!(
            "col_weight {col_weight} exceeds the number of checks {checks}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = if n.is_multiple_of(row_weight) {
        gallager_blocks(n, col_weight, row_weight, &mut rng)
    } else {
        permuted_sockets(n, col_weight, row_weight, &mut rng)?
    };
    let residual = remove_four_cycles(&mut rows, n, &mut rng);
    let h = ParityCheckMatrix::new(n, rows)?;
    Ok(GallagerCode {
        code: LinearCode::from_parity_check(h),
        residual_four_cycles: residual,
    })
}

fn gallager_blocks(n: usize, col_weight: usize, row_weight: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut rows = Vec::with_capacity(n * col_weight / row_weight);
    let mut perm: Vec<usize> = (0..n).collect();
    for block in 0..col_weight {
        if block > 0 {
            perm.shuffle(rng);
        }
        rows.extend(perm.chunks(row_weight).map(<[usize]>::to_vec));
    }
    rows
}

fn permuted_sockets(n: usize, col_weight: usize, row_weight: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>> {
    let mut sockets: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, col_weight)).collect();
    sockets.shuffle(rng);
    let mut rows: Vec<Vec<usize>> = sockets.chunks(row_weight).map(<[usize]>::to_vec).collect();
    let budget = 1000 * sockets.len();
    let mut attempts = 0;
    while let Some((r, slot)) = find_repeat(&rows) {
        attempts += 1;
        if attempts > budget {
            return Err(Error::Parameter(
                "could not resolve repeated edges; degree sequence too dense".into(),
            ));
        }
        let v = rows[r][slot];
        let r2 = rng.random_range(0..rows.len());
        let s2 = rng.random_range(0..row_weight);
        let v2 = rows[r2][s2];
        if r2 == r || rows[r].contains(&v2) || rows[r2].contains(&v) {
            continue;
        }
        rows[r][slot] = v2;
        rows[r2][s2] = v;
    }
    Ok(rows)
}

fn find_repeat(rows: &[Vec<usize>]) -> Option<(usize, usize)> {
    rows.iter().enumerate().find_map(|(r, row)| {
        (1..row.len()).find(|&s| row[..s].contains(&row[s])).map(|s| (r, s))
    })
}

fn columns(rows: &[Vec<usize>], n: usize) -> Vec<Vec<usize>> {
    let mut cols = vec![Vec::new(); n];
    for (r, row) in rows.iter().enumerate() {
        for &v in row {
            cols[v].push(r);
        }
    }
    cols
}

fn four_cycles(rows: &[Vec<usize>], n: usize) -> (usize, Option<(usize, usize, usize)>) {
    let mut shared: HashMap<(usize, usize), usize> = HashMap::new();
    let mut witness = None;
    for (v, col) in columns(rows, n).iter().enumerate() {
        for (a, &r1) in col.iter().enumerate() {
            for &r2 in &col[a + 1..] {
                let key = (r1.min(r2), r1.max(r2));
                let count = shared.entry(key).or_default();
                *count += 1;
                if *count == 2 && witness.is_none() {
                    witness = Some((key.0, key.1, v));
                }
            }
        }
    }
    let total = shared.values().map(|&c| c * (c - 1) / 2).sum();
    (total, witness)
}

/// Degree-preserving swaps of one edge on a 4-cycle with a random edge,
/// accepted only when the total count drops. Returns the residual count.
fn remove_four_cycles(rows: &mut [Vec<usize>], n: usize, rng: &mut ChaCha8Rng) -> usize {
    let (mut count, mut witness) = four_cycles(rows, n);
    let edges: usize = rows.iter().map(Vec::len).sum();
    let budget = 20 * edges;
    let mut attempts = 0;
    while let Some((r1, r2, v)) = witness {
        if count == 0 || attempts >= budget {
            break;
        }
        attempts += 1;
        let r = if rng.random_bool(0.5) { r1 } else { r2 };
        let other = rng.random_range(0..rows.len());
        if other == r {
            continue;
        }
        let s_other = rng.random_range(0..rows[other].len());
        let v_other = rows[other][s_other];
        if rows[r].contains(&v_other) || rows[other].contains(&v) {
            continue;
        }
        let s = rows[r].iter().position(|&x| x == v).expect("edge on cycle");
        rows[r][s] = v_other;
        rows[other][s_other] = v;
        let (new_count, new_witness) = four_cycles(rows, n);
        if new_count < count {
            count = new_count;
            witness = new_witness;
        } else {
            rows[r][s] = v;
            rows[other][s_other] = v_other;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degrees(code: &LinearCode) -> (Vec<usize>, Vec<usize>) {
        let h = code.h();
        (
            h.cols().iter().map(Vec::len).collect(),
            h.rows().iter().map(Vec::len).collect(),
        )
    }

    #[test]
    fn degrees_match_request() {
        let g = build_gallager_regular(12, 3, 6, 1).unwrap();
        assert_eq!(g.code.h().num_checks(), 6);
        let (cols, rows) = degrees(&g.code);
        assert!(cols.iter().all(|&d| d == 3));
        assert!(rows.iter().all(|&d| d == 6));
    }

    #[test]
    fn deterministic_under_seed() {
        let a = build_gallager_regular(60, 3, 6, 42).unwrap();
        let b = build_gallager_regular(60, 3, 6, 42).unwrap();
        assert_eq!(a.code.h(), b.code.h());
        let c = build_gallager_regular(60, 3, 6, 43).unwrap();
        assert_ne!(a.code.h(), c.code.h());
    }

    #[test]
    fn socket_path_handles_non_dividing_row_weight() {
        let g = build_gallager_regular(15, 2, 3, 7).unwrap();
        let (cols, rows) = degrees(&g.code);
        assert_eq!(rows.len(), 10);
        assert!(cols.iter().all(|&d| d == 2));
        assert!(rows.iter().all(|&d| d == 3));
        assert_eq!(g.residual_four_cycles, g.code.h().four_cycle_count());
    }

    #[test]
    fn medium_code_rank_and_cycles() {
        let g = build_gallager_regular(1024, 3, 6, 9).unwrap();
        let h = g.code.h();
        assert_eq!(h.num_checks(), 512);
        let rank = h.rank_gf2();
        assert!(rank <= 512);
        assert_eq!(g.code.dimension(), 1024 - rank);
        assert_eq!(g.residual_four_cycles, h.four_cycle_count());
        assert_eq!(g.residual_four_cycles, 0);
    }

    #[test]
    fn infeasible_degrees_rejected() {
        assert!(matches!(build_gallager_regular(10, 3, 4, 0), Err(Error::Parameter(_))));
        assert!(matches!(build_gallager_regular(4, 3, 6, 0), Err(Error::Parameter(_))));
    }
}
