//! Binary linear codes: parity-check matrices, constructors, encoders and
//! AList I/O.

mod alist;
mod gallager;
mod gf2;
mod product;

pub use alist::{alist_read, alist_write};
pub use gallager::{build_gallager_regular, GallagerCode};
pub use gf2::{rank_gf2, BitMatrix};
pub use product::{build_product_code, build_product_code_with_cap, ProductLayout, DEFAULT_PRODUCT_EDGE_CAP};

use crate::error::{check_len, Error, Result};

/// Sparse binary parity-check matrix with row and column adjacency.
///
/// Rows are checks, columns are code bits. Redundant rows are kept as given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from the variable support of each check.
    ///
    /// Supports are sorted; duplicates, out-of-range indices and checks
    /// touching fewer than two variables are rejected.
    pub fn new(n: usize, mut rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut cols = vec![Vec::new(); n];
        for (j, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.len() < 2 {
                return Err(Error::Parameter(format!(
                    "check {j} has {} variable(s), at least 2 required",
                    row.len()
                )));
            }
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::Parameter(format!("check {j} lists variable {} twice", w[0])));
            }
            if let Some(&last) = row.last() {
                if last >= n {
                    return Err(Error::Parameter(format!(
                        "check {j} references variable {last}, n = {n}"
                    )));
                }
            }
            for &i in row.iter() {
                cols[i].push(j);
            }
        }
        Ok(ParityCheckMatrix { n, rows, cols })
    }

    /// Builds a matrix from dense 0/1 rows.
    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self> {
        let n = dense.first().map_or(0, Vec::len);
        let rows = dense
            .iter()
            .map(|r| {
                check_len(n, r.len())?;
                Ok(r.iter().enumerate().filter(|(_, &b)| b != 0).map(|(i, _)| i).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, rows)
    }

    /// Number of code bits (columns).
    pub fn num_vars(&self) -> usize {
        self.n
    }

    /// Number of checks (rows), including redundant ones.
    pub fn num_checks(&self) -> usize {
        self.rows.len()
    }

    pub fn num_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, check: usize) -> &[usize] {
        &self.rows[check]
    }

    pub fn col(&self, var: usize) -> &[usize] {
        &self.cols[var]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    /// Syndrome `H x^T mod 2`.
    pub fn syndrome(&self, x: &[u8]) -> Result<Vec<u8>> {
        check_len(self.n, x.len())?;
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &i| acc ^ (x[i] & 1)))
            .collect())
    }

    /// True when every check is satisfied. Panics on length mismatch.
    pub fn is_codeword(&self, x: &[u8]) -> bool {
        assert_eq!(x.len(), self.n, "word length");
        self.rows
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &i| acc ^ (x[i] & 1)) == 0)
    }

    pub fn rank_gf2(&self) -> usize {
        rank_gf2(self)
    }

    /// Number of length-4 cycles in the Tanner graph, i.e. the number of
    /// (check pair, variable pair) combinations sharing both.
    pub fn four_cycle_count(&self) -> usize {
        use std::collections::HashMap;
        let mut shared: HashMap<(usize, usize), usize> = HashMap::new();
        for col in &self.cols {
            for (a, &r1) in col.iter().enumerate() {
                for &r2 in &col[a + 1..] {
                    *shared.entry((r1, r2)).or_default() += 1;
                }
            }
        }
        shared.values().map(|&c| c * (c.saturating_sub(1)) / 2).sum()
    }

    /// True when the Tanner graph has no cycles.
    pub fn is_cycle_free(&self) -> bool {
        // union-find: an edge joining two already-connected nodes closes a cycle
        let vertices = self.n + self.rows.len();
        let mut parent: Vec<usize> = (0..vertices).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (j, row) in self.rows.iter().enumerate() {
            for &i in row {
                let (a, b) = (find(&mut parent, i), find(&mut parent, self.n + j));
                if a == b {
                    return false;
                }
                parent[a] = b;
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Encoder {
    /// Reduced row-echelon form of H; pivot bits are solved from the rest.
    Systematic { reduced: Vec<Vec<u64>>, pivots: Vec<usize> },
    Product(ProductLayout),
}

/// A binary linear code together with a systematic encoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCode {
    h: ParityCheckMatrix,
    dimension: usize,
    info_positions: Vec<usize>,
    encoder: Encoder,
}

impl LinearCode {
    /// Derives a systematic encoder from `h` by GF(2) elimination with column
    /// pivoting. Information bits occupy the non-pivot columns.
    pub fn from_parity_check(h: ParityCheckMatrix) -> Self {
        let mut m = BitMatrix::from_parity_check(&h);
        let pivots = m.reduce();
        let reduced = (0..pivots.len()).map(|r| m.row_words(r).to_vec()).collect();
        let mut is_pivot = vec![false; h.num_vars()];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let info_positions: Vec<usize> = (0..h.num_vars()).filter(|&i| !is_pivot[i]).collect();
        LinearCode {
            dimension: info_positions.len(),
            h,
            info_positions,
            encoder: Encoder::Systematic { reduced, pivots },
        }
    }

    pub(crate) fn from_product(h: ParityCheckMatrix, layout: ProductLayout) -> Self {
        let info_positions = layout.info_positions();
        LinearCode {
            dimension: info_positions.len(),
            h,
            info_positions,
            encoder: Encoder::Product(layout),
        }
    }

    /// The (7,4) Hamming code in its usual systematic parity-check form.
    pub fn hamming_7_4() -> Self {
        let h = ParityCheckMatrix::from_dense(&[
            vec![1, 1, 1, 0, 1, 0, 0],
            vec![1, 1, 0, 1, 0, 1, 0],
            vec![1, 0, 1, 1, 0, 0, 1],
        ])
        .expect("static matrix");
        Self::from_parity_check(h)
    }

    pub fn h(&self) -> &ParityCheckMatrix {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.h.num_vars()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rate(&self) -> f64 {
        self.dimension as f64 / self.n() as f64
    }

    /// Codeword positions carrying the information bits, in encoder order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn product_layout(&self) -> Option<&ProductLayout> {
        match &self.encoder {
            Encoder::Product(layout) => Some(layout),
            Encoder::Systematic { .. } => None,
        }
    }

    /// Maps `dimension` information bits to a codeword.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        check_len(self.dimension, info.len())?;
        let mut x = vec![0u8; self.n()];
        for (&pos, &b) in self.info_positions.iter().zip(info) {
            x[pos] = b & 1;
        }
        match &self.encoder {
            Encoder::Systematic { reduced, pivots } => {
                let packed = gf2::pack(&x);
                for (row, &p) in reduced.iter().zip(pivots) {
                    // Pivot bits are still zero in `packed`, and each reduced row
                    // touches exactly one pivot column.
                    x[p] = gf2::dot(row, &packed);
                }
            }
            Encoder::Product(layout) => layout.complete_parities(&mut x),
        }
        Ok(x)
    }

    /// Extracts the information bits of a codeword.
    pub fn extract_info(&self, x: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| x[p]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_word_has_zero_syndrome() {
        let code = build_product_code(8, 2).unwrap();
        let s = code.h().syndrome(&[0; 64]).unwrap();
        assert!(s.iter().all(|&b| b == 0));
    }

    #[test]
    fn even_weight_on_support_passes() {
        let h = ParityCheckMatrix::new(3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(h.syndrome(&[1, 1, 0]).unwrap(), vec![0]);
        assert_eq!(h.syndrome(&[1, 0, 0]).unwrap(), vec![1]);
    }

    #[test]
    fn syndrome_rejects_wrong_length() {
        let h = ParityCheckMatrix::new(3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(h.syndrome(&[1, 1]), Err(Error::Dimension { expected: 3, got: 2 }));
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(ParityCheckMatrix::new(3, vec![vec![0]]).is_err());
        assert!(ParityCheckMatrix::new(3, vec![vec![0, 0, 1]]).is_err());
        assert!(ParityCheckMatrix::new(3, vec![vec![0, 3]]).is_err());
    }

    #[test]
    fn row_and_column_views_are_transposes() {
        let code = build_gallager_regular(24, 3, 6, 5).unwrap().code;
        let h = code.h();
        for (j, row) in h.rows().iter().enumerate() {
            for &i in row {
                assert!(h.col(i).contains(&j));
            }
        }
        let col_total: usize = h.cols().iter().map(Vec::len).sum();
        assert_eq!(col_total, h.num_edges());
    }

    #[test]
    fn hamming_encoder_produces_sixteen_codewords() {
        let code = LinearCode::hamming_7_4();
        assert_eq!(code.dimension(), 4);
        let mut words = std::collections::BTreeSet::new();
        for u in 0..16u8 {
            let info: Vec<u8> = (0..4).map(|b| (u >> b) & 1).collect();
            let x = code.encode(&info).unwrap();
            assert!(code.h().is_codeword(&x));
            assert_eq!(code.extract_info(&x), info);
            words.insert(x);
        }
        assert_eq!(words.len(), 16);
    }

    #[test]
    fn product_encoder_checked_by_independent_row_xor() {
        let code = build_product_code(8, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let info: Vec<u8> = (0..49).map(|_| rng.random_range(0..2)).collect();
            let x = code.encode(&info).unwrap();
            // Independent check: every row and every column of the 8x8 grid is even.
            for a in 0..8 {
                let row: u8 = (0..8).map(|b| x[a * 8 + b]).fold(0, |s, v| s ^ v);
                let col: u8 = (0..8).map(|b| x[b * 8 + a]).fold(0, |s, v| s ^ v);
                assert_eq!((row, col), (0, 0));
            }
        }
    }

    #[test]
    fn systematic_encoder_matches_rank() {
        let code = LinearCode::from_parity_check(build_product_code(8, 2).unwrap().h().clone());
        assert_eq!(code.dimension(), 49);
        assert_eq!(code.dimension() + code.h().rank_gf2(), code.n());
    }

    #[test]
    fn cycle_detection() {
        let tree = ParityCheckMatrix::new(5, vec![vec![0, 1, 2], vec![2, 3, 4]]).unwrap();
        assert!(tree.is_cycle_free());
        let h = LinearCode::hamming_7_4();
        assert!(!h.h().is_cycle_free());
        assert!(h.h().four_cycle_count() > 0);
    }
}
