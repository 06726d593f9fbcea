//! Bit-packed dense GF(2) matrices and Gaussian elimination.

use super::ParityCheckMatrix;

const WORD: usize = 64;

/// Dense GF(2) matrix with rows packed into `u64` words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(WORD);
        BitMatrix {
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn from_parity_check(h: &ParityCheckMatrix) -> Self {
        let mut m = BitMatrix::zeros(h.num_checks(), h.num_vars());
        for (j, row) in h.rows().iter().enumerate() {
            for &i in row {
                m.set(j, i, true);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        if self.words == 0 {
            0
        } else {
            self.data.len() / self.words
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let w = &mut self.data[r * self.words + c / WORD];
        let mask = 1u64 << (c % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.words {
            self.data.swap(a * self.words + w, b * self.words + w);
        }
    }

    /// row[dst] ^= row[src]
    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let (s, d) = (src * self.words, dst * self.words);
        for w in 0..self.words {
            let v = self.data[s + w];
            self.data[d + w] ^= v;
        }
    }

    /// Reduces the matrix in place to reduced row-echelon form and returns the
    /// pivot column of each of the leading `rank` rows.
    pub fn reduce(&mut self) -> Vec<usize> {
        let rows = self.rows();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&p| self.get(p, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            for other in 0..rows {
                if other != r && self.get(other, c) {
                    self.xor_row_into(r, other);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Rank by forward elimination only (no back substitution).
    pub fn rank(mut self) -> usize {
        let rows = self.rows();
        let mut r = 0;
        for c in 0..self.cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&p| self.get(p, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            for other in r + 1..rows {
                if self.get(other, c) {
                    self.xor_row_into(r, other);
                }
            }
            r += 1;
        }
        r
    }
}

/// Rank of `h` over GF(2).
pub fn rank_gf2(h: &ParityCheckMatrix) -> usize {
    BitMatrix::from_parity_check(h).rank()
}

/// Packs a bit vector into little-endian words.
pub(crate) fn pack(bits: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; bits.len().div_ceil(WORD)];
    for (i, &b) in bits.iter().enumerate() {
        if b & 1 == 1 {
            out[i / WORD] |= 1 << (i % WORD);
        }
    }
    out
}

pub(crate) fn dot(a: &[u64], b: &[u64]) -> u8 {
    let ones: u32 = a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum();
    (ones & 1) as u8
}
