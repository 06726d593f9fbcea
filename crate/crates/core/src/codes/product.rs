//! Multidimensional single-parity-check product codes.

use super::{LinearCode, ParityCheckMatrix};
use crate::error::{Error, Result};

/// Upper bound on `dims * side^dims` (Tanner edges) accepted by default.
pub const DEFAULT_PRODUCT_EDGE_CAP: usize = 1 << 26;

/// Geometry of a `(side, side-1)^dims` product code. Bit `i` sits at the
/// coordinates of `i` written in base `side`, least significant axis first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductLayout {
    side: usize,
    dims: usize,
}

impl ProductLayout {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.side.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn stride(&self, axis: usize) -> usize {
        self.side.pow(axis as u32)
    }

    /// Positions whose coordinates are all below `side - 1`, ascending.
    pub fn info_positions(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| {
                let mut rest = i;
                (0..self.dims).all(|_| {
                    let c = rest % self.side;
                    rest /= self.side;
                    c < self.side - 1
                })
            })
            .collect()
    }

    /// Start index of every line along `axis` (the coordinate on `axis` is 0).
    fn line_starts(&self, axis: usize) -> impl Iterator<Item = usize> + '_ {
        let stride = self.stride(axis);
        (0..self.len()).filter(move |&i| (i / stride).is_multiple_of(self.side))
    }

    /// Fills the parity positions axis by axis; each pass makes every line
    /// along that axis even, and later passes preserve earlier ones.
    pub(crate) fn complete_parities(&self, x: &mut [u8]) {
        for axis in 0..self.dims {
            let stride = self.stride(axis);
            for start in self.line_starts(axis).collect::<Vec<_>>() {
                let parity = (0..self.side - 1).fold(0u8, |acc, t| acc ^ x[start + t * stride]);
                x[start + (self.side - 1) * stride] = parity;
            }
        }
    }

    fn checks(&self) -> Vec<Vec<usize>> {
        let mut rows = Vec::with_capacity(self.dims * self.len() / self.side);
        for axis in 0..self.dims {
            let stride = self.stride(axis);
            for start in self.line_starts(axis) {
                rows.push((0..self.side).map(|t| start + t * stride).collect());
            }
        }
        rows
    }
}

/// Builds the `(side, side-1)^dims` single-parity-check product code.
pub fn build_product_code(side: usize, dims: usize) -> Result<LinearCode> {
    build_product_code_with_cap(side, dims, DEFAULT_PRODUCT_EDGE_CAP)
}

pub fn build_product_code_with_cap(side: usize, dims: usize, edge_cap: usize) -> Result<LinearCode> {
    if side < 2 || dims < 1 {
        return Err(Error::Parameter(format!(
            "product code needs side >= 2 and dims >= 1, got side={side}, dims={dims}"
        )));
    }
    let edges = u32::try_from(dims)
        .ok()
        .and_then(|d| side.checked_pow(d))
        .and_then(|len| len.checked_mul(dims));
    match edges {
        Some(e) if e <= edge_cap => {}
        _ => {
            return Err(Error::Capacity(format!(
                "product code side={side} dims={dims} exceeds {edge_cap} Tanner edges"
            )))
        }
    }
    let layout = ProductLayout { side, dims };
    let h = ParityCheckMatrix::new(layout.len(), layout.checks())?;
    Ok(LinearCode::from_product(h, layout))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_parity_check_code() {
        let code = build_product_code(8, 1).unwrap();
        assert_eq!((code.n(), code.dimension(), code.h().num_checks()), (8, 7, 1));
    }

    #[test]
    fn two_dimensional_geometry() {
        let code = build_product_code(8, 2).unwrap();
        assert_eq!(code.n(), 64);
        assert_eq!(code.h().num_checks(), 16);
        assert_eq!(code.dimension(), 49);
        assert_eq!(code.h().rank_gf2(), 15);
        assert!(code.h().cols().iter().all(|c| c.len() == 2));
        assert!(code.h().rows().iter().all(|r| r.len() == 8));
    }

    #[test]
    fn five_dimensional_metadata() {
        let code = build_product_code(8, 5).unwrap();
        assert_eq!(code.n(), 32768);
        assert_eq!(code.dimension(), 16807);
        assert_eq!(code.h().num_checks(), 5 * 4096);
        assert!((code.rate() - 0.513).abs() < 5e-4);
    }

    #[test]
    fn capacity_and_parameter_errors() {
        assert!(matches!(build_product_code(1, 2), Err(Error::Parameter(_))));
        assert!(matches!(build_product_code(8, 0), Err(Error::Parameter(_))));
        assert!(matches!(build_product_code_with_cap(8, 3, 1000), Err(Error::Capacity(_))));
        assert!(matches!(build_product_code(8, 40), Err(Error::Capacity(_))));
    }
}
