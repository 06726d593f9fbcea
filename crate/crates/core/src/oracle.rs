//! Exhaustive references used to check the decoders and the engine.

use crate::codes::LinearCode;
use crate::coop::{AssignmentConstraints, CoopEngine, Decomposition, PropagationMatrix};
use crate::error::{check_len, Error, Result};
use crate::ldpc::unary_costs;

/// Largest code dimension / assignment space (as a power of two) enumerated.
pub const MAX_ENUMERATION_BITS: u32 = 24;

/// Two codeword costs closer than this are a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MlDecision {
    pub codeword: Vec<u8>,
    /// `sum_i f_i(x_i)` with `f_i(0) = 2 a_i`, `f_i(1) = -2 a_i`.
    pub cost: f64,
    pub is_tie: bool,
    /// Runner-up cost minus the best cost; `None` for a one-codeword code.
    pub gap: Option<f64>,
}

/// Minimum-cost codeword over all `2^k` codewords, visited in Gray-code order
/// of the information word. Strict improvements only, so the first minimizer
/// visited wins a tie.
pub fn ml_decode_bruteforce(code: &LinearCode, llr: &[f64]) -> Result<MlDecision> {
    let n = code.n();
    check_len(n, llr.len())?;
    let k = code.dimension();
    if k > MAX_ENUMERATION_BITS as usize {
        return Err(Error::Capacity(format!(
            "dimension {k} exceeds the enumeration limit of {MAX_ENUMERATION_BITS}"
        )));
    }
    let f = unary_costs(llr);
    let generators = (0..k)
        .map(|b| {
            let mut u = vec![0u8; k];
            u[b] = 1;
            code.encode(&u)
        })
        .collect::<Result<Vec<_>>>()?;
    let cost_of = |x: &[u8]| -> f64 { x.iter().zip(&f).map(|(&b, t)| t[b as usize]).sum() };
    let mut x = vec![0u8; n];
    let mut best = (cost_of(&x), x.clone());
    let mut second = f64::INFINITY;
    for t in 1u64..(1u64 << k) {
        let g = &generators[t.trailing_zeros() as usize];
        for (xi, gi) in x.iter_mut().zip(g) {
            *xi ^= gi;
        }
        let c = cost_of(&x);
        if c < best.0 {
            second = best.0;
            best = (c, x.clone());
        } else if c < second {
            second = c;
        }
    }
    let gap = second.is_finite().then_some(second - best.0);
    Ok(MlDecision {
        codeword: best.1,
        cost: best.0,
        is_tie: gap.is_some_and(|g| g <= TIE_TOLERANCE),
        gap,
    })
}

/// Global minimum of `sum_i E_i` over the full assignment space, feasible
/// assignments only. Lexicographic scan with variable 0 most significant.
pub fn minimize_bruteforce<D: Decomposition + ?Sized>(dec: &D) -> Result<(Vec<usize>, f64)> {
    let n = dec.num_vars();
    let radix: Vec<usize> = (0..n).map(|v| dec.domain_size(v)).collect();
    let space = radix
        .iter()
        .try_fold(1u64, |acc, &m| acc.checked_mul(m as u64))
        .filter(|&s| s <= 1u64 << MAX_ENUMERATION_BITS);
    if space.is_none() {
        return Err(Error::Capacity(format!(
            "assignment space exceeds 2^{MAX_ENUMERATION_BITS}"
        )));
    }
    let mut x = vec![0usize; n];
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        if let Some(c) = dec.total_cost(&x) {
            if best.as_ref().is_none_or(|(_, b)| c < *b) {
                best = Some((x.clone(), c));
            }
        }
        let mut p = n;
        loop {
            if p == 0 {
                return best.ok_or_else(|| Error::Parameter("no feasible assignment".into()));
            }
            p -= 1;
            x[p] += 1;
            if x[p] < radix[p] {
                break;
            }
            x[p] = 0;
        }
    }
}

/// Runs the synchronous update `iterations` times from zero at constant
/// `lambda`; returns the final state and the sup-norm size of the last step.
pub fn estimate_equilibrium<D: Decomposition + ?Sized>(
    dec: &D,
    w: &PropagationMatrix,
    lambda: f64,
    iterations: usize,
) -> Result<(AssignmentConstraints, f64)> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Parameter(format!("lambda {lambda} outside [0, 1)")));
    }
    let engine = CoopEngine::new(dec, w)?;
    let mut c = AssignmentConstraints::for_decomposition(dec);
    let mut residual = f64::INFINITY;
    for _ in 0..iterations {
        let next = engine.update(&c, lambda, false)?;
        residual = next.sup_distance(&c);
        c = next;
    }
    Ok((c, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coop::{Factor, FactorDecomposition};

    #[test]
    fn dominant_codeword_found() {
        let code = LinearCode::hamming_7_4();
        let x = code.encode(&[0, 1, 1, 0]).unwrap();
        let llr: Vec<f64> = x.iter().map(|&b| if b == 1 { 3.0 } else { -3.0 }).collect();
        let ml = ml_decode_bruteforce(&code, &llr).unwrap();
        assert_eq!(ml.codeword, x);
        assert!(!ml.is_tie);
        assert!((ml.cost + 42.0).abs() < 1e-12);
    }

    #[test]
    fn zero_llr_is_a_tie() {
        let code = LinearCode::hamming_7_4();
        let ml = ml_decode_bruteforce(&code, &[0.0; 7]).unwrap();
        assert!(ml.is_tie);
        assert_eq!(ml.gap, Some(0.0));
    }

    #[test]
    fn dimension_limit() {
        let code = crate::codes::build_product_code(8, 2).unwrap();
        assert!(matches!(ml_decode_bruteforce(&code, &[0.0; 64]), Err(Error::Capacity(_))));
    }

    #[test]
    fn all_zero_costs_minimize_to_zero() {
        let dec = FactorDecomposition::even_split(vec![2, 3], vec![Factor::new(vec![0, 1], vec![0.0; 6])]).unwrap();
        assert_eq!(minimize_bruteforce(&dec).unwrap(), (vec![0, 0], 0.0));
    }

    #[test]
    fn lambda_zero_converges_immediately() {
        let dec = FactorDecomposition::even_split(
            vec![2, 2],
            vec![Factor::pairwise(0, 1, [[1.0, 3.0], [0.0, 2.0]])],
        )
        .unwrap();
        let w = PropagationMatrix::uniform(2);
        let (_, r1) = estimate_equilibrium(&dec, &w, 0.0, 1).unwrap();
        assert!(r1 > 0.0);
        let (_, r2) = estimate_equilibrium(&dec, &w, 0.0, 2).unwrap();
        assert_eq!(r2, 0.0);
    }
}
