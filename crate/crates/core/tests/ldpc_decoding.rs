use coopdec::channel::{transmit, ChannelParams};
use coopdec::codes::{build_gallager_regular, build_product_code, LinearCode, ParityCheckMatrix};
use coopdec::coop::Decomposition;
use coopdec::instances::{noisy_llr, random_tree_code};
use coopdec::ldpc::{
    decode_cooperative, normalized_unary_costs, parity_constrained_min, unary_costs, CoopDecoderConfig,
    CooperativeDecoder, TannerDecomposition, TannerStructure,
};
use coopdec::oracle::{minimize_bruteforce, ml_decode_bruteforce};
use coopdec::DecodeStatus;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Lexicographically first minimizer, position 0 most significant.
fn brute_parity(costs: &[(f64, f64)], parity: u8) -> (f64, Vec<u8>) {
    let m = costs.len();
    let mut best: Option<(f64, Vec<u8>)> = None;
    for code in 0u32..(1 << m) {
        let bits: Vec<u8> = (0..m).map(|k| ((code >> (m - 1 - k)) & 1) as u8).collect();
        if bits.iter().fold(0, |a, &b| a ^ b) != parity {
            continue;
        }
        let total: f64 = bits
            .iter()
            .zip(costs)
            .map(|(&b, &(c0, c1))| if b == 1 { c1 } else { c0 })
            .sum();
        if best.as_ref().is_none_or(|(t, _)| total < *t) {
            best = Some((total, bits));
        }
    }
    best.unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn parity_min_matches_enumeration(
        costs in prop::collection::vec((0u8..6, 0u8..6), 1..=10),
        parity in 0u8..2,
    ) {
        // small integers make exact ties common and sums exact
        let costs: Vec<(f64, f64)> = costs.iter().map(|&(a, b)| (a as f64, b as f64)).collect();
        prop_assert_eq!(parity_constrained_min(&costs, parity), brute_parity(&costs, parity));
    }

    #[test]
    fn parity_min_real_costs(
        costs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..=10),
        parity in 0u8..2,
    ) {
        let (v, bits) = parity_constrained_min(&costs, parity);
        let (bv, _) = brute_parity(&costs, parity);
        prop_assert!((v - bv).abs() < 1e-12);
        prop_assert_eq!(bits.iter().fold(0, |a, &b| a ^ b), parity);
    }
}

fn small_codes() -> Vec<ParityCheckMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut codes = vec![
        LinearCode::hamming_7_4().h().clone(),
        build_product_code(3, 2).unwrap().h().clone(),
        build_gallager_regular(12, 2, 4, 9).unwrap().code.h().clone(),
    ];
    codes.extend((0..3).map(|_| random_tree_code(10, 4, &mut rng)));
    codes
}

#[test]
fn subproblem_costs_sum_to_the_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for h in small_codes() {
        let n = h.num_vars();
        let s = TannerStructure::new(&h);
        let llr = noisy_llr(&vec![0; n], 1.0, &mut rng);
        let dec = TannerDecomposition::new(&s, &llr).unwrap();
        let f = normalized_unary_costs(&llr);
        for t in 0u32..(1 << n) {
            let bits: Vec<u8> = (0..n).map(|i| ((t >> i) & 1) as u8).collect();
            let x: Vec<usize> = bits.iter().map(|&b| b as usize).collect();
            match dec.total_cost(&x) {
                Some(e) => {
                    assert!(h.is_codeword(&bits));
                    let direct: f64 = x.iter().enumerate().map(|(i, &v)| f[i][v]).sum();
                    assert!((e - direct).abs() < 1e-9);
                }
                None => assert!(!h.is_codeword(&bits)),
            }
        }
    }
}

#[test]
fn exhaustive_minimum_agrees_with_ml() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for h in small_codes() {
        let code = LinearCode::from_parity_check(h);
        let s = TannerStructure::new(code.h());
        for _ in 0..10 {
            let llr = noisy_llr(&vec![0; code.n()], 1.0, &mut rng);
            let ml = ml_decode_bruteforce(&code, &llr).unwrap();
            if ml.is_tie {
                continue;
            }
            // paper-form unaries; only the argmin is compared
            let dec = TannerDecomposition::with_unary(&s, unary_costs(&llr));
            let (x, _) = minimize_bruteforce(&dec).unwrap();
            let bits: Vec<u8> = x.iter().map(|&v| v as u8).collect();
            assert_eq!(bits, ml.codeword);
        }
    }
}

#[test]
fn hamming_consensus_outputs_are_ml() {
    let code = LinearCode::hamming_7_4();
    let decoder = CooperativeDecoder::new(code.h(), CoopDecoderConfig::default()).unwrap();
    let params = ChannelParams::new(4.0, code.rate(), 99).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut consensus = 0;
    for frame in 0..500 {
        let info: Vec<u8> = (0..4).map(|_| rng.random_range(0..2)).collect();
        let x = code.encode(&info).unwrap();
        let rx = transmit(&x, &params, frame).unwrap();
        let r = decoder.decode(&rx.llr).unwrap();
        assert!(r.iterations <= 120);
        if r.status == DecodeStatus::Consensus {
            consensus += 1;
            let ml = ml_decode_bruteforce(&code, &rx.llr).unwrap();
            if !ml.is_tie {
                assert_eq!(r.codeword, ml.codeword, "frame {frame}");
            }
        }
    }
    assert!(consensus > 250, "{consensus} consensus frames");
}

#[test]
fn decoding_is_deterministic_and_bound_trace_monotone() {
    let code = build_product_code(8, 2).unwrap();
    let params = ChannelParams::new(3.0, code.rate(), 5).unwrap();
    let config = CoopDecoderConfig::default();
    for frame in 0..20 {
        let rx = transmit(&[0; 64], &params, frame).unwrap();
        let a = decode_cooperative(&code, &rx.llr, &config).unwrap();
        let b = decode_cooperative(&code, &rx.llr, &config).unwrap();
        assert_eq!(a, b);
        for pair in a.lower_bound_trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-9);
        }
        if let Some(g) = a.gap_certificate {
            assert!(g >= 0.0);
        }
    }
}

#[test]
fn parallel_updates_match_serial() {
    let code = build_product_code(8, 2).unwrap();
    let params = ChannelParams::new(3.0, code.rate(), 17).unwrap();
    let serial = CooperativeDecoder::new(code.h(), CoopDecoderConfig::default()).unwrap();
    let parallel = CooperativeDecoder::new(
        code.h(),
        CoopDecoderConfig {
            parallel: true,
            ..CoopDecoderConfig::default()
        },
    )
    .unwrap();
    for frame in 0..5 {
        let rx = transmit(&[0; 64], &params, frame).unwrap();
        assert_eq!(serial.decode(&rx.llr).unwrap(), parallel.decode(&rx.llr).unwrap());
    }
}

#[test]
fn low_snr_frames_hit_the_iteration_cap() {
    let code = build_product_code(8, 2).unwrap();
    let params = ChannelParams::new(-6.0, code.rate(), 1).unwrap();
    let decoder = CooperativeDecoder::new(code.h(), CoopDecoderConfig::default()).unwrap();
    let mut capped = 0;
    for frame in 0..10 {
        let rx = transmit(&[0; 64], &params, frame).unwrap();
        let r = decoder.decode(&rx.llr).unwrap();
        assert!(r.iterations <= 120);
        assert_eq!(r.lower_bound_trace.len(), r.iterations);
        if r.status == DecodeStatus::MaxIterations {
            assert_eq!(r.iterations, 120);
            capped += 1;
        }
    }
    assert!(capped > 0);
}
