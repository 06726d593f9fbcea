//! Paired-frame Monte-Carlo sweeps.
//!
//! Every frame is generated from its own RNG stream keyed on
//! `(seed, point, frame)`, all selected decoders see the same received word,
//! and frames are folded in index order, so the result does not depend on
//! the number of workers.

use std::time::Instant;

use coopdec::channel::{frame_rng, hard_decision, sigma_from_ebn0, transmit_with};
use coopdec::codes::LinearCode;
use coopdec::coop::LambdaSchedule;
use coopdec::ldpc::{CoopDecoderConfig, CooperativeDecoder};
use coopdec::spa::SumProductDecoder;
use rand::Rng;
use rayon::prelude::*;

use crate::config::{DecoderKind, SimConfig};
use crate::stats::{wilson_interval, Z_95};
use crate::Result;

/// Frames decoded in parallel between two early-stop checks.
const CHUNK: u64 = 256;

/// Tallies for one (decoder, Eb/N0) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub decoder: DecoderKind,
    pub ebn0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub info_bit_errors: u64,
    pub iterations: u64,
    pub consensus_frames: u64,
    pub gap_sum: f64,
    pub gap_frames: u64,
    /// Total decode time, when timing was requested.
    pub decode_nanos: Option<u128>,
}

impl Cell {
    fn new(decoder: DecoderKind, ebn0_db: f64, timing: bool) -> Self {
        Cell {
            decoder,
            ebn0_db,
            frames: 0,
            bit_errors: 0,
            frame_errors: 0,
            info_bit_errors: 0,
            iterations: 0,
            consensus_frames: 0,
            gap_sum: 0.0,
            gap_frames: 0,
            decode_nanos: timing.then_some(0),
        }
    }

    fn add(&mut self, o: &FrameOutcome) {
        self.frames += 1;
        self.bit_errors += o.bit_errors;
        self.info_bit_errors += o.info_bit_errors;
        self.frame_errors += u64::from(o.bit_errors > 0);
        self.iterations += o.iterations as u64;
        self.consensus_frames += u64::from(o.consensus);
        if let Some(g) = o.gap {
            self.gap_sum += g;
            self.gap_frames += 1;
        }
        if let Some(t) = self.decode_nanos.as_mut() {
            *t += o.nanos;
        }
    }

    /// Bit error rate over all `n` codeword bits.
    pub fn ber(&self, n: usize) -> f64 {
        ratio(self.bit_errors, self.frames * n as u64)
    }

    pub fn info_ber(&self, k: usize) -> f64 {
        ratio(self.info_bit_errors, self.frames * k as u64)
    }

    pub fn fer(&self) -> f64 {
        ratio(self.frame_errors, self.frames)
    }

    /// 95% Wilson interval on the frame error rate.
    pub fn fer_interval(&self) -> (f64, f64) {
        wilson_interval(self.frame_errors, self.frames, Z_95)
    }

    pub fn mean_iterations(&self) -> f64 {
        ratio(self.iterations, self.frames)
    }

    pub fn mean_ms(&self) -> Option<f64> {
        self.decode_nanos
            .map(|t| if self.frames == 0 { 0.0 } else { t as f64 / 1e6 / self.frames as f64 })
    }

    pub fn consensus_rate(&self) -> f64 {
        ratio(self.consensus_frames, self.frames)
    }

    /// Mean gap certificate over frames that produced one.
    pub fn mean_gap(&self) -> Option<f64> {
        (self.gap_frames > 0).then(|| self.gap_sum / self.gap_frames as f64)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub code: String,
    pub n: usize,
    pub k: usize,
    /// Decoder-major, grid order within a decoder.
    pub cells: Vec<Cell>,
}

impl SweepResult {
    pub fn cell(&self, decoder: DecoderKind, ebn0_db: f64) -> Option<&Cell> {
        self.cells.iter().find(|c| c.decoder == decoder && c.ebn0_db == ebn0_db)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct FrameOutcome {
    bit_errors: u64,
    info_bit_errors: u64,
    iterations: usize,
    consensus: bool,
    gap: Option<f64>,
    nanos: u128,
}

enum Decoder {
    Cooperative(CooperativeDecoder),
    SumProduct(SumProductDecoder),
    Hard,
}

struct Bench<'a> {
    code: &'a LinearCode,
    decoders: Vec<Decoder>,
    seed: u64,
    timing: bool,
}

impl Bench<'_> {
    fn frame(&self, point: usize, frame: u64, sigma: f64) -> Result<Vec<FrameOutcome>> {
        let code = self.code;
        let mut rng = frame_rng(self.seed, point as u64, frame);
        let info: Vec<u8> = (0..code.dimension()).map(|_| rng.random_range(0..2u8)).collect();
        let x = code.encode(&info)?;
        let rx = transmit_with(&x, sigma, &mut rng)?;
        self.decoders
            .iter()
            .map(|d| {
                let start = self.timing.then(Instant::now);
                let mut out = FrameOutcome::default();
                let word = match d {
                    Decoder::Cooperative(dec) => {
                        let r = dec.decode(&rx.llr)?;
                        out.iterations = r.iterations;
                        out.consensus = r.consensus;
                        out.gap = r.gap_certificate;
                        r.codeword
                    }
                    Decoder::SumProduct(dec) => {
                        let r = dec.decode(&rx.llr)?;
                        out.iterations = r.iterations;
                        r.codeword
                    }
                    Decoder::Hard => hard_decision(&rx.llr),
                };
                out.nanos = start.map_or(0, |t| t.elapsed().as_nanos());
                out.bit_errors = word.iter().zip(&x).filter(|(a, b)| a != b).count() as u64;
                out.info_bit_errors = code
                    .info_positions()
                    .iter()
                    .filter(|&&p| word[p] != x[p])
                    .count() as u64;
                Ok(out)
            })
            .collect()
    }
}

/// Runs the configured sweep on a dedicated pool of `config.workers` threads.
pub fn run_sweep(config: &SimConfig) -> Result<SweepResult> {
    config.validate()?;
    let code = config.code.build()?;
    let decoders = config
        .decoders
        .iter()
        .map(|kind| {
            Ok(match kind {
                DecoderKind::Cooperative => Decoder::Cooperative(CooperativeDecoder::new(
                    code.h(),
                    CoopDecoderConfig {
                        lambda: LambdaSchedule::Constant(config.lambda),
                        max_iterations: config.max_iters_coop,
                        ..CoopDecoderConfig::default()
                    },
                )?),
                DecoderKind::SumProduct => Decoder::SumProduct(SumProductDecoder::new(code.h(), config.max_iters_spa)?),
                DecoderKind::Hard => Decoder::Hard,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let bench = Bench {
        code: &code,
        decoders,
        seed: config.seed,
        timing: config.timing,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.workers).build()?;
    let mut by_point = Vec::with_capacity(config.ebn0_grid.len());
    for (point, &ebn0) in config.ebn0_grid.iter().enumerate() {
        let sigma = sigma_from_ebn0(ebn0, code.rate())?;
        let mut cells: Vec<Cell> = config
            .decoders
            .iter()
            .map(|&d| Cell::new(d, ebn0, config.timing))
            .collect();
        let mut next = 0;
        'point: while next < config.frames {
            let end = (next + CHUNK).min(config.frames);
            let outcomes = pool.install(|| {
                (next..end)
                    .into_par_iter()
                    .map(|f| bench.frame(point, f, sigma))
                    .collect::<Result<Vec<_>>>()
            })?;
            for frame in outcomes {
                for (cell, o) in cells.iter_mut().zip(&frame) {
                    cell.add(o);
                }
                next += 1;
                if let Some(target) = config.target_errors {
                    if cells.iter().all(|c| c.frame_errors >= target) {
                        break 'point;
                    }
                }
            }
        }
        by_point.push(cells);
    }
    let cells = (0..config.decoders.len())
        .flat_map(|d| by_point.iter().map(move |cells| cells[d].clone()))
        .collect();
    Ok(SweepResult {
        code: config.code.to_string(),
        n: code.n(),
        k: code.dimension(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CodeSpec;

    fn small(decoders: Vec<DecoderKind>, grid: Vec<f64>) -> SimConfig {
        SimConfig {
            code: CodeSpec::Hamming74,
            decoders,
            ebn0_grid: grid,
            frames: 300,
            target_errors: None,
            ..SimConfig::default()
        }
    }

    #[test]
    fn one_cell_per_point_and_decoder() {
        let r = run_sweep(&small(vec![DecoderKind::SumProduct], vec![1.0, 3.0])).unwrap();
        assert_eq!(r.cells.len(), 2);
        assert_eq!((r.n, r.k), (7, 4));
        for c in &r.cells {
            assert_eq!(c.frames, 300);
            assert!(c.fer() >= c.ber(r.n));
            assert_eq!(c.ber(r.n), c.bit_errors as f64 / (300.0 * 7.0));
        }
    }

    #[test]
    fn noiseless_point_has_no_errors() {
        let cfg = SimConfig {
            code: CodeSpec::Product { side: 4, dims: 2 },
            ..small(vec![DecoderKind::Cooperative, DecoderKind::SumProduct], vec![80.0])
        };
        let r = run_sweep(&cfg).unwrap();
        for c in &r.cells {
            assert_eq!((c.bit_errors, c.frame_errors), (0, 0), "{}", c.decoder);
        }
    }

    #[test]
    fn early_stop_is_exact() {
        let mut cfg = small(vec![DecoderKind::Hard], vec![0.0]);
        cfg.frames = 10_000;
        cfg.target_errors = Some(7);
        let r = run_sweep(&cfg).unwrap();
        let c = &r.cells[0];
        assert_eq!(c.frame_errors, 7);
        assert!(c.frames < 10_000);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut cfg = small(vec![DecoderKind::Cooperative, DecoderKind::Hard], vec![2.0, 4.0]);
        cfg.target_errors = Some(20);
        cfg.workers = 1;
        let a = run_sweep(&cfg).unwrap();
        cfg.workers = 3;
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a, b);
    }
}
