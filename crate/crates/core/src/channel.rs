//! BPSK over an additive white Gaussian noise channel.
//!
//! Bit `x` is sent as the symbol `2x - 1`, so a positive log-likelihood
//! ratio favours bit 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Noise standard deviation for unit-energy BPSK at the given Eb/N0, with
/// the information-bit energy spread over `1 / rate` channel symbols.
pub fn sigma_from_ebn0(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::Parameter(format!("code rate must be positive, got {rate}")));
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub ebn0_db: f64,
    pub rate: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl ChannelParams {
    pub fn new(ebn0_db: f64, rate: f64, seed: u64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::Parameter(format!("code rate must lie in (0, 1], got {rate}")));
        }
        Ok(ChannelParams {
            ebn0_db,
            rate,
            sigma: sigma_from_ebn0(ebn0_db, rate)?,
            seed,
        })
    }

    /// Fixed noise level, bypassing the Eb/N0 conversion.
    pub fn with_sigma(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::Parameter(format!("sigma must be positive, got {sigma}")));
        }
        Ok(ChannelParams {
            ebn0_db: f64::NAN,
            rate: 1.0,
            sigma,
            seed,
        })
    }

    /// Independent noise stream for one frame.
    pub fn frame_rng(&self, frame_index: u64) -> ChaCha8Rng {
        frame_rng(self.seed, 0, frame_index)
    }
}

/// Deterministic RNG for `(seed, point, frame)`: the seed and grid point pick
/// the ChaCha key, the frame picks one of its 2^64 streams.
pub fn frame_rng(seed: u64, point: u64, frame: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&point.to_le_bytes());
    key[16..24].copy_from_slice(b"coopdec!");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(frame);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedFrame {
    pub y: Vec<f64>,
    pub llr: Vec<f64>,
    pub truth: Option<Vec<u8>>,
}

/// Sends `x` through the channel using `rng` for the noise samples.
pub fn transmit_with<R: Rng>(x: &[u8], sigma: f64, rng: &mut R) -> Result<ReceivedFrame> {
    let y: Vec<f64> = x
        .iter()
        .map(|&b| {
            let noise: f64 = rng.sample(StandardNormal);
            (2.0 * f64::from(b & 1) - 1.0) + sigma * noise
        })
        .collect();
    let llr = llr(&y, sigma)?;
    Ok(ReceivedFrame {
        y,
        llr,
        truth: Some(x.to_vec()),
    })
}

/// Sends `x` through the channel with the noise stream of `frame_index`.
pub fn transmit(x: &[u8], params: &ChannelParams, frame_index: u64) -> Result<ReceivedFrame> {
    transmit_with(x, params.sigma, &mut params.frame_rng(frame_index))
}

/// `log p(y | x=1) / p(y | x=0)` for each sample, i.e. `2y / sigma^2`.
pub fn llr(y: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) {
        return Err(Error::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    let scale = 2.0 / (sigma * sigma);
    Ok(y.iter().map(|&v| scale * v).collect())
}

/// Sign-based decision: 1 where the LLR is positive.
pub fn hard_decision(llr: &[f64]) -> Vec<u8> {
    llr.iter().map(|&a| u8::from(a > 0.0)).collect()
}

/// Probability that a single hard-decided BPSK symbol is wrong at noise `sigma`.
pub fn bpsk_bit_error_probability(sigma: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(1.0 / (sigma * std::f64::consts::SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_gauss(y: f64, mean: f64, sigma: f64) -> f64 {
        let d = y - mean;
        -d * d / (2.0 * sigma * sigma) - (sigma * (2.0 * std::f64::consts::PI).sqrt()).ln()
    }

    #[test]
    fn sigma_conversion() {
        assert!((sigma_from_ebn0(0.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
        let s = sigma_from_ebn0(10.0, 0.5).unwrap();
        assert!((s * s - 0.1).abs() < 1e-15);
        let s = sigma_from_ebn0(1.7, 0.61).unwrap();
        let expected = 1.0 / (2.0 * 0.61 * 10f64.powf(0.17));
        assert!((s * s - expected).abs() < 1e-15);
        assert!((s * s - 0.554_166_373_272_116_2).abs() < 1e-12);
        assert!(sigma_from_ebn0(1.0, 0.0).is_err());
        assert!(sigma_from_ebn0(1.0, -0.5).is_err());
    }

    #[test]
    fn llr_matches_log_density_ratio() {
        assert_eq!(llr(&[0.0], 1.0).unwrap(), vec![0.0]);
        let a = llr(&[1.0], 1.0).unwrap()[0];
        assert!((a - (log_gauss(1.0, 1.0, 1.0) - log_gauss(1.0, -1.0, 1.0))).abs() < 1e-12);
        assert!((a - 2.0).abs() < 1e-12);
        let s = 0.5f64.sqrt();
        let b = llr(&[-0.5], s).unwrap()[0];
        assert!((b + 2.0).abs() < 1e-12);
        assert!(llr(&[1.0], 0.0).is_err());
    }

    #[test]
    fn llr_against_density_oracle_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let sigma: f64 = rng.random_range(0.2..3.0);
            let y: f64 = rng.random_range(-5.0..5.0);
            let a = llr(&[y], sigma).unwrap()[0];
            let oracle = log_gauss(y, 1.0, sigma) - log_gauss(y, -1.0, sigma);
            assert!((a - oracle).abs() < 1e-9, "{a} vs {oracle}");
            assert_eq!(a > 0.0, y > 0.0);
        }
    }

    #[test]
    fn noiseless_limit() {
        let params = ChannelParams::with_sigma(1e-9, 5).unwrap();
        let f = transmit(&[0, 0, 0, 1], &params, 0).unwrap();
        for (y, e) in f.y.iter().zip([-1.0, -1.0, -1.0, 1.0]) {
            assert!((y - e).abs() < 1e-6);
        }
        assert_eq!(f.truth.as_deref(), Some(&[0u8, 0, 0, 1][..]));
        assert_eq!(hard_decision(&f.llr), vec![0, 0, 0, 1]);
    }

    #[test]
    fn deterministic_per_frame() {
        let params = ChannelParams::new(2.0, 0.5, 99).unwrap();
        let x = vec![1u8; 32];
        assert_eq!(transmit(&x, &params, 7).unwrap(), transmit(&x, &params, 7).unwrap());
        assert_ne!(transmit(&x, &params, 7).unwrap().y, transmit(&x, &params, 8).unwrap().y);
        assert_ne!(frame_rng(1, 0, 0).random::<u64>(), frame_rng(1, 1, 0).random::<u64>());
    }

    #[test]
    fn noise_moments() {
        let params = ChannelParams::with_sigma(1.0, 1).unwrap();
        let x = vec![0u8; 1_000_000];
        let f = transmit(&x, &params, 0).unwrap();
        let noise: Vec<f64> = f.y.iter().map(|y| y + 1.0).collect();
        let mean = noise.iter().sum::<f64>() / noise.len() as f64;
        let var = noise.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / noise.len() as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn error_probability_reference_values() {
        // Q(1) and Q(2); statrs erfc is good to roughly 1e-11
        assert!((bpsk_bit_error_probability(1.0) - 0.158_655_253_931_457_07).abs() < 1e-10);
        assert!((bpsk_bit_error_probability(0.5) - 0.022_750_131_948_179_2).abs() < 1e-10);
    }
}
