//! Sweep configuration: code and decoder selection, grid, budgets.
//!
//! A configuration can be read from a `key = value` text file whose keys are
//! the long CLI flag names (`code`, `ebn0`, `target-errors`, ...); `#` starts
//! a comment.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use coopdec::codes::{alist_read, build_gallager_regular, build_product_code, LinearCode};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Code(#[from] coopdec::Error),
}

/// Which code to simulate.
#[derive(Debug, Clone, PartialEq)]
pub enum CodeSpec {
    /// `product:SIDE:DIMS`
    Product { side: usize, dims: usize },
    /// `gallager:N:COL_WEIGHT:ROW_WEIGHT[:SEED]`
    Gallager {
        n: usize,
        col_weight: usize,
        row_weight: usize,
        seed: u64,
    },
    /// `hamming74`
    Hamming74,
    /// `alist:PATH`, or a path given through `--alist`
    Alist(PathBuf),
}

impl CodeSpec {
    pub fn build(&self) -> Result<LinearCode, ConfigError> {
        Ok(match self {
            CodeSpec::Product { side, dims } => build_product_code(*side, *dims)?,
            CodeSpec::Gallager {
                n,
                col_weight,
                row_weight,
                seed,
            } => build_gallager_regular(*n, *col_weight, *row_weight, *seed)?.code,
            CodeSpec::Hamming74 => LinearCode::hamming_7_4(),
            CodeSpec::Alist(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                LinearCode::from_parity_check(alist_read(&text)?)
            }
        })
    }
}

impl FromStr for CodeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| p.parse::<usize>().map_err(|e| format!("`{p}`: {e}"));
        match parts.as_slice() {
            ["product", side, dims] => Ok(CodeSpec::Product {
                side: num(side)?,
                dims: num(dims)?,
            }),
            ["gallager", n, wc, wr, rest @ ..] if rest.len() <= 1 => Ok(CodeSpec::Gallager {
                n: num(n)?,
                col_weight: num(wc)?,
                row_weight: num(wr)?,
                seed: match rest.first() {
                    Some(seed) => seed.parse().map_err(|e| format!("`{seed}`: {e}"))?,
                    None => 1,
                },
            }),
            ["hamming74"] => Ok(CodeSpec::Hamming74),
            ["alist", ..] if s.trim().len() > "alist:".len() => {
                Ok(CodeSpec::Alist(PathBuf::from(&s.trim()["alist:".len()..])))
            }
            _ => Err(format!(
                "unrecognized code `{s}` (expected product:S:D, gallager:N:WC:WR[:SEED], hamming74 or alist:PATH)"
            )),
        }
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSpec::Product { side, dims } => write!(f, "product:{side}:{dims}"),
            CodeSpec::Gallager {
                n,
                col_weight,
                row_weight,
                seed,
            } => write!(f, "gallager:{n}:{col_weight}:{row_weight}:{seed}"),
            CodeSpec::Hamming74 => write!(f, "hamming74"),
            CodeSpec::Alist(p) => write!(f, "alist:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    Cooperative,
    SumProduct,
    /// Sign decisions on the channel LLRs, no decoding.
    Hard,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Cooperative => "cooperative",
            DecoderKind::SumProduct => "sum_product",
            DecoderKind::Hard => "hard",
        }
    }
}

impl FromStr for DecoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "cooperative" | "coop" => Ok(DecoderKind::Cooperative),
            "sum_product" | "spa" | "bp" => Ok(DecoderKind::SumProduct),
            "hard" | "uncoded" => Ok(DecoderKind::Hard),
            other => Err(format!("unknown decoder `{other}`")),
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub code: CodeSpec,
    pub decoders: Vec<DecoderKind>,
    pub ebn0_grid: Vec<f64>,
    /// Frames per grid point (an upper bound when `target_errors` is set).
    pub frames: u64,
    /// Stop a point once every decoder has this many frame errors.
    pub target_errors: Option<u64>,
    pub seed: u64,
    /// Worker threads; 0 picks the number of cores.
    pub workers: usize,
    pub lambda: f64,
    pub max_iters_coop: usize,
    pub max_iters_spa: usize,
    pub out: Option<PathBuf>,
    /// Record decode wall time (makes `mean_ms` non-reproducible).
    pub timing: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            code: CodeSpec::Product { side: 8, dims: 2 },
            decoders: vec![DecoderKind::Cooperative, DecoderKind::SumProduct],
            ebn0_grid: vec![1.0, 2.0, 3.0, 4.0],
            frames: 10_000,
            target_errors: Some(50),
            seed: 1,
            workers: 0,
            lambda: 0.9,
            max_iters_coop: 120,
            max_iters_spa: 30,
            out: None,
            timing: false,
        }
    }
}

/// Parses `2,3,4` or an inclusive range `START:STEP:STOP`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
    if let [start, step, stop] = s.split(':').collect::<Vec<_>>().as_slice() {
        let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
        if !(step > 0.0) || stop < start {
            return Err(format!("bad range `{s}`"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    s.split(',').map(num).collect()
}

fn parse_list<T: FromStr<Err = String>>(s: &str) -> Result<Vec<T>, String> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

impl SimConfig {
    /// Sets one option by its key-file / long-flag name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |message: String| ConfigError::Value {
            key: key.to_string(),
            message,
        };
        let value = value.trim();
        match key {
            "code" => self.code = value.parse().map_err(bad)?,
            "alist" => self.code = CodeSpec::Alist(PathBuf::from(value)),
            "decoders" => self.decoders = parse_list(value).map_err(bad)?,
            "ebn0" => self.ebn0_grid = parse_grid(value).map_err(bad)?,
            "frames" => self.frames = value.parse().map_err(|e| bad(format!("{e}")))?,
            "target-errors" => {
                self.target_errors = match value {
                    "none" | "0" => None,
                    v => Some(v.parse().map_err(|e| bad(format!("{e}")))?),
                }
            }
            "seed" => self.seed = value.parse().map_err(|e| bad(format!("{e}")))?,
            "workers" => self.workers = value.parse().map_err(|e| bad(format!("{e}")))?,
            "lambda" => self.lambda = value.parse().map_err(|e| bad(format!("{e}")))?,
            "max-iters-coop" => self.max_iters_coop = value.parse().map_err(|e| bad(format!("{e}")))?,
            "max-iters-spa" => self.max_iters_spa = value.parse().map_err(|e| bad(format!("{e}")))?,
            "out" => self.out = Some(PathBuf::from(value)),
            "timing" => self.timing = value.parse().map_err(|e| bad(format!("{e}")))?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config file on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            self.set(key.trim(), value).map_err(|e| ConfigError::Syntax {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.ebn0_grid.is_empty() {
            return fail("the Eb/N0 grid is empty");
        }
        if self.ebn0_grid.iter().any(|v| !v.is_finite()) {
            return fail("Eb/N0 values must be finite");
        }
        if self.decoders.is_empty() {
            return fail("no decoders selected");
        }
        if self.frames == 0 {
            return fail("frames must be at least 1");
        }
        if self.target_errors == Some(0) {
            return fail("target-errors must be at least 1");
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return fail("lambda must lie in [0, 1)");
        }
        if self.max_iters_coop == 0 || self.max_iters_spa == 0 {
            return fail("iteration caps must be at least 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_specs_round_trip() {
        for s in ["product:8:2", "gallager:96:3:6:4", "hamming74", "alist:/tmp/x.alist"] {
            assert_eq!(s.parse::<CodeSpec>().unwrap().to_string(), s);
        }
        assert_eq!(
            "gallager:96:3:6".parse::<CodeSpec>().unwrap(),
            CodeSpec::Gallager {
                n: 96,
                col_weight: 3,
                row_weight: 6,
                seed: 1
            }
        );
        assert!("product:8".parse::<CodeSpec>().is_err());
        assert!("turbo".parse::<CodeSpec>().is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("2,3,4").unwrap(), vec![2.0, 3.0, 4.0]);
        assert_eq!(parse_grid("1:0.5:3").unwrap(), vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        assert!(parse_grid("1:0:3").is_err());
        assert!(parse_grid("a").is_err());
    }

    #[test]
    fn key_file_overrides_defaults() {
        let mut c = SimConfig::default();
        c.apply_text("# sweep\ncode = gallager:96:3:6\n\ndecoders = spa, hard\nebn0 = 1,2 # dB\ntarget-errors = none\n")
            .unwrap();
        assert_eq!(c.decoders, vec![DecoderKind::SumProduct, DecoderKind::Hard]);
        assert_eq!(c.ebn0_grid, vec![1.0, 2.0]);
        assert_eq!(c.target_errors, None);
        c.validate().unwrap();
    }

    #[test]
    fn key_file_errors_carry_line_numbers() {
        let mut c = SimConfig::default();
        let err = c.apply_text("seed = 3\nframes 10\n").unwrap_err();
        assert!(err.to_string().starts_with("line 2"), "{err}");
        let err = c.apply_text("colour = blue\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
    }

    #[test]
    fn validation() {
        let mut c = SimConfig::default();
        c.lambda = 1.0;
        assert!(c.validate().is_err());
        let c = SimConfig {
            ebn0_grid: vec![],
            ..SimConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
