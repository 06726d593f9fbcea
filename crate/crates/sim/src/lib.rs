//! Monte-Carlo BER/FER sweeps over Eb/N0 for the `coopdec` decoders.

pub mod config;
pub mod report;
pub mod stats;
pub mod sweep;

pub use config::{CodeSpec, ConfigError, DecoderKind, SimConfig};
pub use report::{emit_csv, emit_plotdata, read_csv, write_csv, write_plotdata, CsvRow, CSV_HEADER};
pub use stats::{wilson_interval, Z_95};
pub use sweep::{run_sweep, Cell, SweepResult};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("decoder failure: {0}")]
    Decode(#[from] coopdec::Error),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed results file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, SimError>;
