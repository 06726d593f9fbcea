use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use coopdec::codes::{alist_read, alist_write, LinearCode};
use coopdec_sim::{emit_csv, emit_plotdata, run_sweep, write_csv, CodeSpec, SimConfig, SweepResult};

#[derive(Parser)]
#[command(name = "coopdec", version, about = "LDPC decoding sweeps and code utilities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo BER/FER sweep over an Eb/N0 grid
    Sweep(SweepArgs),
    /// Rank and dimension of an AList parity-check matrix
    Rank {
        /// AList file
        alist: PathBuf,
    },
    /// Construct a code and write its parity-check matrix as AList
    Gen {
        /// product:S:D, gallager:N:WC:WR[:SEED] or hamming74
        #[arg(long)]
        code: String,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Flags mirror the config-file keys and override them.
#[derive(Args)]
struct SweepArgs {
    /// key = value file with the same keys as the long flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// product:S:D, gallager:N:WC:WR[:SEED], hamming74 or alist:PATH
    #[arg(long)]
    code: Option<String>,
    /// Parity-check matrix in AList format (replaces --code)
    #[arg(long)]
    alist: Option<String>,
    /// Comma-separated: cooperative, sum_product, hard
    #[arg(long)]
    decoders: Option<String>,
    /// Eb/N0 grid in dB: `1,2,3` or `START:STEP:STOP`
    #[arg(long)]
    ebn0: Option<String>,
    /// Frames per point (cap when --target-errors is set)
    #[arg(long)]
    frames: Option<String>,
    /// Frame errors per decoder before a point stops early; `none` disables
    #[arg(long)]
    target_errors: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    workers: Option<String>,
    /// Cooperation strength of the cooperative decoder
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    max_iters_coop: Option<String>,
    #[arg(long)]
    max_iters_spa: Option<String>,
    /// CSV output; plot data goes next to it with a `.plotdata` extension
    #[arg(long)]
    out: Option<String>,
    /// Record decode wall time in the mean_ms column
    #[arg(long)]
    timing: bool,
}

impl SweepArgs {
    fn into_config(self) -> anyhow::Result<SimConfig> {
        let mut config = SimConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            config
                .apply_text(&text)
                .with_context(|| format!("in {}", path.display()))?;
        }
        let flags = [
            ("code", self.code),
            ("alist", self.alist),
            ("decoders", self.decoders),
            ("ebn0", self.ebn0),
            ("frames", self.frames),
            ("target-errors", self.target_errors),
            ("seed", self.seed),
            ("workers", self.workers),
            ("lambda", self.lambda),
            ("max-iters-coop", self.max_iters_coop),
            ("max-iters-spa", self.max_iters_spa),
            ("out", self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, &v)?;
            }
        }
        config.timing |= self.timing;
        config.validate()?;
        Ok(config)
    }
}

fn print_summary(result: &SweepResult) {
    eprintln!("code {} (n = {}, k = {})", result.code, result.n, result.k);
    eprintln!(
        "{:<12} {:>7} {:>8} {:>12} {:>12} {:>10} {:>10}",
        "decoder", "Eb/N0", "frames", "BER", "FER", "iters", "consensus"
    );
    for c in &result.cells {
        eprintln!(
            "{:<12} {:>7.2} {:>8} {:>12.4e} {:>12.4e} {:>10.2} {:>10.3}",
            c.decoder.name(),
            c.ebn0_db,
            c.frames,
            c.ber(result.n),
            c.fer(),
            c.mean_iterations(),
            c.consensus_rate()
        );
    }
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Sweep(args) => {
            let config = args.into_config()?;
            let result = run_sweep(&config)?;
            print_summary(&result);
            match &config.out {
                Some(path) => {
                    emit_csv(&result, path).with_context(|| format!("writing {}", path.display()))?;
                    let plot = path.with_extension("plotdata");
                    emit_plotdata(&result, &plot).with_context(|| format!("writing {}", plot.display()))?;
                }
                None => write_csv(&result, io::stdout().lock())?,
            }
        }
        Command::Rank { alist } => {
            let text = std::fs::read_to_string(&alist).with_context(|| format!("reading {}", alist.display()))?;
            let h = alist_read(&text)?;
            let rank = h.rank_gf2();
            println!("n = {}", h.num_vars());
            println!("checks = {}", h.num_checks());
            println!("rank = {rank}");
            println!("dimension = {}", h.num_vars() - rank);
            println!("rate = {}", (h.num_vars() - rank) as f64 / h.num_vars() as f64);
        }
        Command::Gen { code, out } => {
            let spec: CodeSpec = code.parse().map_err(anyhow::Error::msg)?;
            if matches!(spec, CodeSpec::Alist(_)) {
                bail!("gen constructs codes; use `rank` to inspect an AList file");
            }
            let code: LinearCode = spec.build()?;
            let text = alist_write(code.h());
            match out {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => io::stdout().lock().write_all(text.as_bytes())?,
            }
        }
    }
    Ok(())
}
