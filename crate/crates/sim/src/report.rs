//! CSV and plot-data output.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back recovers every value exactly. `mean_ms` is left empty unless timing
//! was recorded, and `mean_gap` is empty when no frame carried a certificate.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::sweep::SweepResult;
use crate::{Result, SimError};

pub const CSV_HEADER: [&str; 15] = [
    "decoder",
    "ebn0_db",
    "frames",
    "bit_errors",
    "frame_errors",
    "ber",
    "fer",
    "ci_low",
    "ci_high",
    "mean_iters",
    "mean_ms",
    "consensus_rate",
    "mean_gap",
    "info_ber",
    "info_bit_errors",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for c in &result.cells {
        let (lo, hi) = c.fer_interval();
        w.write_record([
            c.decoder.name().to_string(),
            c.ebn0_db.to_string(),
            c.frames.to_string(),
            c.bit_errors.to_string(),
            c.frame_errors.to_string(),
            c.ber(result.n).to_string(),
            c.fer().to_string(),
            lo.to_string(),
            hi.to_string(),
            c.mean_iterations().to_string(),
            opt(c.mean_ms()),
            c.consensus_rate().to_string(),
            opt(c.mean_gap()),
            c.info_ber(result.k).to_string(),
            c.info_bit_errors.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One block per decoder of `ebn0_db ber fer` rows; blocks are separated by
/// two blank lines so gnuplot can address them with `index`.
pub fn write_plotdata<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    writeln!(out, "# code {} (n = {}, k = {})", result.code, result.n, result.k)?;
    let mut decoders: Vec<_> = result.cells.iter().map(|c| c.decoder).collect();
    decoders.dedup();
    for (i, d) in decoders.iter().enumerate() {
        if i > 0 {
            writeln!(out, "\n")?;
        }
        writeln!(out, "# decoder {d}")?;
        writeln!(out, "# ebn0_db ber fer")?;
        for c in result.cells.iter().filter(|c| c.decoder == *d) {
            writeln!(out, "{} {} {}", c.ebn0_db, c.ber(result.n), c.fer())?;
        }
    }
    Ok(())
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    write_csv(result, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn emit_plotdata(result: &SweepResult, path: &Path) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    write_plotdata(result, &mut f)?;
    f.flush()?;
    Ok(())
}

/// One parsed results row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub decoder: String,
    pub ebn0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_iters: f64,
    pub mean_ms: Option<f64>,
    pub consensus_rate: f64,
    pub mean_gap: Option<f64>,
    pub info_ber: f64,
    pub info_bit_errors: u64,
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(SimError::Format(format!("unexpected header {header:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let bad = |i: usize| SimError::Format(format!("column {}: `{}`", CSV_HEADER[i], field(i)));
            let f = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
            let u = |i: usize| field(i).parse::<u64>().map_err(|_| bad(i));
            let o = |i: usize| match field(i) {
                "" => Ok(None),
                s => s.parse::<f64>().map(Some).map_err(|_| bad(i)),
            };
            Ok(CsvRow {
                decoder: field(0).to_string(),
                ebn0_db: f(1)?,
                frames: u(2)?,
                bit_errors: u(3)?,
                frame_errors: u(4)?,
                ber: f(5)?,
                fer: f(6)?,
                ci_low: f(7)?,
                ci_high: f(8)?,
                mean_iters: f(9)?,
                mean_ms: o(10)?,
                consensus_rate: f(11)?,
                mean_gap: o(12)?,
                info_ber: f(13)?,
                info_bit_errors: u(14)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sweep_is_header_only() {
        let r = SweepResult {
            code: "hamming74".into(),
            n: 7,
            k: 4,
            cells: vec![],
        };
        let mut buf = Vec::new();
        write_csv(&r, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
        assert!(read_csv(&b"decoder,ebn0_db\n"[..]).is_err());
    }
}
