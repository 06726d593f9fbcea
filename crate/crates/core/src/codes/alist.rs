//! MacKay's AList text format.
//!
//! ```text
//! n rows
//! max_col_weight max_row_weight
//! <n column weights>
//! <rows row weights>
//! <n lines: 1-based check indices per column, zero padded>
//! <rows lines: 1-based variable indices per check, zero padded>
//! ```

use std::fmt::Write;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate().peekable(),
            last: 0,
        }
    }

    /// Next non-blank line as (1-based line number, integers).
    fn next_ints(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (idx, line) in self.inner.by_ref() {
            let lineno = idx + 1;
            self.last = lineno;
            if line.trim().is_empty() {
                continue;
            }
            let ints = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("expected a non-negative integer, found {t:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((lineno, ints));
        }
        Err(Error::Parse {
            line: self.last + 1,
            message: format!("unexpected end of input, expected {what}"),
        })
    }
}

fn expect_len(line: usize, ints: &[usize], len: usize, what: &str) -> Result<()> {
    if ints.len() == len {
        Ok(())
    } else {
        Err(Error::Parse {
            line,
            message: format!("expected {len} values for {what}, found {}", ints.len()),
        })
    }
}

/// Reads one adjacency line: `weight` 1-based indices, optionally followed by
/// zero padding up to `max_weight`.
fn adjacency(line: usize, ints: &[usize], weight: usize, max_weight: usize, bound: usize) -> Result<Vec<usize>> {
    let entries: Vec<usize> = ints.iter().copied().filter(|&v| v != 0).collect();
    let padded = ints.len() == max_weight && ints[weight..].iter().all(|&v| v == 0);
    if entries.len() != weight || !(ints.len() == weight || padded) {
        return Err(Error::Parse {
            line,
            message: format!("declared weight {weight} but found entries {ints:?}"),
        });
    }
    entries
        .into_iter()
        .map(|v| {
            if v > bound {
                Err(Error::Parse {
                    line,
                    message: format!("index {v} out of range 1..={bound}"),
                })
            } else {
                Ok(v - 1)
            }
        })
        .collect()
}

/// Parses an AList description. Padded and unpadded adjacency lines are both
/// accepted; the column and row lists must describe the same matrix.
pub fn alist_read(text: &str) -> Result<ParityCheckMatrix> {
    let mut lines = Lines::new(text);
    let (l1, dims) = lines.next_ints("`n rows`")?;
    expect_len(l1, &dims, 2, "the size line")?;
    let (n, m) = (dims[0], dims[1]);
    let (l2, maxes) = lines.next_ints("maximum weights")?;
    expect_len(l2, &maxes, 2, "the maximum-weight line")?;
    let (max_col, max_row) = (maxes[0], maxes[1]);
    let (l3, col_weights) = lines.next_ints("column weights")?;
    expect_len(l3, &col_weights, n, "column weights")?;
    let (l4, row_weights) = lines.next_ints("row weights")?;
    expect_len(l4, &row_weights, m, "row weights")?;
    if let Some(&w) = col_weights.iter().find(|&&w| w > max_col) {
        return Err(Error::Parse { line: l3, message: format!("column weight {w} exceeds maximum {max_col}") });
    }
    if let Some(&w) = row_weights.iter().find(|&&w| w > max_row) {
        return Err(Error::Parse { line: l4, message: format!("row weight {w} exceeds maximum {max_row}") });
    }

    let mut cols = Vec::with_capacity(n);
    for &w in &col_weights {
        let (line, ints) = lines.next_ints("a column adjacency line")?;
        cols.push((line, adjacency(line, &ints, w, max_col, m)?));
    }
    let mut rows = Vec::with_capacity(m);
    let mut row_lines = Vec::with_capacity(m);
    for &w in &row_weights {
        let (line, ints) = lines.next_ints("a row adjacency line")?;
        rows.push(adjacency(line, &ints, w, max_row, n)?);
        row_lines.push(line);
    }

    for (j, row) in rows.iter().enumerate() {
        for &i in row {
            let (cline, col) = &cols[i];
            if !col.contains(&j) {
                return Err(Error::Parse {
                    line: *cline,
                    message: format!("column {} does not list check {} present in the row list", i + 1, j + 1),
                });
            }
        }
    }
    for (i, (line, col)) in cols.iter().enumerate() {
        for &j in col {
            if !rows[j].contains(&i) {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("check {} in column {} is missing from the row list", j + 1, i + 1),
                });
            }
        }
    }
    ParityCheckMatrix::new(n, rows).map_err(|e| Error::Parse {
        line: row_lines.first().copied().unwrap_or(l4),
        message: e.to_string(),
    })
}

/// Serializes `h` in padded AList form.
pub fn alist_write(h: &ParityCheckMatrix) -> String {
    let max_col = h.cols().iter().map(Vec::len).max().unwrap_or(0);
    let max_row = h.rows().iter().map(Vec::len).max().unwrap_or(0);
    let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let padded = |list: &[usize], width: usize| {
        let mut it = list.iter().map(|&x| x + 1).chain(std::iter::repeat(0)).take(width);
        join(&mut it)
    };
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", h.num_vars(), h.num_checks());
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", join(&mut h.cols().iter().map(Vec::len)));
    let _ = writeln!(out, "{}", join(&mut h.rows().iter().map(Vec::len)));
    for col in h.cols() {
        let _ = writeln!(out, "{}", padded(col, max_col));
    }
    for row in h.rows() {
        let _ = writeln!(out, "{}", padded(row, max_row));
    }
    out
}
