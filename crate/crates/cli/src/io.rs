//! File formats for signals, symbols, and matrices.
//!
//! Two formats, chosen by extension:
//!
//! * `.csv` — text, one sample per row, values printed with 17 significant
//!   digits so `f64` round-trips exactly through the decimal form.
//!   Headers: `index,re,im` (signal), `x,xi,re,im` (symbol),
//!   `row,col,re,im` (matrix).
//! * `.bin` — raw little-endian `f64` pairs (re, im) in storage order, with
//!   a sidecar JSON header (same path, `.json` extension) recording type and
//!   dimensions.  Binary round-trips are bit-exact.
//!
//! Malformed input is reported as a parse error naming the file, the 1-based
//! line, and the offending field.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use tfpsi_core::phase::{Signal, Symbol};
use tfpsi_core::util::C64;
use tfpsi_core::{Error, Result};

/// Sidecar header for `.bin` payloads.
#[derive(Debug, Serialize, Deserialize)]
struct BinHeader {
    /// Object kind: `signal`, `symbol`, or `matrix`.
    #[serde(rename = "type")]
    kind: String,
    /// Row count (signal length, symbol modulus, matrix rows).
    rows: usize,
    /// Column count (1 for signals, modulus for symbols).
    cols: usize,
    /// Sample encoding; always interleaved re/im doubles, little endian.
    format: String,
}

const BIN_FORMAT: &str = "complex-f64-le";

enum Format {
    Csv,
    Bin,
}

fn format_of(path: &str) -> Result<Format> {
    match Path::new(path).extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(Format::Csv),
        Some("bin") => Ok(Format::Bin),
        other => Err(Error::InvalidParameter(format!(
            "unsupported file extension {:?} for {path}; use .csv or .bin",
            other.unwrap_or("")
        ))),
    }
}

fn header_path(path: &str) -> String {
    Path::new(path)
        .with_extension("json")
        .to_string_lossy()
        .into_owned()
}

/// 17 significant digits: enough for exact decimal round-trip of any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_field(path: &str, line: usize, field: &str, text: &str) -> Result<f64> {
    text.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.into(),
        line,
        msg: format!("field `{field}`: cannot parse {text:?} as a number"),
    })
}

fn parse_index(path: &str, line: usize, field: &str, text: &str) -> Result<usize> {
    text.trim().parse::<usize>().map_err(|_| Error::Parse {
        path: path.into(),
        line,
        msg: format!("field `{field}`: cannot parse {text:?} as an index"),
    })
}

/// Write rows of already-formatted CSV under a header line.
pub fn write_csv(path: &str, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
    let mut text = String::new();
    let _ = writeln!(text, "{header}");
    for row in rows {
        let _ = writeln!(text, "{row}");
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn read_csv_rows<'a>(
    path: &str,
    text: &'a str,
    expected_cols: usize,
) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        // Header row: first line whose first field is not a number.
        if i == 0 && trimmed.split(',').next().unwrap_or("").trim().parse::<f64>().is_err() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != expected_cols {
            return Err(Error::Parse {
                path: path.into(),
                line,
                msg: format!("expected {expected_cols} comma-separated fields, found {}", fields.len()),
            });
        }
        out.push((line, fields));
    }
    Ok(out)
}

fn write_bin(path: &str, kind: &str, rows: usize, cols: usize, data: &[C64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(data.len() * 16);
    for z in data {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    std::fs::write(path, bytes)?;
    let header = BinHeader {
        kind: kind.into(),
        rows,
        cols,
        format: BIN_FORMAT.into(),
    };
    std::fs::write(header_path(path), serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

fn read_bin(path: &str, expect_kind: &str) -> Result<(usize, usize, Vec<C64>)> {
    let hpath = header_path(path);
    let htext = std::fs::read_to_string(&hpath).map_err(|e| Error::Parse {
        path: hpath.clone(),
        line: 0,
        msg: format!("cannot read binary header: {e}"),
    })?;
    let header: BinHeader = serde_json::from_str(&htext).map_err(|e| Error::Parse {
        path: hpath.clone(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    if header.kind != expect_kind {
        return Err(Error::Parse {
            path: hpath.clone(),
            line: 1,
            msg: format!("field `type`: expected {expect_kind:?}, found {:?}", header.kind),
        });
    }
    if header.format != BIN_FORMAT {
        return Err(Error::Parse {
            path: hpath,
            line: 1,
            msg: format!("field `format`: expected {BIN_FORMAT:?}, found {:?}", header.format),
        });
    }
    let bytes = std::fs::read(path)?;
    let count = header.rows * header.cols;
    if bytes.len() != count * 16 {
        return Err(Error::Parse {
            path: path.into(),
            line: 0,
            msg: format!(
                "payload is {} bytes but header declares {} complex samples ({} bytes)",
                bytes.len(),
                count,
                count * 16
            ),
        });
    }
    let mut data = Vec::with_capacity(count);
    for chunk in bytes.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().expect("8-byte chunk"));
        let im = f64::from_le_bytes(chunk[8..16].try_into().expect("8-byte chunk"));
        data.push(C64::new(re, im));
    }
    Ok((header.rows, header.cols, data))
}

/// Assemble a dense table from `(line, index, value)` rows, requiring every
/// slot to be filled exactly once.
fn fill_dense(
    path: &str,
    slots: usize,
    entries: Vec<(usize, usize, C64)>,
) -> Result<Vec<C64>> {
    let mut data = vec![None; slots];
    for (line, idx, value) in entries {
        if idx >= slots {
            return Err(Error::Parse {
                path: path.into(),
                line,
                msg: format!("index {idx} out of range (have {slots} slots)"),
            });
        }
        if data[idx].is_some() {
            return Err(Error::Parse {
                path: path.into(),
                line,
                msg: format!("duplicate entry for index {idx}"),
            });
        }
        data[idx] = Some(value);
    }
    let missing = data.iter().filter(|v| v.is_none()).count();
    if missing > 0 {
        return Err(Error::Parse {
            path: path.into(),
            line: 0,
            msg: format!("{missing} of {slots} entries missing"),
        });
    }
    Ok(data.into_iter().map(|v| v.expect("checked above")).collect())
}

pub fn save_signal(f: &Signal, path: &str) -> Result<()> {
    match format_of(path)? {
        Format::Csv => write_csv(
            path,
            "index,re,im",
            f.values()
                .iter()
                .enumerate()
                .map(|(i, z)| format!("{i},{},{}", fmt_f64(z.re), fmt_f64(z.im))),
        ),
        Format::Bin => write_bin(path, "signal", f.n(), 1, f.values()),
    }
}

pub fn load_signal(path: &str) -> Result<Signal> {
    let values = match format_of(path)? {
        Format::Csv => {
            let text = std::fs::read_to_string(path)?;
            let rows = read_csv_rows(path, &text, 3)?;
            let n = rows.len();
            let mut entries = Vec::with_capacity(n);
            for (line, fields) in rows {
                let idx = parse_index(path, line, "index", fields[0])?;
                let re = parse_field(path, line, "re", fields[1])?;
                let im = parse_field(path, line, "im", fields[2])?;
                entries.push((line, idx, C64::new(re, im)));
            }
            fill_dense(path, n, entries)?
        }
        Format::Bin => {
            let (rows, cols, data) = read_bin(path, "signal")?;
            if cols != 1 {
                return Err(Error::Parse {
                    path: path.into(),
                    line: 0,
                    msg: format!("signal payload must have cols = 1, found {cols}"),
                });
            }
            let _ = rows;
            data
        }
    };
    Signal::new(values)
}

pub fn save_symbol(sigma: &Symbol, path: &str) -> Result<()> {
    let n = sigma.n();
    match format_of(path)? {
        Format::Csv => write_csv(
            path,
            "x,xi,re,im",
            (0..n).flat_map(|x| {
                (0..n).map(move |xi| {
                    let z = sigma.at(x, xi);
                    format!("{x},{xi},{},{}", fmt_f64(z.re), fmt_f64(z.im))
                })
            }),
        ),
        Format::Bin => {
            let data: Vec<C64> = (0..n)
                .flat_map(|x| (0..n).map(move |xi| sigma.at(x, xi)))
                .collect();
            write_bin(path, "symbol", n, n, &data)
        }
    }
}

pub fn load_symbol(path: &str) -> Result<Symbol> {
    let (n, data) = match format_of(path)? {
        Format::Csv => {
            let text = std::fs::read_to_string(path)?;
            let rows = read_csv_rows(path, &text, 4)?;
            let count = rows.len();
            let n = (count as f64).sqrt().round() as usize;
            if n * n != count {
                return Err(Error::Parse {
                    path: path.into(),
                    line: 0,
                    msg: format!("symbol needs a full N x N grid, found {count} rows"),
                });
            }
            let mut entries = Vec::with_capacity(count);
            for (line, fields) in rows {
                let x = parse_index(path, line, "x", fields[0])?;
                let xi = parse_index(path, line, "xi", fields[1])?;
                let re = parse_field(path, line, "re", fields[2])?;
                let im = parse_field(path, line, "im", fields[3])?;
                if x >= n || xi >= n {
                    return Err(Error::Parse {
                        path: path.into(),
                        line,
                        msg: format!("point ({x},{xi}) outside the {n} x {n} grid"),
                    });
                }
                entries.push((line, x * n + xi, C64::new(re, im)));
            }
            (n, fill_dense(path, count, entries)?)
        }
        Format::Bin => {
            let (rows, cols, data) = read_bin(path, "symbol")?;
            if rows != cols {
                return Err(Error::Parse {
                    path: path.into(),
                    line: 0,
                    msg: format!("symbol payload must be square, found {rows} x {cols}"),
                });
            }
            (rows, data)
        }
    };
    Symbol::from_fn(n, |x, xi| data[x * n + xi])
}

pub fn save_matrix(m: &DMatrix<C64>, path: &str) -> Result<()> {
    match format_of(path)? {
        Format::Csv => write_csv(
            path,
            "row,col,re,im",
            (0..m.nrows()).flat_map(|r| {
                (0..m.ncols()).map(move |c| {
                    let z = m[(r, c)];
                    format!("{r},{c},{},{}", fmt_f64(z.re), fmt_f64(z.im))
                })
            }),
        ),
        Format::Bin => {
            let data: Vec<C64> = (0..m.nrows())
                .flat_map(|r| (0..m.ncols()).map(move |c| m[(r, c)]))
                .collect();
            write_bin(path, "matrix", m.nrows(), m.ncols(), &data)
        }
    }
}

pub fn load_matrix(path: &str) -> Result<DMatrix<C64>> {
    let (rows, cols, data) = match format_of(path)? {
        Format::Csv => {
            let text = std::fs::read_to_string(path)?;
            let csv_rows = read_csv_rows(path, &text, 4)?;
            let mut max_r = 0usize;
            let mut max_c = 0usize;
            let mut parsed = Vec::with_capacity(csv_rows.len());
            for (line, fields) in csv_rows {
                let r = parse_index(path, line, "row", fields[0])?;
                let c = parse_index(path, line, "col", fields[1])?;
                let re = parse_field(path, line, "re", fields[2])?;
                let im = parse_field(path, line, "im", fields[3])?;
                max_r = max_r.max(r);
                max_c = max_c.max(c);
                parsed.push((line, r, c, C64::new(re, im)));
            }
            if parsed.is_empty() {
                return Err(Error::Parse {
                    path: path.into(),
                    line: 0,
                    msg: "matrix file has no data rows".into(),
                });
            }
            let (rows, cols) = (max_r + 1, max_c + 1);
            let entries = parsed
                .into_iter()
                .map(|(line, r, c, z)| (line, r * cols + c, z))
                .collect();
            (rows, cols, fill_dense(path, rows * cols, entries)?)
        }
        Format::Bin => read_bin(path, "matrix")?,
    };
    Ok(DMatrix::from_fn(rows, cols, |r, c| data[r * cols + c]))
}
