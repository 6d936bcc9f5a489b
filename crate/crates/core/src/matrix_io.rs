// SPDX-License-Identifier: MIT OR Apache-2.0

//! Loading, validating and writing observation matrices and reports.
//!
//! Two input formats are supported:
//!
//! * CSV: one observation per line, comma separated, with an optional
//!   header line that is skipped when any of its cells is non-numeric.
//! * Raw: the ASCII magic `CPKN`, then `n` and `d` as little-endian `u64`,
//!   then `n * d` little-endian `f64` values in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::report::ScanReport;

/// Minimum sequence length for the scan statistic to be well defined.
pub const MIN_OBSERVATIONS: usize = 5;

pub const RAW_MAGIC: [u8; 4] = *b"CPKN";
pub const RAW_HEADER_LEN: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Raw,
}

impl Format {
    /// Guesses the format from a file extension; anything but `.bin`/`.raw`
    /// is treated as CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("raw") => Format::Raw,
            _ => Format::Csv,
        }
    }
}

/// An `n x d` sequence of observations stored row-major; row `i` is the
/// observation at time `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Builds a matrix from row-major values. Rejects empty shapes, a value
    /// count that does not match `n * d`, and non-finite entries.
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::invalid(format!("empty matrix shape {n}x{d}")));
        }
        if values.len() != n * d {
            return Err(Error::invalid(format!(
                "expected {} values for a {n}x{d} matrix, got {}",
                n * d,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation {
                row: pos / d + 1,
                col: pos % d + 1,
            });
        }
        Ok(Self { n, d, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {d} columns, found {}", row.len()),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(n, d, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    /// Copies rows `start..end` into a new matrix, keeping their order.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.n {
            return Err(Error::invalid(format!(
                "row range {start}..{end} out of bounds for {} rows",
                self.n
            )));
        }
        Ok(Self {
            n: end - start,
            d: self.d,
            values: self.values[start * self.d..end * self.d].to_vec(),
        })
    }

    /// Returns a copy with rows reordered so that new row `i` is old row
    /// `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for &i in order {
            values.extend_from_slice(self.row(i));
        }
        Self {
            n: self.n,
            d: self.d,
            values,
        }
    }
}

/// Loads and validates a matrix, requiring at least [`MIN_OBSERVATIONS`]
/// rows.
pub fn load_matrix(path: impl AsRef<Path>, format: Format) -> Result<DataMatrix> {
    let file = File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    let data = match format {
        Format::Csv => read_csv(reader)?,
        Format::Raw => read_raw(reader)?,
    };
    if data.n() < MIN_OBSERVATIONS {
        return Err(Error::TooFewObservations(data.n()));
    }
    Ok(data)
}

pub fn read_csv<R: Read>(reader: R) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut d = 0usize;
    let mut n = 0usize;
    let mut values = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|c| c.parse::<f64>().ok()).collect();
        if idx == 0 && parsed.iter().any(Option::is_none) {
            // header line
            continue;
        }
        if d == 0 {
            d = record.len();
        } else if record.len() != d {
            return Err(Error::Parse {
                line,
                msg: format!("expected {d} columns, found {}", record.len()),
            });
        }
        for (col, cell) in parsed.into_iter().enumerate() {
            let v = cell.ok_or_else(|| Error::Parse {
                line,
                msg: format!("cannot parse `{}` as a number", &record[col]),
            })?;
            if !v.is_finite() {
                return Err(Error::Validation {
                    row: n + 1,
                    col: col + 1,
                });
            }
            values.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Parse {
            line: 0,
            msg: "no observations".into(),
        });
    }
    DataMatrix::new(n, d, values)
}

pub fn read_raw<R: Read>(mut reader: R) -> Result<DataMatrix> {
    let mut header = [0u8; RAW_HEADER_LEN];
    reader.read_exact(&mut header).map_err(|_| Error::Parse {
        line: 0,
        msg: "truncated raw header".into(),
    })?;
    if header[..4] != RAW_MAGIC {
        return Err(Error::Parse {
            line: 0,
            msg: "bad magic, expected CPKN".into(),
        });
    }
    let n = u64::from_le_bytes(header[4..12].try_into().unwrap());
    let d = u64::from_le_bytes(header[12..20].try_into().unwrap());
    let len = n
        .checked_mul(d)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("shape {n}x{d} too large"),
        })?;
    let mut bytes = vec![0u8; len * 8];
    reader.read_exact(&mut bytes).map_err(|_| Error::Parse {
        line: 0,
        msg: format!("raw payload shorter than {n}x{d} values"),
    })?;
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DataMatrix::new(n as usize, d as usize, values)
}

pub fn write_csv<W: Write>(data: &DataMatrix, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for i in 0..data.n() {
        let line = data
            .row(i)
            .iter()
            .map(|v| format!("{v:e}"))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_raw<W: Write>(data: &DataMatrix, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    w.write_all(&RAW_MAGIC)?;
    w.write_all(&(data.n() as u64).to_le_bytes())?;
    w.write_all(&(data.d() as u64).to_le_bytes())?;
    for v in data.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_matrix(data: &DataMatrix, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let file = File::create(path.as_ref())?;
    match format {
        Format::Csv => write_csv(data, file),
        Format::Raw => write_raw(data, file),
    }
}

/// Writes the JSON report and, when `traces` is given and the report carries
/// per-t traces, a CSV of `t,r1,r2,z_w,z_diff,m`.
pub fn write_report(
    report: &ScanReport,
    path: impl AsRef<Path>,
    traces: Option<&Path>,
) -> Result<()> {
    let doc = report.to_json_string()?;
    std::fs::write(path.as_ref(), doc + "\n")?;
    if let (Some(trace_path), Some(tr)) = (traces, report.traces.as_ref()) {
        let mut w = BufWriter::new(File::create(trace_path)?);
        writeln!(w, "t,r1,r2,z_w,z_diff,m")?;
        for row in tr.rows() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                row.t, row.r1, row.r2, row.z_w, row.z_diff, row.m
            )?;
        }
        w.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(s: &str) -> Result<DataMatrix> {
        read_csv(s.as_bytes())
    }

    #[test]
    fn zeros_csv() {
        let m = csv("0,0\n0,0\n0,0\n0,0\n0,0\n").unwrap();
        assert_eq!((m.n(), m.d()), (5, 2));
        assert!(m.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn header_is_skipped_and_scientific_notation_parses() {
        let m = csv("x,y\n1e-3,2.5E2\n-3,4\n").unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.row(0), &[1e-3, 250.0]);
    }

    #[test]
    fn nan_cell_reports_its_position() {
        match csv("1,2\n3,NaN\n5,6\n") {
            Err(Error::Validation { row, col }) => assert_eq!((row, col), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(csv("1,inf\n"), Err(Error::Validation { row: 1, col: 2 })));
    }

    #[test]
    fn ragged_rows_are_parse_errors() {
        assert!(matches!(csv("1,2\n3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(csv("1,2\n3,\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn too_few_rows_rejected_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("four.csv");
        std::fs::write(&path, "1\n2\n3\n4\n").unwrap();
        assert!(matches!(
            load_matrix(&path, Format::Csv),
            Err(Error::TooFewObservations(4))
        ));
    }

    #[test]
    fn raw_header_is_checked() {
        let mut buf = Vec::new();
        let m = DataMatrix::new(5, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        write_raw(&m, &mut buf).unwrap();
        assert_eq!(buf.len(), RAW_HEADER_LEN + 5 * 8);
        assert_eq!(&buf[..4], b"CPKN");
        assert_eq!(read_raw(buf.as_slice()).unwrap(), m);

        buf[0] = b'X';
        assert!(matches!(read_raw(buf.as_slice()), Err(Error::Parse { .. })));
        assert!(matches!(read_raw(&b"CPKN"[..]), Err(Error::Parse { .. })));
    }

    #[test]
    fn slices_keep_row_order() {
        let m = DataMatrix::from_rows(&[[1.0], [2.0], [3.0], [4.0]]).unwrap();
        let s = m.slice_rows(1, 3).unwrap();
        assert_eq!(s.values(), &[2.0, 3.0]);
        assert!(m.slice_rows(3, 3).is_err());
    }
}
