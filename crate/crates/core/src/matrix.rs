//! Delimited 0/1 presence-absence matrices: rows are species, columns are
//! biogeographic units.
//!
//! Accepted layout (comma- or tab-delimited):
//!
//! ```text
//! species,island1,island2,island3
//! s1,1,0,1
//! s2,0,0,1
//! ```
//!
//! The header row and the label column are both optional; missing labels are
//! generated as `r1, r2, ...` and `c1, c2, ...`.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, ParseError, Result};
use crate::model::BinaryVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    /// The first row is a header when any of its data cells is not a number.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// `None` picks tab if the first non-empty line contains one, else comma.
    pub delimiter: Option<u8>,
    pub header: HeaderMode,
    /// Whether the first column holds row labels.
    pub row_labels: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            delimiter: None,
            header: HeaderMode::Auto,
            row_labels: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresenceAbsenceMatrix {
    row_labels: Vec<String>,
    column_labels: Vec<String>,
    rows: Vec<BinaryVector>,
}

fn parse_error(line: Option<usize>, column: Option<usize>, message: impl Into<String>) -> Error {
    Error::Parse(ParseError {
        line,
        column,
        message: message.into(),
    })
}

fn check_unique(labels: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(parse_error(None, None, format!("duplicate {what} label '{l}'")));
        }
    }
    Ok(())
}

impl PresenceAbsenceMatrix {
    pub fn new(row_labels: Vec<String>, column_labels: Vec<String>, rows: Vec<BinaryVector>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("matrix has no rows"));
        }
        let m = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                left: m,
                right: bad.len(),
            });
        }
        if row_labels.len() != rows.len() || column_labels.len() != m {
            return Err(Error::InvalidConfig(format!(
                "label counts ({} rows, {} columns) do not match a {}x{} matrix",
                row_labels.len(),
                column_labels.len(),
                rows.len(),
                m
            )));
        }
        check_unique(&row_labels, "row")?;
        check_unique(&column_labels, "column")?;
        Ok(Self {
            row_labels,
            column_labels,
            rows,
        })
    }

    /// Matrix with generated labels.
    pub fn from_rows(rows: Vec<BinaryVector>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, BinaryVector::len);
        Self::new(
            (1..=n).map(|i| format!("r{i}")).collect(),
            (1..=m).map(|j| format!("c{j}")).collect(),
            rows,
        )
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.column_labels.len()
    }

    pub fn rows(&self) -> &[BinaryVector] {
        &self.rows
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn column_labels(&self) -> &[String] {
        &self.column_labels
    }

    /// Units become rows, for comparing biogeographic units by their species.
    pub fn transpose(&self) -> Self {
        let rows = (0..self.n_columns())
            .map(|j| BinaryVector::from_raw(self.rows.iter().map(|r| r.as_slice()[j]).collect()))
            .collect();
        Self {
            row_labels: self.column_labels.clone(),
            column_labels: self.row_labels.clone(),
            rows,
        }
    }

    pub fn parse_str(text: &str, opts: &ParseOptions) -> Result<Self> {
        parse_reader(text.as_bytes(), opts, detect_delimiter(text, opts))
    }

    pub fn read_path(path: &Path, opts: &ParseOptions) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| parse_error(None, None, format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text, opts)
    }

    /// Writes a header row and a label column.
    pub fn write<W: Write>(&self, out: W, delimiter: u8) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
        let mut header = vec![String::new()];
        header.extend(self.column_labels.iter().cloned());
        w.write_record(&header)?;
        for (label, row) in self.row_labels.iter().zip(&self.rows) {
            let mut rec = vec![label.clone()];
            rec.extend(row.as_slice().iter().map(|b| b.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()
    }
}

fn detect_delimiter(text: &str, opts: &ParseOptions) -> u8 {
    opts.delimiter.unwrap_or_else(|| {
        let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        if first.contains('\t') {
            b'\t'
        } else {
            b','
        }
    })
}

fn parse_reader<R: Read>(input: R, opts: &ParseOptions, delimiter: u8) -> Result<PresenceAbsenceMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let skip = opts.row_labels as usize;
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            parse_error(line, None, e.to_string())
        })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line() as usize);
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(Error::EmptyInput("matrix file has no rows"));
    }

    let first_is_header = match opts.header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => records[0].1.iter().skip(skip).any(|c| c.parse::<f64>().is_err()),
    };
    let column_labels: Option<Vec<String>> = first_is_header.then(|| {
        let (_, header) = records.remove(0);
        header.iter().skip(skip).map(str::to_string).collect()
    });
    if records.is_empty() {
        return Err(Error::EmptyInput("matrix file has a header but no data rows"));
    }

    let width = column_labels
        .as_ref()
        .map_or(records[0].1.len() - skip.min(records[0].1.len()), Vec::len);
    if width == 0 {
        return Err(parse_error(Some(records[0].0), None, "no data columns"));
    }

    let mut row_labels = Vec::with_capacity(records.len());
    let mut rows = Vec::with_capacity(records.len());
    for (i, (line, rec)) in records.iter().enumerate() {
        if rec.len() != width + skip {
            return Err(parse_error(
                Some(*line),
                None,
                format!("expected {} fields, found {} (ragged row)", width + skip, rec.len()),
            ));
        }
        let label = if opts.row_labels {
            rec[0].to_string()
        } else {
            format!("r{}", i + 1)
        };
        let mut bits = Vec::with_capacity(width);
        for (j, cell) in rec.iter().skip(skip).enumerate() {
            match cell {
                "0" => bits.push(0),
                "1" => bits.push(1),
                other => {
                    let unit = column_labels
                        .as_ref()
                        .map_or_else(|| format!("c{}", j + 1), |c| c[j].clone());
                    return Err(parse_error(
                        Some(*line),
                        Some(j + skip + 1),
                        format!("non-binary value '{other}' (row '{label}', unit '{unit}')"),
                    ));
                }
            }
        }
        row_labels.push(label);
        rows.push(BinaryVector::from_raw(bits));
    }
    let column_labels = column_labels.unwrap_or_else(|| (1..=width).map(|j| format!("c{j}")).collect());
    PresenceAbsenceMatrix::new(row_labels, column_labels, rows)
}
