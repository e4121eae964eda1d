//! CSV helpers shared by the exporters. Lines starting with `#` are comments
//! and carry artifact provenance.

use std::io::{Read, Write};

/// Dense row-major matrix read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("row {row}: expected {expected} values, found {found}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("row {row}: cannot parse {value:?} as a number")]
    Parse { row: usize, value: String },
    #[error("empty table")]
    Empty,
}

pub fn write_comments<W: Write>(w: &mut W, header: &[String]) -> std::io::Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

/// Write `rows x cols` values produced by `value(row, col)`.
pub fn write_matrix<W: Write>(
    mut w: W,
    header: &[String],
    rows: usize,
    cols: usize,
    value: impl Fn(usize, usize) -> f64,
) -> Result<(), TableError> {
    write_comments(&mut w, header)?;
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    let mut record = Vec::with_capacity(cols);
    for r in 0..rows {
        record.clear();
        record.extend((0..cols).map(|c| value(r, c).to_string()));
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

/// Read a headerless numeric CSV, skipping `#` comment lines.
pub fn read_matrix<R: Read>(r: R) -> Result<Matrix, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(r);
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let expected = *cols.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(TableError::Ragged { row, expected, found: rec.len() });
        }
        for field in rec.iter() {
            let v = field
                .parse::<f64>()
                .map_err(|_| TableError::Parse { row, value: field.to_string() })?;
            values.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or(TableError::Empty)?;
    Ok(Matrix { rows, cols, values })
}

/// Write a table with a header row followed by numeric records.
pub fn write_records<W: Write>(
    mut w: W,
    comments: &[String],
    columns: &[String],
    records: impl IntoIterator<Item = Vec<f64>>,
) -> Result<(), TableError> {
    write_comments(&mut w, comments)?;
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(columns)?;
    for rec in records {
        out.write_record(rec.iter().map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}
