//! CSV emission and column-checked numeric CSV input.

use std::path::Path;

use crate::error::{CliError, Result};

/// Fixed 12-significant-digit scientific notation.
pub fn float(x: f64) -> String {
    format!("{x:.11e}")
}

/// Rows buffered behind a one-line header.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
    error: Option<csv::Error>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let error = writer.write_record(header).err();
        Table { writer, error }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        if self.error.is_none() {
            self.error = self.writer.write_record(row).err();
        }
    }

    pub fn finish(self) -> Result<String> {
        let csv_error = |e: String| CliError::Usage(format!("CSV encoding failed: {e}"));
        if let Some(e) = self.error {
            return Err(csv_error(e.to_string()));
        }
        let bytes = self.writer.into_inner().map_err(|e| csv_error(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| csv_error(e.to_string()))
    }
}

/// Reads the named numeric columns (in the given order) from a headed CSV.
/// Extra columns are ignored; a missing column or an unparsable field is
/// reported with its name and line number.
pub fn read_columns(path: &Path, columns: &[&'static str]) -> Result<Vec<Vec<f64>>> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(file);
    let record_error = |line: u64, message: String| CliError::Record { path: path.to_path_buf(), line, message };
    let headers = reader.headers().map_err(|e| record_error(1, e.to_string()))?.clone();
    let index: Vec<usize> = columns
        .iter()
        .map(|&column| {
            headers.iter().position(|h| h == column).ok_or(CliError::MissingColumn { path: path.to_path_buf(), column })
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            record_error(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = index
            .iter()
            .zip(columns)
            .map(|(&i, &column)| {
                let field = record.get(i).unwrap_or("");
                field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    record_error(line, format!("column `{column}`: cannot parse {field:?} as a finite number"))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
