use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    /// Parsed as `f64`.
    Numeric,
    /// Kept verbatim (after trimming).
    Text,
}

/// Required columns of a longitudinal CSV file. Extra columns are ignored.
#[derive(Clone, Debug)]
pub struct Schema {
    subject: String,
    columns: Vec<(String, ColumnKind)>,
}

impl Schema {
    pub fn new(subject: impl Into<String>) -> Self {
        Self { subject: subject.into(), columns: Vec::new() }
    }

    pub fn numeric(mut self, name: impl Into<String>) -> Self {
        self.columns.push((name.into(), ColumnKind::Numeric));
        self
    }

    pub fn text(mut self, name: impl Into<String>) -> Self {
        self.columns.push((name.into(), ColumnKind::Text));
        self
    }
}

/// Rows of a longitudinal data set in file order.
///
/// Subject labels are re-indexed to `1..=n` in order of first appearance;
/// `subject_labels()[k - 1]` is the original label of subject `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LongitudinalTable {
    subject: Vec<usize>,
    labels: Vec<String>,
    numeric: HashMap<String, Vec<f64>>,
    text: HashMap<String, Vec<String>>,
}

impl LongitudinalTable {
    pub fn n_rows(&self) -> usize {
        self.subject.len()
    }

    pub fn n_subjects(&self) -> usize {
        self.labels.len()
    }

    /// 1-based contiguous subject index of each row.
    pub fn subject_ids(&self) -> &[usize] {
        &self.subject
    }

    pub fn subject_labels(&self) -> &[String] {
        &self.labels
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        self.numeric.get(name).map(Vec::as_slice).ok_or_else(|| Error::MissingColumn(name.into()))
    }

    pub fn text(&self, name: &str) -> Result<&[String]> {
        self.text.get(name).map(Vec::as_slice).ok_or_else(|| Error::MissingColumn(name.into()))
    }

    /// Row indices of each subject, subjects in index order.
    pub fn rows_by_subject(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.labels.len()];
        for (row, &s) in self.subject.iter().enumerate() {
            groups[s - 1].push(row);
        }
        groups
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<LongitudinalTable> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, schema)
}

/// Parses CSV with a header row. Parse errors carry the 1-based line number
/// of the offending row in the file.
pub fn read_csv<R: Read>(input: R, schema: &Schema) -> Result<LongitudinalTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let position = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let subject_col = position(&schema.subject)?;
    let cols = schema
        .columns
        .iter()
        .map(|(name, kind)| Ok((name.as_str(), *kind, position(name)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut table = LongitudinalTable {
        subject: Vec::new(),
        labels: Vec::new(),
        numeric: HashMap::new(),
        text: HashMap::new(),
    };
    let mut index_of: HashMap<String, usize> = HashMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let label = record.get(subject_col).unwrap_or("").to_string();
        let next = table.labels.len() + 1;
        let id = *index_of.entry(label.clone()).or_insert_with(|| {
            table.labels.push(label);
            next
        });
        table.subject.push(id);
        for &(name, kind, col) in &cols {
            let cell = record.get(col).unwrap_or("");
            match kind {
                ColumnKind::Numeric => {
                    let v = cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                        row: line,
                        column: name.to_string(),
                        value: cell.to_string(),
                    })?;
                    table.numeric.entry(name.to_string()).or_default().push(v);
                }
                ColumnKind::Text => table.text.entry(name.to_string()).or_default().push(cell.to_string()),
            }
        }
    }
    for (name, kind) in &schema.columns {
        match kind {
            ColumnKind::Numeric => {
                table.numeric.entry(name.clone()).or_default();
            }
            ColumnKind::Text => {
                table.text.entry(name.clone()).or_default();
            }
        }
    }
    Ok(table)
}
