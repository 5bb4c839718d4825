use std::collections::BTreeMap;
use std::path::Path;

use super::{Column, ColumnKind, Dataset, DatasetError};
use crate::sample::SampleSet;

/// Whether the first record is a header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    /// With a schema: header iff the first record repeats the column names.
    /// Without: header iff any of its fields is not a number.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TabularOptions {
    pub header: HeaderMode,
    /// Every column of the file in order; `None` treats all columns as
    /// continuous and names them from the header (or `c0, c1, …`).
    pub schema: Option<Vec<Column>>,
    /// Column holding per-row class labels; removed from the features.
    pub label_column: Option<String>,
}

pub fn load_tabular(path: &Path, opts: &TabularOptions) -> Result<Dataset, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_tabular(&text, opts)
}

fn is_number(s: &str) -> bool {
    s.parse::<f64>().is_ok()
}

/// Parses comma-separated text. Discrete columns are coded by first
/// appearance (0, 1, …); labels that are all non-negative integers are used
/// as-is, otherwise they are coded in sorted order.
pub fn parse_tabular(text: &str, opts: &TabularOptions) -> Result<Dataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| DatasetError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec));
    }
    let Some((_, first)) = records.first() else {
        return Err(DatasetError::Empty);
    };
    let has_header = match opts.header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => match &opts.schema {
            Some(s) => s.len() == first.len() && s.iter().zip(first.iter()).all(|(c, f)| c.name.eq_ignore_ascii_case(f)),
            None => first.iter().any(|f| !is_number(f)),
        },
    };
    let schema: Vec<Column> = match &opts.schema {
        Some(s) => s.clone(),
        None if has_header => first.iter().map(Column::continuous).collect(),
        None => (0..first.len()).map(|j| Column::continuous(format!("c{j}"))).collect(),
    };
    if has_header && opts.schema.is_some() && first.len() != schema.len() {
        return Err(DatasetError::Schema(format!(
            "header has {} columns, schema has {}",
            first.len(),
            schema.len()
        )));
    }
    let body = if has_header { &records[1..] } else { &records[..] };
    if body.is_empty() {
        return Err(DatasetError::Empty);
    }
    let label_idx = match &opts.label_column {
        Some(name) => Some(
            schema
                .iter()
                .position(|c| &c.name == name)
                .ok_or_else(|| DatasetError::Schema(format!("label column `{name}` not in schema")))?,
        ),
        None => None,
    };
    let width = schema.len();
    let features: Vec<usize> = (0..width).filter(|&j| Some(j) != label_idx).collect();
    let mut codes: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); width];
    let mut data = Vec::with_capacity(body.len() * features.len());
    let mut raw_labels = Vec::new();
    for (row, (line, rec)) in body.iter().enumerate() {
        if rec.len() != width {
            return Err(DatasetError::FieldCount {
                line: *line,
                expected: width,
                found: rec.len(),
            });
        }
        for &j in &features {
            let tok = &rec[j];
            let v = match schema[j].kind {
                ColumnKind::Continuous => match tok.parse::<f64>() {
                    Ok(v) if v.is_finite() => v,
                    _ => {
                        return Err(DatasetError::Parse {
                            line: *line,
                            row,
                            column: schema[j].name.clone(),
                            token: tok.to_string(),
                        })
                    }
                },
                ColumnKind::Discrete => {
                    let next = codes[j].len();
                    *codes[j].entry(tok.to_string()).or_insert(next) as f64
                }
            };
            data.push(v);
        }
        if let Some(li) = label_idx {
            raw_labels.push(rec[li].to_string());
        }
    }
    let mut set = SampleSet::new(body.len(), features.len(), data)?;
    if label_idx.is_some() {
        set = set.with_labels(encode_labels(&raw_labels))?;
    }
    Ok(Dataset {
        original_shape: vec![set.rows(), set.cols()],
        data: set,
        schema: features.iter().map(|&j| schema[j].clone()).collect(),
        norm: None,
        notes: Vec::new(),
    })
}

fn encode_labels(raw: &[String]) -> Vec<usize> {
    let ints: Option<Vec<usize>> = raw.iter().map(|s| s.parse().ok()).collect();
    if let Some(v) = ints {
        return v;
    }
    let mut uniq: Vec<&String> = raw.iter().collect();
    uniq.sort();
    uniq.dedup();
    raw.iter()
        .map(|s| uniq.binary_search(&s).expect("present"))
        .collect()
}
