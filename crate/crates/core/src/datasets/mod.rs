//! Loading, preprocessing, normalization and synthesis of training data.

mod container;
mod kdd99;
mod normalize;
mod synth;
mod tabular;

use thiserror::Error;

use crate::sample::{SampleError, SampleSet};

pub use container::{read_tensor_file, write_tensor_file, NdArray, TENSOR_MAGIC, TENSOR_VERSION};
pub use kdd99::{kdd99_schema, preprocess_kdd99, KDD99_COLUMNS, KDD99_KEEP};
pub use normalize::{denormalize, normalize, normalize_with, NormState};
pub use synth::{synth_gaussian_mixture, MixtureComponent, MixtureSpec};
pub use tabular::{load_tabular, parse_tabular, HeaderMode, TabularOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("no data rows")]
    Empty,
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount { line: u64, expected: usize, found: usize },
    #[error("line {line} (row {row}), column `{column}`: cannot parse `{token}` as a number")]
    Parse {
        line: u64,
        row: usize,
        column: String,
        token: String,
    },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("only {found} qualifying continuous columns, need {needed}: {candidates:?}")]
    TooFewColumns {
        found: usize,
        needed: usize,
        candidates: Vec<String>,
    },
    #[error("invalid mixture: {0}")]
    Mixture(String),
    #[error("tensor container: {0}")]
    Container(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Continuous,
    /// Category codes; retained but never trained on.
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn continuous(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Continuous,
        }
    }

    pub fn discrete(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Discrete,
        }
    }
}

/// A sample matrix with its column schema and pre-flatten shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub data: SampleSet,
    pub schema: Vec<Column>,
    /// Extents before flattening; `[n, d]` for tabular data.
    pub original_shape: Vec<usize>,
    pub norm: Option<NormState>,
    /// Preprocessing steps applied, in order (for report provenance).
    pub notes: Vec<String>,
}

impl Dataset {
    /// Wraps a sample set with continuous columns `c0, c1, …`.
    pub fn from_samples(data: SampleSet) -> Result<Self, DatasetError> {
        if data.is_empty() {
            return Err(DatasetError::Empty);
        }
        let schema = (0..data.cols()).map(|j| Column::continuous(format!("c{j}"))).collect();
        Ok(Self {
            original_shape: vec![data.rows(), data.cols()],
            data,
            schema,
            norm: None,
            notes: Vec::new(),
        })
    }

    pub fn rows(&self) -> usize {
        self.data.rows()
    }

    pub fn cols(&self) -> usize {
        self.data.cols()
    }

    pub fn shape(&self) -> [usize; 2] {
        [self.rows(), self.cols()]
    }

    pub fn column_names(&self) -> Vec<String> {
        self.schema.iter().map(|c| c.name.clone()).collect()
    }

    /// Only the continuous columns, labels kept.
    pub fn continuous(&self) -> Result<Self, DatasetError> {
        let keep: Vec<usize> = (0..self.cols())
            .filter(|&j| self.schema[j].kind == ColumnKind::Continuous)
            .collect();
        if keep.len() == self.cols() {
            return Ok(self.clone());
        }
        self.select_columns(&keep)
    }

    pub fn select_columns(&self, keep: &[usize]) -> Result<Self, DatasetError> {
        if keep.is_empty() {
            return Err(DatasetError::Schema("no columns selected".into()));
        }
        let mut data = Vec::with_capacity(self.rows() * keep.len());
        for i in 0..self.rows() {
            let row = self.data.row(i);
            data.extend(keep.iter().map(|&j| row[j]));
        }
        let mut set = SampleSet::new(self.rows(), keep.len(), data)?;
        if let Some(l) = self.data.labels() {
            set = set.with_labels(l.to_vec())?;
        }
        Ok(Self {
            data: set,
            schema: keep.iter().map(|&j| self.schema[j].clone()).collect(),
            original_shape: vec![self.rows(), keep.len()],
            norm: None,
            notes: self.notes.clone(),
        })
    }

    /// Keeps every `k`-th feature column, starting with the first.
    pub fn decimate(&self, k: usize) -> Result<Self, DatasetError> {
        if k == 0 {
            return Err(DatasetError::Invalid("decimation step must be positive".into()));
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let keep: Vec<usize> = (0..self.cols()).step_by(k).collect();
        let mut out = self.select_columns(&keep)?;
        out.original_shape = self.original_shape.clone();
        out.notes.push(format!("decimate every {k}th feature: {} -> {}", self.cols(), out.cols()));
        Ok(out)
    }

    /// Rows at the given indices.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut out = self.clone();
        out.data = self.data.select(idx);
        out.original_shape[0] = idx.len();
        out
    }
}

/// Row-major flattening of every sample of an `(n, a, b, …)` array into a
/// `(n, a·b·…)` dataset; the original extents are kept.
pub fn flatten(array: &NdArray) -> Result<Dataset, DatasetError> {
    let shape = array.shape();
    if shape.len() < 2 {
        return Err(DatasetError::Invalid(format!(
            "flatten needs at least 2 axes, got {shape:?}"
        )));
    }
    let n = shape[0];
    let width: usize = shape[1..].iter().product();
    let data = SampleSet::new(n, width, array.data().to_vec())?;
    let mut ds = Dataset::from_samples(data)?;
    ds.original_shape = shape.to_vec();
    if shape.len() > 2 {
        ds.notes.push(format!("flatten {shape:?} -> [{n}, {width}]"));
    }
    Ok(ds)
}
