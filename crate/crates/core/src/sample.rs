use thiserror::Error;

use crate::tensor::Tensor;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("{len} values cannot fill {rows} rows of width {cols}")]
    Shape { rows: usize, cols: usize, len: usize },
    #[error("{labels} labels for {rows} rows")]
    Labels { rows: usize, labels: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
}

/// An `(n × d)` matrix of samples with optional per-row class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    labels: Option<Vec<usize>>,
}

impl SampleSet {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, SampleError> {
        if rows * cols != data.len() || cols == 0 {
            return Err(SampleError::Shape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(SampleError::NonFinite {
                row: i / cols,
                col: i % cols,
            });
        }
        Ok(Self {
            rows,
            cols,
            data,
            labels: None,
        })
    }

    pub fn empty(cols: usize) -> Self {
        Self {
            rows: 0,
            cols,
            data: Vec::new(),
            labels: None,
        }
    }

    /// One-feature sample set.
    pub fn from_column(values: &[f64]) -> Result<Self, SampleError> {
        Self::new(values.len(), 1, values.to_vec())
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SampleError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(SampleError::Shape {
                    rows: rows.len(),
                    cols,
                    len: data.len() + r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn from_tensor(t: &Tensor) -> Result<Self, SampleError> {
        Self::new(t.rows(), t.cols(), t.data().to_vec())
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self, SampleError> {
        if labels.len() != self.rows {
            return Err(SampleError::Labels {
                rows: self.rows,
                labels: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    /// `(n, d)` tensor view; `None` for an empty set.
    pub fn to_tensor(&self) -> Option<Tensor> {
        if self.rows == 0 {
            return None;
        }
        Some(Tensor::from_parts(vec![self.rows, self.cols], self.data.clone()))
    }

    /// Rows at the given indices, labels included.
    pub fn select(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
            labels: self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect()),
        }
    }
}
