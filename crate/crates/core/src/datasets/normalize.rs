use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError};
use crate::sample::SampleSet;

/// Per-column range fitted for min-max scaling to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormState {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub method: String,
}

impl NormState {
    pub fn fit(data: &SampleSet) -> Result<Self, DatasetError> {
        if data.is_empty() {
            return Err(DatasetError::Empty);
        }
        let d = data.cols();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for i in 0..data.rows() {
            for (j, &v) in data.row(i).iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Self {
            min,
            max,
            method: "minmax[-1,1]".into(),
        })
    }

    /// `x' = 2(x - min)/(max - min) - 1`; constant columns map to 0.
    pub fn apply(&self, data: &SampleSet) -> Result<SampleSet, DatasetError> {
        self.map(data, |v, lo, hi| if hi > lo { 2.0 * (v - lo) / (hi - lo) - 1.0 } else { 0.0 })
    }

    pub fn invert(&self, data: &SampleSet) -> Result<SampleSet, DatasetError> {
        self.map(data, |v, lo, hi| if hi > lo { (v + 1.0) * 0.5 * (hi - lo) + lo } else { lo })
    }

    fn map(&self, data: &SampleSet, f: impl Fn(f64, f64, f64) -> f64) -> Result<SampleSet, DatasetError> {
        if data.cols() != self.min.len() {
            return Err(DatasetError::Schema(format!(
                "normalization fitted on {} columns, data has {}",
                self.min.len(),
                data.cols()
            )));
        }
        let d = data.cols();
        let out: Vec<f64> = data
            .data()
            .iter()
            .enumerate()
            .map(|(i, &v)| f(v, self.min[i % d], self.max[i % d]))
            .collect();
        let mut set = SampleSet::new(data.rows(), d, out)?;
        if let Some(l) = data.labels() {
            set = set.with_labels(l.to_vec())?;
        }
        Ok(set)
    }
}

/// Fits min-max scaling on `ds` and applies it.
pub fn normalize(ds: &Dataset) -> Result<(Dataset, NormState), DatasetError> {
    let state = NormState::fit(&ds.data)?;
    Ok((normalize_with(ds, &state)?, state))
}

/// Applies an already fitted scaling.
pub fn normalize_with(ds: &Dataset, state: &NormState) -> Result<Dataset, DatasetError> {
    let mut out = ds.clone();
    out.data = state.apply(&ds.data)?;
    out.norm = Some(state.clone());
    Ok(out)
}

pub fn denormalize(ds: &Dataset, state: &NormState) -> Result<Dataset, DatasetError> {
    let mut out = ds.clone();
    out.data = state.invert(&ds.data)?;
    out.norm = None;
    Ok(out)
}
