//! Binary container for numeric arrays with three or more axes.
//!
//! ```text
//! magic   8 bytes  "GBTENSOR"
//! version u32 LE   1
//! naxes   u32 LE
//! extents naxes × u64 LE
//! data    product(extents) × f64 LE, row-major
//! ```

use std::path::Path;

use super::DatasetError;

pub const TENSOR_MAGIC: &[u8; 8] = b"GBTENSOR";
pub const TENSOR_VERSION: u32 = 1;

/// A dense row-major array of any rank.
#[derive(Debug, Clone, PartialEq)]
pub struct NdArray {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl NdArray {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, DatasetError> {
        if shape.is_empty() || shape.iter().product::<usize>() != data.len() {
            return Err(DatasetError::Container(format!(
                "shape {shape:?} does not hold {} values",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(DatasetError::Container("non-finite value".into()));
        }
        Ok(Self { shape, data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

pub fn write_tensor_file(path: &Path, array: &NdArray) -> Result<(), DatasetError> {
    let mut buf = Vec::with_capacity(16 + 8 * array.shape.len() + 8 * array.data.len());
    buf.extend_from_slice(TENSOR_MAGIC);
    buf.extend_from_slice(&TENSOR_VERSION.to_le_bytes());
    buf.extend_from_slice(&(array.shape.len() as u32).to_le_bytes());
    for &e in &array.shape {
        buf.extend_from_slice(&(e as u64).to_le_bytes());
    }
    for v in &array.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, buf).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_tensor_file(path: &Path) -> Result<NdArray, DatasetError> {
    let bytes = std::fs::read(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    decode(&bytes)
}

fn decode(mut b: &[u8]) -> Result<NdArray, DatasetError> {
    let mut take = |n: usize| -> Result<&[u8], DatasetError> {
        if b.len() < n {
            return Err(DatasetError::Container("truncated file".into()));
        }
        let (h, t) = b.split_at(n);
        b = t;
        Ok(h)
    };
    if take(8)? != TENSOR_MAGIC {
        return Err(DatasetError::Container("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
    if version != TENSOR_VERSION {
        return Err(DatasetError::Container(format!("unsupported version {version}")));
    }
    let naxes = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes")) as usize;
    let mut shape = Vec::with_capacity(naxes);
    for _ in 0..naxes {
        shape.push(u64::from_le_bytes(take(8)?.try_into().expect("8 bytes")) as usize);
    }
    let count = shape
        .iter()
        .try_fold(1usize, |a, &e| a.checked_mul(e))
        .ok_or_else(|| DatasetError::Container("extent overflow".into()))?;
    let raw = take(count.checked_mul(8).ok_or_else(|| DatasetError::Container("extent overflow".into()))?)?;
    let data = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if !b.is_empty() {
        return Err(DatasetError::Container(format!("{} trailing bytes", b.len())));
    }
    NdArray::new(shape, data)
}
