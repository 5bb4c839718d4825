//! Binary model checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   8 bytes  "GBCKPT\0\0"
//! version u32      currently 1
//! hlen    u64      length of the JSON header in bytes
//! header  hlen     UTF-8 JSON: variant tag, model spec (architecture, prior,
//!                  seed), optional training config, parameter names and shapes
//! params  f64*     every parameter tensor, row-major, in header order
//! ```
//!
//! Parameter order is generator, discriminator, encoder (BiGAN), aux head
//! (ACGAN, InfoGAN), each in layer order `weight, bias`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{build_model, GanError, ModelBundle, ModelSpec, TrainConfig};
use crate::tensor::Tensor;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"GBCKPT\0\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub variant: String,
    pub spec: ModelSpec,
    pub train: Option<TrainConfig>,
    pub params: Vec<(String, Vec<usize>)>,
}

fn networks(bundle: &ModelBundle) -> Vec<&super::Network> {
    let mut v = vec![&bundle.generator, &bundle.discriminator];
    v.extend(bundle.encoder.as_ref());
    v.extend(bundle.aux_head.as_ref());
    v
}

fn header_of(bundle: &ModelBundle, train: Option<&TrainConfig>) -> CheckpointHeader {
    let params = networks(bundle)
        .into_iter()
        .flat_map(|n| n.params.iter().map(|(name, t)| (name.to_string(), t.shape().to_vec())))
        .collect();
    CheckpointHeader {
        variant: bundle.variant().name().to_string(),
        spec: bundle.spec.clone(),
        train: train.cloned(),
        params,
    }
}

pub fn write_checkpoint(path: &Path, bundle: &ModelBundle, train: Option<&TrainConfig>) -> Result<(), GanError> {
    let header = serde_json::to_vec(&header_of(bundle, train)).map_err(|e| GanError::Checkpoint(e.to_string()))?;
    let mut buf = Vec::new();
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(header.len() as u64).to_le_bytes());
    buf.extend_from_slice(&header);
    for net in networks(bundle) {
        for t in net.params.tensors() {
            for v in t.data() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8], GanError> {
    if bytes.len() < n {
        return Err(GanError::Checkpoint("file truncated".into()));
    }
    let (head, tail) = bytes.split_at(n);
    *bytes = tail;
    Ok(head)
}

/// Reads only the header, for inspection.
pub fn read_checkpoint_header(path: &Path) -> Result<CheckpointHeader, GanError> {
    let mut raw = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut raw)?;
    parse_header(&mut raw.as_slice())
}

fn parse_header(bytes: &mut &[u8]) -> Result<CheckpointHeader, GanError> {
    if take(bytes, 8)? != CHECKPOINT_MAGIC {
        return Err(GanError::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(bytes, 4)?.try_into().expect("4 bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(GanError::Checkpoint(format!("unsupported version {version}")));
    }
    let hlen = u64::from_le_bytes(take(bytes, 8)?.try_into().expect("8 bytes")) as usize;
    serde_json::from_slice(take(bytes, hlen)?).map_err(|e| GanError::Checkpoint(format!("header: {e}")))
}

pub fn read_checkpoint(path: &Path) -> Result<(ModelBundle, CheckpointHeader), GanError> {
    let mut raw = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut raw)?;
    let mut bytes = raw.as_slice();
    let header = parse_header(&mut bytes)?;
    let mut bundle = build_model(&header.spec)?;
    if header_of(&bundle, None).params != header.params {
        return Err(GanError::Checkpoint("parameter layout does not match the architecture".into()));
    }
    let mut nets: Vec<&mut super::Network> = vec![&mut bundle.generator, &mut bundle.discriminator];
    nets.extend(bundle.encoder.as_mut());
    nets.extend(bundle.aux_head.as_mut());
    for net in nets {
        let mut values = Vec::with_capacity(net.params.len());
        for t in net.params.tensors() {
            let data: Vec<f64> = take(&mut bytes, t.numel() * 8)?
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            values.push(Tensor::new(t.shape().to_vec(), data)?);
        }
        net.params.replace_values(values)?;
    }
    if !bytes.is_empty() {
        return Err(GanError::Checkpoint(format!("{} trailing bytes", bytes.len())));
    }
    Ok((bundle, header))
}
