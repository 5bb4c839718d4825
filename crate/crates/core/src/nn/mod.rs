//! Multilayer perceptrons, parameter sets, and the Adam / RMSprop optimizers.

mod mlp;
mod optim;

use thiserror::Error;

use crate::tensor::{ExprGraph, NodeId, Tensor};

pub use mlp::{build_mlp, Activation, Layer, Mlp, MlpSpec};
pub use optim::{
    adam_step, clip_weights, rmsprop_step, Direction, Optimizer, OptimizerConfig, OptimizerKind,
    OptimizerState,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("layer {layer} has zero width")]
    ZeroWidth { layer: usize },
    #[error("duplicate parameter name `{0}`")]
    DuplicateName(String),
    #[error("no gradient for parameter `{0}`")]
    MissingGradient(String),
    #[error("gradient for `{name}` has shape {grad:?}, parameter has {param:?}")]
    GradientShape {
        name: String,
        param: Vec<usize>,
        grad: Vec<usize>,
    },
    #[error("parameter `{0}` is not finite")]
    NonFinite(String),
}

/// Ordered, uniquely named trainable tensors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamSet {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamSet {
    pub fn push(&mut self, name: impl Into<String>, tensor: Tensor) -> Result<(), NnError> {
        let name = name.into();
        if self.names.contains(&name) {
            return Err(NnError::DuplicateName(name));
        }
        if !tensor.all_finite() {
            return Err(NnError::NonFinite(name));
        }
        self.names.push(name);
        self.tensors.push(tensor);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn count(&self) -> usize {
        self.tensors.iter().map(Tensor::numel).sum()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub(crate) fn tensor_mut(&mut self, i: usize) -> &mut Tensor {
        &mut self.tensors[i]
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.names.iter().position(|n| n == name).map(|i| &self.tensors[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    /// Adds every tensor as a tracked parameter leaf.
    pub fn bind(&self, g: &mut ExprGraph) -> Vec<NodeId> {
        self.iter().map(|(n, t)| g.param(n, t.clone())).collect()
    }

    /// Adds every tensor as a constant (no gradient).
    pub fn bind_frozen(&self, g: &mut ExprGraph) -> Vec<NodeId> {
        self.tensors.iter().map(|t| g.constant(t.clone())).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.tensors.iter().map(Tensor::max_abs).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(Tensor::all_finite)
    }

    /// Replaces the tensor values, keeping names; shapes must match.
    pub fn replace_values(&mut self, values: Vec<Tensor>) -> Result<(), NnError> {
        if values.len() != self.tensors.len() {
            return Err(NnError::GradientShape {
                name: "<all>".into(),
                param: vec![self.tensors.len()],
                grad: vec![values.len()],
            });
        }
        for (i, v) in values.iter().enumerate() {
            if v.shape() != self.tensors[i].shape() {
                return Err(NnError::GradientShape {
                    name: self.names[i].clone(),
                    param: self.tensors[i].shape().to_vec(),
                    grad: v.shape().to_vec(),
                });
            }
        }
        self.tensors = values;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn names_are_unique() {
        let mut p = ParamSet::default();
        p.push("w", Tensor::scalar(1.0)).unwrap();
        assert!(matches!(p.push("w", Tensor::scalar(2.0)), Err(NnError::DuplicateName(_))));
    }

    proptest! {
        #[test]
        fn clipping_bounds_and_idempotence(
            ws in prop::collection::vec(-5.0f64..5.0, 1..40),
            c in 0.001f64..2.0,
        ) {
            let mut p = ParamSet::default();
            p.push("w", Tensor::vector(ws).unwrap()).unwrap();
            clip_weights(&mut p, c);
            prop_assert!(p.max_abs() <= c);
            let once = p.clone();
            clip_weights(&mut p, c);
            prop_assert_eq!(once, p);
        }
    }
}
