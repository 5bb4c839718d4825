use serde::{Deserialize, Serialize};

use super::{NnError, ParamSet};
use crate::tensor::{GradientMap, Tensor};

/// Sign of an update: discriminators climb their objective, generators
/// descend theirs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Ascend,
    Descend,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OptimizerKind {
    Adam { beta1: f64, beta2: f64, eps: f64 },
    RmsProp { decay: f64, eps: f64 },
}

impl OptimizerKind {
    pub fn adam() -> Self {
        OptimizerKind::Adam {
            beta1: 0.5,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn rmsprop() -> Self {
        OptimizerKind::RmsProp {
            decay: 0.9,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub lr: f64,
}

/// Moment accumulators, one per parameter, and the step counter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OptimizerState {
    pub t: u64,
    pub first: Vec<Tensor>,
    pub second: Vec<Tensor>,
}

impl OptimizerState {
    fn ensure(&mut self, params: &ParamSet, with_first: bool) {
        if self.second.is_empty() {
            self.second = params.tensors().iter().map(|t| Tensor::zeros(t.shape())).collect();
            if with_first {
                self.first = self.second.clone();
            }
        }
    }
}

fn gradients<'a>(params: &ParamSet, grads: &'a GradientMap) -> Result<Vec<&'a Tensor>, NnError> {
    params
        .iter()
        .map(|(name, t)| {
            let g = grads
                .get(name)
                .ok_or_else(|| NnError::MissingGradient(name.to_string()))?;
            if g.shape() != t.shape() {
                return Err(NnError::GradientShape {
                    name: name.to_string(),
                    param: t.shape().to_vec(),
                    grad: g.shape().to_vec(),
                });
            }
            Ok(g)
        })
        .collect()
}

fn sign(direction: Direction) -> f64 {
    match direction {
        Direction::Ascend => -1.0,
        Direction::Descend => 1.0,
    }
}

/// One Adam step with bias correction.
#[allow(clippy::too_many_arguments)]
pub fn adam_step(
    params: &mut ParamSet,
    grads: &GradientMap,
    state: &mut OptimizerState,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    direction: Direction,
) -> Result<(), NnError> {
    let gs = gradients(params, grads)?;
    state.ensure(params, true);
    state.t += 1;
    let c1 = 1.0 - beta1.powi(state.t as i32);
    let c2 = 1.0 - beta2.powi(state.t as i32);
    let s = sign(direction);
    for (i, g) in gs.into_iter().enumerate() {
        let p = params.tensor_mut(i).data_mut();
        let m = state.first[i].data_mut();
        let v = state.second[i].data_mut();
        for j in 0..p.len() {
            let gj = s * g.data()[j];
            m[j] = beta1 * m[j] + (1.0 - beta1) * gj;
            v[j] = beta2 * v[j] + (1.0 - beta2) * gj * gj;
            let mhat = m[j] / c1;
            let vhat = v[j] / c2;
            p[j] -= lr * mhat / (vhat.sqrt() + eps);
        }
    }
    Ok(())
}

/// One RMSprop step.
pub fn rmsprop_step(
    params: &mut ParamSet,
    grads: &GradientMap,
    state: &mut OptimizerState,
    lr: f64,
    decay: f64,
    eps: f64,
    direction: Direction,
) -> Result<(), NnError> {
    let gs = gradients(params, grads)?;
    state.ensure(params, false);
    state.t += 1;
    let s = sign(direction);
    for (i, g) in gs.into_iter().enumerate() {
        let p = params.tensor_mut(i).data_mut();
        let ms = state.second[i].data_mut();
        for j in 0..p.len() {
            let gj = s * g.data()[j];
            ms[j] = decay * ms[j] + (1.0 - decay) * gj * gj;
            p[j] -= lr * gj / (ms[j].sqrt() + eps);
        }
    }
    Ok(())
}

/// An optimizer bound to one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer {
    pub config: OptimizerConfig,
    pub state: OptimizerState,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig) -> Self {
        Self {
            config,
            state: OptimizerState::default(),
        }
    }

    pub fn step(&mut self, params: &mut ParamSet, grads: &GradientMap, direction: Direction) -> Result<(), NnError> {
        match self.config.kind {
            OptimizerKind::Adam { beta1, beta2, eps } => {
                adam_step(params, grads, &mut self.state, self.config.lr, beta1, beta2, eps, direction)
            }
            OptimizerKind::RmsProp { decay, eps } => {
                rmsprop_step(params, grads, &mut self.state, self.config.lr, decay, eps, direction)
            }
        }
    }
}

/// Clamps every parameter element into `[-c, c]`.
pub fn clip_weights(params: &mut ParamSet, c: f64) {
    for i in 0..params.len() {
        for w in params.tensor_mut(i).data_mut() {
            *w = w.max(-c).min(c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_set(v: f64) -> ParamSet {
        let mut p = ParamSet::default();
        p.push("theta", Tensor::scalar(v)).unwrap();
        p
    }

    fn grad(v: f64) -> GradientMap {
        GradientMap::from([("theta".to_string(), Tensor::scalar(v))])
    }

    #[test]
    fn adam_first_step() {
        let mut p = scalar_set(1.0);
        let mut st = OptimizerState::default();
        adam_step(&mut p, &grad(0.4), &mut st, 0.0002, 0.5, 0.999, 1e-8, Direction::Descend).unwrap();
        let expect = 1.0 - 0.0002 * (0.4 / (0.16f64.sqrt() + 1e-8));
        assert!((p.tensors()[0].item() - expect).abs() < 1e-15);
        assert!((p.tensors()[0].item() - 0.9998).abs() < 1e-10);
        assert_eq!(st.t, 1);
    }

    #[test]
    fn adam_zero_gradient_still_counts() {
        let mut p = scalar_set(0.7);
        let mut st = OptimizerState::default();
        adam_step(&mut p, &grad(0.0), &mut st, 0.0002, 0.5, 0.999, 1e-8, Direction::Descend).unwrap();
        assert_eq!(p.tensors()[0].item(), 0.7);
        assert_eq!(st.t, 1);
    }

    #[test]
    fn ascend_equals_descend_of_negated_gradient() {
        for (kind_is_adam, g) in [(true, 0.3), (false, -1.7)] {
            let mut a = scalar_set(0.2);
            let mut b = scalar_set(0.2);
            let cfg = OptimizerConfig {
                kind: if kind_is_adam { OptimizerKind::adam() } else { OptimizerKind::rmsprop() },
                lr: 0.01,
            };
            let mut oa = Optimizer::new(cfg);
            let mut ob = Optimizer::new(cfg);
            for _ in 0..3 {
                oa.step(&mut a, &grad(g), Direction::Ascend).unwrap();
                ob.step(&mut b, &grad(-g), Direction::Descend).unwrap();
            }
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rmsprop_first_step() {
        let mut p = scalar_set(0.0);
        let mut st = OptimizerState::default();
        rmsprop_step(&mut p, &grad(1.0), &mut st, 0.00005, 0.9, 1e-8, Direction::Descend).unwrap();
        let expect = -0.00005 / (0.1f64.sqrt() + 1e-8);
        assert!((p.tensors()[0].item() - expect).abs() < 1e-18);
        assert!((p.tensors()[0].item() + 1.5811e-4).abs() < 1e-8);
    }

    #[test]
    fn rmsprop_zero_gradient_and_symmetry() {
        let mut p = ParamSet::default();
        p.push("a", Tensor::scalar(1.0)).unwrap();
        p.push("b", Tensor::scalar(1.0)).unwrap();
        let mut st = OptimizerState::default();
        let zero = GradientMap::from([
            ("a".to_string(), Tensor::scalar(0.0)),
            ("b".to_string(), Tensor::scalar(0.0)),
        ]);
        rmsprop_step(&mut p, &zero, &mut st, 0.1, 0.9, 1e-8, Direction::Descend).unwrap();
        assert_eq!(p.tensors()[0].item(), 1.0);
        let same = GradientMap::from([
            ("a".to_string(), Tensor::scalar(0.5)),
            ("b".to_string(), Tensor::scalar(0.5)),
        ]);
        rmsprop_step(&mut p, &same, &mut st, 0.1, 0.9, 1e-8, Direction::Descend).unwrap();
        assert_eq!(p.tensors()[0].item(), p.tensors()[1].item());
    }

    #[test]
    fn missing_gradient_is_an_error() {
        let mut p = scalar_set(1.0);
        let mut st = OptimizerState::default();
        let err = adam_step(&mut p, &GradientMap::new(), &mut st, 0.1, 0.5, 0.999, 1e-8, Direction::Ascend);
        assert!(matches!(err, Err(NnError::MissingGradient(n)) if n == "theta"));
    }

    #[test]
    fn clipping_cases() {
        let mut p = ParamSet::default();
        p.push("w", Tensor::vector(vec![0.3, 0.0, -0.5, 0.005]).unwrap()).unwrap();
        clip_weights(&mut p, 0.01);
        assert_eq!(p.tensors()[0].data(), &[0.01, 0.0, -0.01, 0.005]);
    }
}
