use rand::Rng as _;

use super::MetricError;
use crate::nn::{build_mlp, clip_weights, Activation, Direction, Layer, MlpSpec, Optimizer, OptimizerConfig, OptimizerKind};
use crate::rng::rng;
use crate::sample::SampleSet;
use crate::tensor::{ExprGraph, Tensor};

/// Exact 1-D Wasserstein-1 distance between equal-size samples: the mean
/// absolute difference of sorted values.
pub fn wasserstein_1d(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::CountMismatch { x: x.len(), y: y.len() });
    }
    if x.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut a = x.to_vec();
    let mut b = y.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Ok(a.iter().zip(&b).map(|(u, v)| (u - v).abs()).sum::<f64>() / a.len() as f64)
}

/// Mean over feature dimensions of the exact 1-D Wasserstein-1 distances.
pub fn emd(x: &SampleSet, y: &SampleSet) -> Result<f64, MetricError> {
    if x.cols() != y.cols() {
        return Err(MetricError::DimensionMismatch { x: x.cols(), y: y.cols() });
    }
    if x.rows() != y.rows() {
        return Err(MetricError::CountMismatch { x: x.rows(), y: y.rows() });
    }
    let mut total = 0.0;
    for j in 0..x.cols() {
        total += wasserstein_1d(&x.column(j), &y.column(j))?;
    }
    Ok(total / x.cols() as f64)
}

/// Settings of the weight-clipped critic used by [`critic_emd`].
#[derive(Debug, Clone, PartialEq)]
pub struct CriticConfig {
    pub hidden: Vec<usize>,
    pub clip: f64,
    pub steps: usize,
    pub lr: f64,
    pub batch: usize,
    pub seed: u64,
}

impl Default for CriticConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            clip: 0.05,
            steps: 200,
            lr: 0.005,
            batch: 256,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticEmd {
    /// `mean F̂(x) - mean F̂(y)` over the full sets after training.
    pub value: f64,
    /// Minibatch objective per training step.
    pub history: Vec<f64>,
}

/// Estimates Wasserstein-1 by training a weight-clipped MLP critic with
/// RMSprop to maximize `mean F̂(x) - mean F̂(y)`. The clipped critic is a
/// restricted Lipschitz family, so the estimate sits below the exact value.
pub fn critic_emd(x: &SampleSet, y: &SampleSet, cfg: &CriticConfig) -> Result<CriticEmd, MetricError> {
    if x.cols() != y.cols() {
        return Err(MetricError::DimensionMismatch { x: x.cols(), y: y.cols() });
    }
    if x.is_empty() || y.is_empty() {
        return Err(MetricError::Empty);
    }
    if !(cfg.clip > 0.0 && cfg.lr > 0.0) || cfg.batch == 0 {
        return Err(MetricError::InvalidArgument("critic clip, lr and batch must be positive".into()));
    }
    let hidden = cfg.hidden.iter().map(|&w| Layer::new(w, Activation::LeakyRelu(0.2))).collect();
    let spec = MlpSpec::new(x.cols(), hidden, Layer::new(1, Activation::Linear), cfg.seed);
    let (mlp, mut params) = build_mlp(&spec, "critic").map_err(|e| MetricError::Critic(e.to_string()))?;
    clip_weights(&mut params, cfg.clip);
    let mut opt = Optimizer::new(OptimizerConfig {
        kind: OptimizerKind::rmsprop(),
        lr: cfg.lr,
    });
    let mut r = rng(cfg.seed);
    let mut history = Vec::with_capacity(cfg.steps);
    let batch_of = |s: &SampleSet, r: &mut crate::rng::Rng| {
        let idx: Vec<usize> = (0..cfg.batch.min(s.rows())).map(|_| r.random_range(0..s.rows())).collect();
        s.select(&idx).to_tensor().expect("non-empty")
    };
    for step in 0..cfg.steps {
        let xb = batch_of(x, &mut r);
        let yb = batch_of(y, &mut r);
        let mut g = ExprGraph::new();
        let nodes = params.bind(&mut g);
        let result = (|| {
            let xi = g.input("x", xb);
            let yi = g.input("y", yb);
            let fx = mlp.forward(&mut g, xi, &nodes)?;
            let fy = mlp.forward(&mut g, yi, &nodes)?;
            let mx = g.mean(fx)?;
            let my = g.mean(fy)?;
            let obj = g.sub(mx, my)?;
            let value = g.value(obj)?.item();
            let grads = g.backward(obj)?;
            Ok::<_, crate::tensor::TensorError>((value, grads))
        })();
        let (value, grads) = match result {
            Ok(v) => v,
            Err(_) => return Err(MetricError::CriticDiverged { step, history }),
        };
        history.push(value);
        opt.step(&mut params, &grads, Direction::Ascend)
            .map_err(|e| MetricError::Critic(e.to_string()))?;
        clip_weights(&mut params, cfg.clip);
        if !params.all_finite() {
            return Err(MetricError::CriticDiverged { step, history });
        }
    }
    let mean_score = |s: &SampleSet| -> Result<f64, MetricError> {
        let t: Tensor = mlp
            .predict(&params, &s.to_tensor().expect("non-empty"))
            .map_err(|e| MetricError::Critic(e.to_string()))?;
        Ok(t.data().iter().sum::<f64>() / t.numel() as f64)
    };
    let value = mean_score(x)? - mean_score(y)?;
    if !value.is_finite() {
        return Err(MetricError::CriticDiverged {
            step: cfg.steps,
            history,
        });
    }
    Ok(CriticEmd { value, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_by_one() {
        assert_eq!(wasserstein_1d(&[0.0, 1.0], &[1.0, 2.0]).unwrap(), 1.0);
        let x = SampleSet::from_column(&[0.0, 1.0]).unwrap();
        assert_eq!(emd(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn averages_dimensions() {
        let x = SampleSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let y = SampleSet::from_rows(&[vec![1.0, 3.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(emd(&x, &y).unwrap(), 2.0);
    }

    #[test]
    fn unequal_counts_rejected() {
        let x = SampleSet::from_column(&[0.0, 1.0]).unwrap();
        let y = SampleSet::from_column(&[0.0]).unwrap();
        assert_eq!(emd(&x, &y), Err(MetricError::CountMismatch { x: 2, y: 1 }));
    }

    #[test]
    fn critic_on_identical_sets_is_zero() {
        let x = SampleSet::from_column(&[0.1, -0.3, 0.8, 1.2]).unwrap();
        let cfg = CriticConfig {
            steps: 20,
            ..CriticConfig::default()
        };
        let r = critic_emd(&x, &x, &cfg).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r, critic_emd(&x, &x, &cfg).unwrap());
    }
}
