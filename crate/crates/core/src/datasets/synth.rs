use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::{Dataset, DatasetError};
use crate::rng::rng;
use crate::sample::SampleSet;

/// One diagonal-covariance Gaussian component.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub components: Vec<MixtureComponent>,
}

impl MixtureSpec {
    fn validate(&self) -> Result<usize, DatasetError> {
        let bad = |m: String| Err(DatasetError::Mixture(m));
        let Some(first) = self.components.first() else {
            return bad("no components".into());
        };
        let d = first.mean.len();
        if d == 0 {
            return bad("zero-dimensional component".into());
        }
        let mut total = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            if c.mean.len() != d || c.variance.len() != d {
                return bad(format!("component {i} has inconsistent dimension"));
            }
            if !(c.weight >= 0.0 && c.weight.is_finite()) {
                return bad(format!("component {i} weight {}", c.weight));
            }
            if c.variance.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return bad(format!("component {i} covariance is not positive-definite"));
            }
            if c.mean.iter().any(|m| !m.is_finite()) {
                return bad(format!("component {i} mean is not finite"));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("weights sum to {total}"));
        }
        Ok(d)
    }
}

/// `n` i.i.d. draws; with `labeled`, each row's label is its component
/// index.
pub fn synth_gaussian_mixture(spec: &MixtureSpec, n: usize, seed: u64, labeled: bool) -> Result<Dataset, DatasetError> {
    let d = spec.validate()?;
    if n == 0 {
        return Err(DatasetError::Empty);
    }
    let mut r = rng(seed);
    let mut cum = Vec::with_capacity(spec.components.len());
    let mut acc = 0.0;
    for c in &spec.components {
        acc += c.weight;
        cum.push(acc);
    }
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = r.random();
        let k = cum
            .iter()
            .position(|&c| u < c)
            .unwrap_or_else(|| spec.components.iter().rposition(|c| c.weight > 0.0).expect("positive weight"));
        let c = &spec.components[k];
        for j in 0..d {
            let e: f64 = StandardNormal.sample(&mut r);
            data.push(c.mean[j] + c.variance[j].sqrt() * e);
        }
        labels.push(k);
    }
    let mut set = SampleSet::new(n, d, data)?;
    if labeled {
        set = set.with_labels(labels)?;
    }
    Dataset::from_samples(set)
}
