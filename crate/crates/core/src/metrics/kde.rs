use super::{Bandwidth, MetricError};
use crate::sample::SampleSet;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn gaussian_kernel(u: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * u * u).exp()
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn iqr(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    super::quantile(&s, 0.75) - super::quantile(&s, 0.25)
}

/// Per-dimension Silverman bandwidths. One dimension uses
/// `0.9 · min(σ, IQR/1.34) · n^(-1/5)`; `d > 1` uses
/// `(4/(d+2))^(1/(d+4)) · σ_j · n^(-1/(d+4))`.
pub fn silverman_bandwidth(samples: &SampleSet) -> Result<Vec<f64>, MetricError> {
    let n = samples.rows();
    if n < 2 {
        return Err(MetricError::InvalidArgument(
            "automatic bandwidth needs at least 2 samples".into(),
        ));
    }
    let d = samples.cols();
    let nf = n as f64;
    (0..d)
        .map(|j| {
            let col = samples.column(j);
            let sd = std_dev(&col);
            let h = if d == 1 {
                let spread = iqr(&col) / 1.34;
                let s = if spread > 0.0 { sd.min(spread) } else { sd };
                0.9 * s * nf.powf(-0.2)
            } else {
                let df = d as f64;
                (4.0 / (df + 2.0)).powf(1.0 / (df + 4.0)) * sd * nf.powf(-1.0 / (df + 4.0))
            };
            if h > 0.0 && h.is_finite() {
                Ok(h)
            } else {
                Err(MetricError::Bandwidth(h))
            }
        })
        .collect()
}

/// Product-Gaussian kernel density estimate
/// `p̂(x) = 1/(n Π h_j) Σ_i Π_j K((x_j - x_ij)/h_j)`, evaluated at each row
/// of `points`. A fixed bandwidth applies to every dimension.
pub fn kde(samples: &SampleSet, bandwidth: Bandwidth, points: &SampleSet) -> Result<Vec<f64>, MetricError> {
    if samples.is_empty() {
        return Err(MetricError::Empty);
    }
    if samples.cols() != points.cols() {
        return Err(MetricError::DimensionMismatch {
            x: samples.cols(),
            y: points.cols(),
        });
    }
    let d = samples.cols();
    let h = match bandwidth {
        Bandwidth::Fixed(h) if h > 0.0 && h.is_finite() => vec![h; d],
        Bandwidth::Fixed(h) => return Err(MetricError::Bandwidth(h)),
        Bandwidth::Silverman => silverman_bandwidth(samples)?,
        Bandwidth::MedianHeuristic => {
            return Err(MetricError::InvalidArgument(
                "KDE uses a fixed or Silverman bandwidth".into(),
            ))
        }
    };
    let norm = 1.0 / (samples.rows() as f64 * h.iter().product::<f64>());
    Ok((0..points.rows())
        .map(|p| {
            let x = points.row(p);
            let s: f64 = (0..samples.rows())
                .map(|i| {
                    samples
                        .row(i)
                        .iter()
                        .zip(x)
                        .zip(&h)
                        .map(|((xi, xj), hj)| gaussian_kernel((xj - xi) / hj))
                        .product::<f64>()
                })
                .sum();
            s * norm
        })
        .collect())
}
