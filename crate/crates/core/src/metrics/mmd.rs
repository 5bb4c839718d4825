use super::MetricError;
use crate::sample::SampleSet;

/// Rows used for the median heuristic; larger pooled samples are strided.
pub const MEDIAN_MAX_ROWS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    /// Median pairwise Euclidean distance of the pooled sample.
    MedianHeuristic,
    /// Silverman's rule (KDE only).
    Silverman,
}

/// Gaussian kernel `k(x, y) = exp(-‖x - y‖² / (2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub bandwidth: Bandwidth,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            bandwidth: Bandwidth::MedianHeuristic,
        }
    }
}

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Self {
        Self {
            bandwidth: Bandwidth::Fixed(sigma),
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Median pairwise distance over the pooled rows of `x` and `y`, using at
/// most [`MEDIAN_MAX_ROWS`] evenly strided rows.
pub fn median_heuristic(x: &SampleSet, y: &SampleSet) -> Result<f64, MetricError> {
    let pooled: Vec<&[f64]> = (0..x.rows()).map(|i| x.row(i)).chain((0..y.rows()).map(|i| y.row(i))).collect();
    let stride = pooled.len().div_ceil(MEDIAN_MAX_ROWS).max(1);
    let rows: Vec<&[f64]> = pooled.into_iter().step_by(stride).collect();
    let mut d = Vec::with_capacity(rows.len() * rows.len().saturating_sub(1) / 2);
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            d.push(sq_dist(rows[i], rows[j]).sqrt());
        }
    }
    if d.is_empty() {
        return Err(MetricError::DegenerateBandwidth);
    }
    let mid = d.len() / 2;
    let (_, m, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    let mut med = *m;
    if d.len() % 2 == 0 {
        let lower = d[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        med = 0.5 * (med + lower);
    }
    if med <= 0.0 {
        return Err(MetricError::DegenerateBandwidth);
    }
    Ok(med)
}

fn resolve(x: &SampleSet, y: &SampleSet, kernel: &KernelSpec) -> Result<f64, MetricError> {
    match kernel.bandwidth {
        Bandwidth::Fixed(s) if s > 0.0 && s.is_finite() => Ok(s),
        Bandwidth::Fixed(s) => Err(MetricError::Bandwidth(s)),
        Bandwidth::MedianHeuristic => median_heuristic(x, y),
        Bandwidth::Silverman => Err(MetricError::InvalidArgument(
            "Silverman bandwidth applies to KDE, not MMD".into(),
        )),
    }
}

fn kernel_sum(a: &SampleSet, b: &SampleSet, gamma: f64, skip_diagonal: bool) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.rows() {
        let ra = a.row(i);
        for j in 0..b.rows() {
            if skip_diagonal && i == j {
                continue;
            }
            acc += (-gamma * sq_dist(ra, b.row(j))).exp();
        }
    }
    acc
}

/// Biased (V-statistic) squared MMD with a Gaussian kernel; never negative.
pub fn mmd_squared(x: &SampleSet, y: &SampleSet, kernel: &KernelSpec) -> Result<f64, MetricError> {
    mmd_squared_with(x, y, kernel, false)
}

/// Squared MMD; `unbiased` selects the U-statistic, which drops the
/// diagonal self-similarity terms and can be negative.
pub fn mmd_squared_with(x: &SampleSet, y: &SampleSet, kernel: &KernelSpec, unbiased: bool) -> Result<f64, MetricError> {
    if x.cols() != y.cols() {
        return Err(MetricError::DimensionMismatch { x: x.cols(), y: y.cols() });
    }
    if x.is_empty() || y.is_empty() {
        return Err(MetricError::Empty);
    }
    let (n, m) = (x.rows() as f64, y.rows() as f64);
    if unbiased && (x.rows() < 2 || y.rows() < 2) {
        return Err(MetricError::InvalidArgument("unbiased MMD needs at least 2 rows per side".into()));
    }
    let sigma = resolve(x, y, kernel)?;
    let gamma = 1.0 / (2.0 * sigma * sigma);
    let xy = kernel_sum(x, y, gamma, false) / (n * m);
    if unbiased {
        let xx = kernel_sum(x, x, gamma, true) / (n * (n - 1.0));
        let yy = kernel_sum(y, y, gamma, true) / (m * (m - 1.0));
        Ok(xx - 2.0 * xy + yy)
    } else {
        let xx = kernel_sum(x, x, gamma, false) / (n * n);
        let yy = kernel_sum(y, y, gamma, false) / (m * m);
        Ok((xx - 2.0 * xy + yy).max(0.0))
    }
}
