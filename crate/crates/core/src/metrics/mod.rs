//! Sample-based distribution dissimilarities: KL, JSD, KDE, exact and
//! critic-estimated Wasserstein-1, kernel MMD, and Q-Q pairs.

mod divergence;
mod emd;
mod kde;
mod mmd;
mod qq;

use thiserror::Error;

pub use divergence::{jsd, kl_divergence, shared_histograms, Histogram};
pub use emd::{critic_emd, emd, wasserstein_1d, CriticConfig, CriticEmd};
pub use kde::{gaussian_kernel, kde, silverman_bandwidth};
pub use mmd::{median_heuristic, mmd_squared, mmd_squared_with, Bandwidth, KernelSpec, MEDIAN_MAX_ROWS};
pub use qq::{qq_points, quantile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("feature counts differ: {x} vs {y}")]
    DimensionMismatch { x: usize, y: usize },
    #[error("exact EMD needs equal sample counts, got {x} and {y}; subsample first")]
    CountMismatch { x: usize, y: usize },
    #[error("empty sample set")]
    Empty,
    #[error("histograms do not share a support")]
    SupportMismatch,
    #[error("q is zero at bin {bin} where p has mass")]
    NotAbsolutelyContinuous { bin: i64 },
    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),
    #[error("all pairwise distances are zero; set the kernel bandwidth explicitly")]
    DegenerateBandwidth,
    #[error("bandwidth must be positive, got {0}")]
    Bandwidth(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("critic training diverged at step {step}")]
    CriticDiverged { step: usize, history: Vec<f64> },
    #[error("critic: {0}")]
    Critic(String),
}
