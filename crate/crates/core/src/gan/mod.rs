//! The eight GAN variants, their objectives, the alternating training loop,
//! sampling and checkpoints.

mod checkpoint;
mod losses;
mod model;
mod sampling;
mod train;
mod variant;

use thiserror::Error;

use crate::nn::NnError;
use crate::sample::SampleError;
use crate::tensor::TensorError;

pub use checkpoint::{read_checkpoint, read_checkpoint_header, write_checkpoint, CheckpointHeader, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use losses::{
    code_entropy, discriminator_loss, discriminator_objective, generator_loss, generator_objective,
    gradient_penalty, info_lower_bound, FakeBatch, LossConfig, Objective, RealBatch, Role,
};
pub use model::{build_model, ArchConfig, ModelBundle, ModelSpec, Network, NoisePrior, PriorKind};
pub use sampling::{encode, generate, generate_from_noise, sample_codes, Conditioning};
pub use train::{train, train_observed, EpochRecord, TrainEvent, TrainHistory};
pub use variant::{GanVariant, TrainConfig};

#[derive(Debug, Error)]
pub enum GanError {
    #[error("unknown GAN variant `{name}`; supported: {supported}")]
    UnknownVariant { name: String, supported: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("loss term `{term}`: {source}")]
    Loss {
        term: &'static str,
        #[source]
        source: TensorError,
    },
    #[error("gradient-penalty norm is not finite")]
    NonFiniteGradientNorm,
    #[error("row {row} of the auxiliary output sums to {sum}, not 1")]
    NotADistribution { row: usize, sum: f64 },
    #[error("label {label} out of range for {classes} classes")]
    Label { label: usize, classes: usize },
    #[error("{0} needs class labels or codes for every row")]
    MissingLabels(GanVariant),
    #[error("batch row counts differ: {real} vs {fake}")]
    BatchMismatch { real: usize, fake: usize },
    #[error("operation not available for {0}")]
    WrongVariant(GanVariant),
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("dataset has {got} columns, model expects {expected}")]
    DataWidth { expected: usize, got: usize },
    #[error("training diverged at epoch {epoch}: {reason}")]
    Diverged {
        epoch: usize,
        reason: String,
        history: Box<TrainHistory>,
    },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
}
