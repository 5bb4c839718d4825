use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::losses::{discriminator_objective, generator_objective, Objective, Role};
use super::sampling::{generate, sample_codes, Conditioning};
use super::{FakeBatch, GanError, GanVariant, LossConfig, ModelBundle, Network, RealBatch, TrainConfig};
use crate::metrics::{mmd_squared, KernelSpec};
use crate::nn::{clip_weights, Optimizer, OptimizerConfig};
use crate::rng::{derive_seed, rng, Rng};
use crate::sample::SampleSet;
use crate::tensor::{Tensor, TensorError};

/// One outer iteration of the training loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Discriminator-side objective after the last critic step's forward pass.
    pub d_loss: f64,
    pub g_loss: f64,
    /// Mean D(x) on the last real batch; 0.5 indicates an undecided
    /// discriminator.
    pub d_real_mean: f64,
    /// MMD² between generated and real rows, when a snapshot was taken.
    pub mmd: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
    pub d_updates: usize,
    pub g_updates: usize,
}

impl TrainHistory {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Callback payloads from [`train_observed`].
#[derive(Debug)]
pub enum TrainEvent<'a> {
    /// After a discriminator update (and WGAN clipping).
    DiscriminatorStep {
        epoch: usize,
        step: usize,
        bundle: &'a ModelBundle,
    },
    GeneratorStep {
        epoch: usize,
        bundle: &'a ModelBundle,
    },
    EpochEnd(&'a EpochRecord),
}

fn network_mut(bundle: &mut ModelBundle, role: Role) -> &mut Network {
    match role {
        Role::Generator => &mut bundle.generator,
        Role::Discriminator => &mut bundle.discriminator,
        Role::Encoder => bundle.encoder.as_mut().expect("encoder bound"),
        Role::Aux => bundle.aux_head.as_mut().expect("aux head bound"),
    }
}

/// Separate optimizer state for each (side, network) pair.
struct Optimizers {
    d_config: OptimizerConfig,
    g_config: OptimizerConfig,
    states: BTreeMap<(bool, u8), Optimizer>,
}

impl Optimizers {
    fn get(&mut self, d_side: bool, role: Role) -> &mut Optimizer {
        let cfg = if d_side { self.d_config } else { self.g_config };
        self.states
            .entry((d_side, role as u8))
            .or_insert_with(|| Optimizer::new(cfg))
    }
}

struct Batch {
    real: SampleSet,
    real_x: Tensor,
    z: Tensor,
    labels: Option<Vec<usize>>,
    codes: Option<Vec<usize>>,
}

fn draw_batch(bundle: &ModelBundle, data: &SampleSet, cfg: &TrainConfig, r: &mut Rng) -> Batch {
    let n = data.rows();
    let idx: Vec<usize> = (0..cfg.batch).map(|_| r.random_range(0..n)).collect();
    let real = data.select(&idx);
    let real_x = real.to_tensor().expect("non-empty batch");
    let z = bundle.prior.sample_tensor(r, cfg.batch);
    let v = bundle.variant();
    let labels = v
        .is_conditioned()
        .then(|| (0..cfg.batch).map(|_| r.random_range(0..bundle.spec.k_classes)).collect());
    let codes = (v == GanVariant::InfoGan).then(|| sample_codes(r, &bundle.spec.code_factors, cfg.batch));
    Batch {
        real,
        real_x,
        z,
        labels,
        codes,
    }
}

fn diverged(epoch: usize, reason: String, history: &TrainHistory) -> GanError {
    GanError::Diverged {
        epoch,
        reason,
        history: Box::new(history.clone()),
    }
}

/// Non-finite values anywhere in a loss become a divergence carrying the
/// history so far.
fn or_diverged<T>(r: Result<T, GanError>, epoch: usize, history: &TrainHistory) -> Result<T, GanError> {
    match r {
        Err(GanError::Loss {
            term,
            source: source @ TensorError::NonFinite { .. },
        }) => Err(diverged(epoch, format!("{term}: {source}"), history)),
        Err(GanError::NonFiniteGradientNorm) => Err(diverged(epoch, "gradient-penalty norm".into(), history)),
        Err(GanError::Tensor(e @ TensorError::NonFinite { .. })) => Err(diverged(epoch, e.to_string(), history)),
        other => other,
    }
}

fn apply(
    bundle: &mut ModelBundle,
    mut obj: Objective,
    d_side: bool,
    opts: &mut Optimizers,
    epoch: usize,
    history: &TrainHistory,
) -> Result<f64, GanError> {
    let value = obj.scalar();
    if !value.is_finite() {
        return Err(diverged(epoch, format!("objective value {value}"), history));
    }
    let grads = or_diverged(obj.graph.backward(obj.value).map_err(GanError::from), epoch, history)?;
    for (role, _) in &obj.trainable {
        let opt = opts.get(d_side, *role);
        let net = network_mut(bundle, *role);
        opt.step(&mut net.params, &grads, obj.direction)?;
        if !net.params.all_finite() {
            return Err(diverged(epoch, format!("{role:?} parameters became non-finite"), history));
        }
    }
    Ok(value)
}

fn validate_data(bundle: &ModelBundle, data: &SampleSet, cfg: &TrainConfig) -> Result<(), GanError> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(GanError::EmptyDataset);
    }
    if data.cols() != bundle.data_dim() {
        return Err(GanError::DataWidth {
            expected: bundle.data_dim(),
            got: data.cols(),
        });
    }
    if cfg.latent != bundle.latent() {
        return Err(GanError::Config(format!(
            "config latent {} differs from model latent {}",
            cfg.latent,
            bundle.latent()
        )));
    }
    let v = bundle.variant();
    if v.is_conditioned() {
        let labels = data.labels().ok_or(GanError::MissingLabels(v))?;
        let k = bundle.spec.k_classes;
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(GanError::Label { label: bad, classes: k });
        }
    }
    Ok(())
}

fn snapshot_mmd(bundle: &ModelBundle, data: &SampleSet, seed: u64) -> Option<f64> {
    let n = data.rows().min(500);
    let real = data.select(&(0..n).collect::<Vec<_>>());
    let cond = if bundle.variant().is_conditioned() {
        Conditioning::Labels(real.labels()?.to_vec())
    } else {
        Conditioning::None
    };
    let fake = generate(bundle, n, seed, &cond).ok()?;
    mmd_squared(&fake, &real, &KernelSpec::default()).ok()
}

/// Runs the alternating loop: per epoch, `critic_steps` discriminator
/// updates on fresh noise and resampled real rows, then one generator
/// update. WGAN clips the critic after every critic update.
pub fn train(bundle: &ModelBundle, data: &SampleSet, cfg: &TrainConfig) -> Result<(ModelBundle, TrainHistory), GanError> {
    train_observed(bundle, data, cfg, |_| {})
}

pub fn train_observed(
    bundle: &ModelBundle,
    data: &SampleSet,
    cfg: &TrainConfig,
    mut observer: impl FnMut(TrainEvent),
) -> Result<(ModelBundle, TrainHistory), GanError> {
    validate_data(bundle, data, cfg)?;
    let mut bundle = bundle.clone();
    let mut history = TrainHistory::default();
    if cfg.epochs == 0 {
        return Ok((bundle, history));
    }
    let v = bundle.variant();
    let loss_cfg = LossConfig::from(cfg);
    let mut r = rng(derive_seed(cfg.seed, "train"));
    let mut opts = Optimizers {
        d_config: cfg.opt_d,
        g_config: cfg.opt_g,
        states: BTreeMap::new(),
    };
    let snapshot_seed = derive_seed(cfg.seed, "snapshot");

    for epoch in 0..cfg.epochs {
        let mut d_loss = f64::NAN;
        let mut d_real_mean = f64::NAN;
        for step in 0..cfg.critic_steps {
            let b = draw_batch(&bundle, data, cfg, &mut r);
            let rho: Option<Vec<f64>> =
                (v == GanVariant::WganGp).then(|| (0..cfg.batch).map(|_| r.random::<f64>()).collect());
            let real = RealBatch {
                x: &b.real_x,
                labels: b.real.labels(),
            };
            let fake = FakeBatch {
                z: &b.z,
                labels: b.labels.as_deref(),
                codes: b.codes.as_deref(),
            };
            let obj = or_diverged(
                discriminator_objective(&bundle, &real, &fake, &loss_cfg, rho.as_deref()),
                epoch,
                &history,
            )?;
            if let Some(id) = obj.real_score {
                d_real_mean = obj.graph.value(id).map(Tensor::item).unwrap_or(f64::NAN);
            }
            d_loss = apply(&mut bundle, obj, true, &mut opts, epoch, &history)?;
            if v == GanVariant::Wgan {
                clip_weights(&mut bundle.discriminator.params, cfg.clip);
            }
            history.d_updates += 1;
            observer(TrainEvent::DiscriminatorStep {
                epoch,
                step,
                bundle: &bundle,
            });
        }

        let b = draw_batch(&bundle, data, cfg, &mut r);
        let real = RealBatch {
            x: &b.real_x,
            labels: b.real.labels(),
        };
        let fake = FakeBatch {
            z: &b.z,
            labels: b.labels.as_deref(),
            codes: b.codes.as_deref(),
        };
        let obj = or_diverged(
            generator_objective(&bundle, &fake, Some(&real), &loss_cfg),
            epoch,
            &history,
        )?;
        let g_loss = apply(&mut bundle, obj, false, &mut opts, epoch, &history)?;
        history.g_updates += 1;
        observer(TrainEvent::GeneratorStep { epoch, bundle: &bundle });

        let mmd = (cfg.snapshot_every > 0 && (epoch + 1) % cfg.snapshot_every == 0)
            .then(|| snapshot_mmd(&bundle, data, snapshot_seed))
            .flatten();
        history.records.push(EpochRecord {
            epoch,
            d_loss,
            g_loss,
            d_real_mean,
            mmd,
        });
        observer(TrainEvent::EpochEnd(history.records.last().expect("just pushed")));
    }
    Ok((bundle, history))
}
