use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{GanError, GanVariant};
use crate::nn::{build_mlp, Activation, Layer, Mlp, MlpSpec, ParamSet};
use crate::rng::{derive_seed, Rng};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PriorKind {
    StandardNormal,
    /// Uniform on `(-1, 1)`.
    Uniform,
}

/// The latent noise distribution `p_z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoisePrior {
    pub kind: PriorKind,
    pub dim: usize,
}

impl NoisePrior {
    /// `rows × dim` i.i.d. draws from the stream.
    pub fn sample(&self, rng: &mut Rng, rows: usize) -> Vec<f64> {
        let n = rows * self.dim;
        match self.kind {
            PriorKind::StandardNormal => (0..n).map(|_| StandardNormal.sample(rng)).collect(),
            PriorKind::Uniform => (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        }
    }

    pub fn sample_tensor(&self, rng: &mut Rng, rows: usize) -> Tensor {
        Tensor::from_parts(vec![rows, self.dim], self.sample(rng, rows))
    }
}

/// Hidden-layer layouts for each network. Output layers are fixed by the
/// variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchConfig {
    pub generator_hidden: Vec<Layer>,
    pub generator_output: Activation,
    pub discriminator_hidden: Vec<Layer>,
    pub encoder_hidden: Vec<Layer>,
    pub aux_hidden: Vec<Layer>,
}

impl Default for ArchConfig {
    fn default() -> Self {
        let leaky = Activation::LeakyRelu(0.2);
        let disc = vec![Layer::new(512, leaky), Layer::new(256, leaky)];
        Self {
            generator_hidden: vec![Layer::new(256, leaky), Layer::new(512, leaky)],
            generator_output: Activation::Tanh,
            discriminator_hidden: disc.clone(),
            encoder_hidden: disc.clone(),
            aux_hidden: disc,
        }
    }
}

impl ArchConfig {
    /// Uniform hidden layers for every network.
    pub fn uniform(widths: &[usize], activation: Activation) -> Self {
        let layers: Vec<Layer> = widths.iter().map(|&w| Layer::new(w, activation)).collect();
        Self {
            generator_hidden: layers.clone(),
            generator_output: Activation::Tanh,
            discriminator_hidden: layers.clone(),
            encoder_hidden: layers.clone(),
            aux_hidden: layers,
        }
    }
}

/// Everything needed to materialize a [`ModelBundle`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub variant: GanVariant,
    pub data_dim: usize,
    pub latent: usize,
    /// Number of classes for CGAN / ACGAN.
    pub k_classes: usize,
    /// Category counts of the InfoGAN latent code factors.
    pub code_factors: Vec<usize>,
    pub prior: PriorKind,
    pub arch: ArchConfig,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(variant: GanVariant, data_dim: usize, latent: usize, seed: u64) -> Self {
        Self {
            variant,
            data_dim,
            latent,
            k_classes: 1,
            code_factors: vec![4],
            prior: PriorKind::StandardNormal,
            arch: ArchConfig::default(),
            seed,
        }
    }

    pub fn with_classes(mut self, k: usize) -> Self {
        self.k_classes = k;
        self
    }

    pub fn with_arch(mut self, arch: ArchConfig) -> Self {
        self.arch = arch;
        self
    }

    /// Width of the label one-hot (CGAN/ACGAN) or code one-hots (InfoGAN)
    /// appended to the generator input.
    pub fn condition_width(&self) -> usize {
        match self.variant {
            GanVariant::Cgan | GanVariant::Acgan => self.k_classes,
            GanVariant::InfoGan => self.code_factors.iter().sum(),
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub mlp: Mlp,
    pub params: ParamSet,
}

impl Network {
    pub fn build(spec: &MlpSpec, prefix: &str) -> Result<Self, GanError> {
        let (mlp, params) = build_mlp(spec, prefix)?;
        Ok(Self { mlp, params })
    }

    pub fn predict(&self, x: &Tensor) -> Result<Tensor, GanError> {
        Ok(self.mlp.predict(&self.params, x)?)
    }
}

/// The networks of one GAN variant plus its noise prior.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub spec: ModelSpec,
    pub prior: NoisePrior,
    pub generator: Network,
    /// D, or the critic F for the Wasserstein variants.
    pub discriminator: Network,
    /// E, present for BiGAN only.
    pub encoder: Option<Network>,
    /// Q, present for ACGAN and InfoGAN.
    pub aux_head: Option<Network>,
}

impl ModelBundle {
    pub fn variant(&self) -> GanVariant {
        self.spec.variant
    }

    pub fn data_dim(&self) -> usize {
        self.spec.data_dim
    }

    pub fn latent(&self) -> usize {
        self.spec.latent
    }
}

/// Wires the networks for a variant:
///
/// * CGAN appends the one-hot label to both the generator and discriminator
///   inputs.
/// * ACGAN appends the label to the generator input; a separate head Q
///   classifies samples into `k` classes.
/// * InfoGAN appends the code one-hots to the generator input; Q predicts
///   each code factor.
/// * BiGAN adds an encoder `E: x -> z`; the discriminator scores the pair
///   `(x, z)`.
pub fn build_model(spec: &ModelSpec) -> Result<ModelBundle, GanError> {
    let v = spec.variant;
    if spec.data_dim == 0 {
        return Err(GanError::Config("data_dim must be at least 1".into()));
    }
    if spec.latent == 0 {
        return Err(GanError::Config("latent dimension must be positive".into()));
    }
    if v.is_conditioned() && spec.k_classes < 2 {
        return Err(GanError::Config(format!(
            "{v} needs labelled data with at least 2 classes, got k_classes = {}",
            spec.k_classes
        )));
    }
    if v == GanVariant::InfoGan && (spec.code_factors.is_empty() || spec.code_factors.iter().any(|&k| k < 2)) {
        return Err(GanError::Config(
            "INFOGAN needs at least one code factor with 2 or more categories".into(),
        ));
    }
    let seed = |role: &str| derive_seed(spec.seed, role);
    let arch = &spec.arch;

    let generator = Network::build(
        &MlpSpec::new(
            spec.latent + spec.condition_width(),
            arch.generator_hidden.clone(),
            Layer::new(spec.data_dim, arch.generator_output),
            seed("generator"),
        ),
        "generator",
    )?;

    let disc_in = spec.data_dim
        + match v {
            GanVariant::Cgan => spec.k_classes,
            GanVariant::Bigan => spec.latent,
            _ => 0,
        };
    let discriminator = Network::build(
        &MlpSpec::new(
            disc_in,
            arch.discriminator_hidden.clone(),
            Layer::new(1, v.discriminator_output()),
            seed("discriminator"),
        ),
        "discriminator",
    )?;

    let encoder = if v.has_encoder() {
        Some(Network::build(
            &MlpSpec::new(
                spec.data_dim,
                arch.encoder_hidden.clone(),
                Layer::new(spec.latent, Activation::Linear),
                seed("encoder"),
            ),
            "encoder",
        )?)
    } else {
        None
    };

    let aux_head = match v {
        GanVariant::Acgan | GanVariant::InfoGan => {
            let width = if v == GanVariant::Acgan {
                spec.k_classes
            } else {
                spec.code_factors.iter().sum()
            };
            Some(Network::build(
                &MlpSpec::new(
                    spec.data_dim,
                    arch.aux_hidden.clone(),
                    Layer::new(width, Activation::Linear),
                    seed("aux"),
                ),
                "aux",
            )?)
        }
        _ => None,
    };

    Ok(ModelBundle {
        spec: spec.clone(),
        prior: NoisePrior {
            kind: spec.prior,
            dim: spec.latent,
        },
        generator,
        discriminator,
        encoder,
        aux_head,
    })
}
