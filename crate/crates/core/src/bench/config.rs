//! Experiment configuration files.
//!
//! Grammar: one `key = value` per line; `#` starts a comment; blank lines
//! are ignored; keys are dotted paths. Recognized keys:
//!
//! ```text
//! seed = 42                          master seed
//! variants = VANILLA, WGAN           comma-separated, required
//!
//! dataset.<id>.kind = csv | kdd99 | tensor | mixture
//! dataset.<id>.path = data/rssi.csv  csv / kdd99 / tensor
//! dataset.<id>.header = auto | yes | no
//! dataset.<id>.label = <column>      csv: class-label column
//! dataset.<id>.decimate = 1          keep every k-th feature
//! dataset.<id>.rows = 2000           mixture
//! dataset.<id>.weights = 0.5 0.5     mixture, one per component
//! dataset.<id>.means = 0 0; 4 4      mixture, components split by `;`
//! dataset.<id>.variances = 1 1; 1 1  mixture, diagonal covariances
//! dataset.<id>.labeled = false       mixture
//!
//! train.<field> = …                  all variants
//! train.<VARIANT>.<field> = …        one variant; fields: epochs,
//!     critic_steps, batch, latent, lr, lr_g, lr_d, clip, lambda_gp,
//!     lambda_info, non_saturating, snapshot_every
//!
//! model.hidden = 64 64               every network
//! model.generator_hidden / model.discriminator_hidden = widths
//! model.activation = leaky_relu | relu | tanh | sigmoid
//! model.prior = normal | uniform
//! model.code_factors = 4             InfoGAN categorical code sizes
//!
//! metrics.scoring_rows = 2000        generated rows scored, capped at n
//! metrics.space = raw | normalized
//! metrics.bandwidth = median | <sigma>
//! metrics.unbiased = false
//! metrics.histogram_bins = 20        KL / JSD
//! metrics.critic_emd = false
//! metrics.critic_steps = 200
//! metrics.qq_points = 99
//! metrics.kde_points = 200
//! metrics.plot_column = <name>       default: `count` if present, else first
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::BenchError;
use crate::datasets::{HeaderMode, MixtureComponent, MixtureSpec};
use crate::gan::{ArchConfig, GanVariant, PriorKind, TrainConfig};
use crate::metrics::Bandwidth;
use crate::nn::{Activation, Layer, OptimizerKind};

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Csv { path: PathBuf, header: HeaderMode, label: Option<String> },
    Kdd99 { path: PathBuf, header: HeaderMode },
    Tensor { path: PathBuf },
    Mixture { spec: MixtureSpec, rows: usize, labeled: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub id: String,
    pub source: DatasetSource,
    pub decimate: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSettings {
    pub scoring_rows: usize,
    pub raw_space: bool,
    pub bandwidth: Bandwidth,
    pub unbiased: bool,
    pub histogram_bins: usize,
    pub critic_emd: bool,
    pub critic_steps: usize,
    pub qq_points: usize,
    pub kde_points: usize,
    pub plot_column: Option<String>,
}

impl Default for MetricSettings {
    fn default() -> Self {
        Self {
            scoring_rows: 2000,
            raw_space: true,
            bandwidth: Bandwidth::MedianHeuristic,
            unbiased: false,
            histogram_bins: 20,
            critic_emd: false,
            critic_steps: 200,
            qq_points: 99,
            kde_points: 200,
            plot_column: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSettings {
    pub arch: ArchConfig,
    pub prior: PriorKind,
    pub code_factors: Vec<usize>,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            arch: ArchConfig::default(),
            prior: PriorKind::StandardNormal,
            code_factors: vec![4],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub variants: Vec<GanVariant>,
    pub datasets: Vec<DatasetConfig>,
    pub model: ModelSettings,
    pub metrics: MetricSettings,
    /// `train.*` entries, resolved per variant by [`Self::train_config`].
    train_overrides: BTreeMap<String, String>,
    /// Every key-value pair, for hashing.
    entries: BTreeMap<String, String>,
}

/// Parses the `key = value` grammar into an ordered map, rejecting
/// duplicate keys.
pub fn parse_entries(text: &str) -> Result<Vec<(usize, String, String)>, BenchError> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| BenchError::Config {
            line,
            message: format!("expected `key = value`, found `{content}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.split('.').any(str::is_empty) {
            return Err(BenchError::Config {
                line,
                message: format!("malformed key `{k}`"),
            });
        }
        if out.iter().any(|(_, prev, _)| prev == k) {
            return Err(BenchError::Config {
                line,
                message: format!("duplicate key `{k}`"),
            });
        }
        out.push((line, k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn err(line: usize, message: impl Into<String>) -> BenchError {
    BenchError::Config {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, BenchError> {
    v.parse().map_err(|_| err(line, format!("`{key}`: cannot parse `{v}`")))
}

fn boolean(line: usize, key: &str, v: &str) -> Result<bool, BenchError> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(err(line, format!("`{key}`: expected true/false, got `{v}`"))),
    }
}

fn floats(line: usize, key: &str, v: &str) -> Result<Vec<f64>, BenchError> {
    v.split_whitespace().map(|t| num(line, key, t)).collect()
}

fn widths(line: usize, key: &str, v: &str) -> Result<Vec<usize>, BenchError> {
    let w: Vec<usize> = v
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| num(line, key, t))
        .collect::<Result<_, _>>()?;
    if w.contains(&0) {
        return Err(err(line, format!("`{key}`: widths must be positive")));
    }
    Ok(w)
}

fn header_mode(line: usize, v: &str) -> Result<HeaderMode, BenchError> {
    match v {
        "auto" => Ok(HeaderMode::Auto),
        "yes" | "true" => Ok(HeaderMode::Present),
        "no" | "false" => Ok(HeaderMode::Absent),
        _ => Err(err(line, format!("header must be auto, yes or no, got `{v}`"))),
    }
}

const TRAIN_FIELDS: [&str; 12] = [
    "epochs",
    "critic_steps",
    "batch",
    "latent",
    "lr",
    "lr_g",
    "lr_d",
    "clip",
    "lambda_gp",
    "lambda_info",
    "non_saturating",
    "snapshot_every",
];

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses config text; relative dataset paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, BenchError> {
        let entries = parse_entries(text)?;
        let mut seed = 0u64;
        let mut variants: Option<Vec<GanVariant>> = None;
        let mut ds_keys: Vec<(String, BTreeMap<String, (usize, String)>)> = Vec::new();
        let mut model = ModelSettings::default();
        let mut activation = Activation::LeakyRelu(0.2);
        let mut g_hidden: Option<Vec<usize>> = None;
        let mut d_hidden: Option<Vec<usize>> = None;
        let mut metrics = MetricSettings::default();
        let mut train_overrides = BTreeMap::new();

        for (line, key, v) in &entries {
            let (line, v) = (*line, v.as_str());
            let parts: Vec<&str> = key.split('.').collect();
            match parts.as_slice() {
                ["seed"] => seed = num(line, key, v)?,
                ["variants"] => {
                    let list = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse::<GanVariant>().map_err(BenchError::from))
                        .collect::<Result<Vec<_>, _>>()?;
                    variants = Some(list);
                }
                ["dataset", id, field] => {
                    if !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                        return Err(err(line, format!("dataset id `{id}` must be alphanumeric, `_` or `-`")));
                    }
                    let slot = match ds_keys.iter().position(|(d, _)| d == id) {
                        Some(i) => i,
                        None => {
                            ds_keys.push((id.to_string(), BTreeMap::new()));
                            ds_keys.len() - 1
                        }
                    };
                    ds_keys[slot].1.insert(field.to_string(), (line, v.to_string()));
                }
                ["train", field] if TRAIN_FIELDS.contains(field) => {
                    train_overrides.insert(key.clone(), v.to_string());
                }
                ["train", variant, field] if TRAIN_FIELDS.contains(field) => {
                    let canon = variant.parse::<GanVariant>()?;
                    train_overrides.insert(format!("train.{}.{field}", canon.name()), v.to_string());
                }
                ["model", "hidden"] => {
                    let w = widths(line, key, v)?;
                    g_hidden = Some(w.clone());
                    d_hidden = Some(w);
                }
                ["model", "generator_hidden"] => g_hidden = Some(widths(line, key, v)?),
                ["model", "discriminator_hidden"] => d_hidden = Some(widths(line, key, v)?),
                ["model", "activation"] => {
                    activation = match v {
                        "leaky_relu" => Activation::LeakyRelu(0.2),
                        "relu" => Activation::Relu,
                        "tanh" => Activation::Tanh,
                        "sigmoid" => Activation::Sigmoid,
                        _ => return Err(err(line, format!("unknown activation `{v}`"))),
                    }
                }
                ["model", "prior"] => {
                    model.prior = match v {
                        "normal" => PriorKind::StandardNormal,
                        "uniform" => PriorKind::Uniform,
                        _ => return Err(err(line, format!("prior must be normal or uniform, got `{v}`"))),
                    }
                }
                ["model", "code_factors"] => model.code_factors = widths(line, key, v)?,
                ["metrics", "scoring_rows"] => metrics.scoring_rows = num(line, key, v)?,
                ["metrics", "space"] => {
                    metrics.raw_space = match v {
                        "raw" => true,
                        "normalized" => false,
                        _ => return Err(err(line, format!("space must be raw or normalized, got `{v}`"))),
                    }
                }
                ["metrics", "bandwidth"] => {
                    metrics.bandwidth = if v == "median" {
                        Bandwidth::MedianHeuristic
                    } else {
                        let s: f64 = num(line, key, v)?;
                        if !(s > 0.0) {
                            return Err(err(line, "bandwidth must be positive"));
                        }
                        Bandwidth::Fixed(s)
                    }
                }
                ["metrics", "unbiased"] => metrics.unbiased = boolean(line, key, v)?,
                ["metrics", "histogram_bins"] => metrics.histogram_bins = num(line, key, v)?,
                ["metrics", "critic_emd"] => metrics.critic_emd = boolean(line, key, v)?,
                ["metrics", "critic_steps"] => metrics.critic_steps = num(line, key, v)?,
                ["metrics", "qq_points"] => metrics.qq_points = num(line, key, v)?,
                ["metrics", "kde_points"] => metrics.kde_points = num(line, key, v)?,
                ["metrics", "plot_column"] => metrics.plot_column = Some(v.to_string()),
                _ => return Err(err(line, format!("unknown key `{key}`"))),
            }
        }

        let variants = variants
            .filter(|v| !v.is_empty())
            .ok_or_else(|| err(0, "`variants` must list at least one variant"))?;
        if ds_keys.is_empty() {
            return Err(err(0, "no `dataset.<id>.*` entries"));
        }
        if metrics.scoring_rows < 2 || metrics.qq_points < 2 || metrics.kde_points < 2 || metrics.histogram_bins == 0 {
            return Err(err(0, "metrics.scoring_rows, qq_points and kde_points must be at least 2, histogram_bins at least 1"));
        }
        let layers = |w: &[usize]| w.iter().map(|&n| Layer::new(n, activation)).collect::<Vec<_>>();
        if let Some(g) = g_hidden {
            model.arch.generator_hidden = layers(&g);
        }
        if let Some(d) = d_hidden {
            model.arch.discriminator_hidden = layers(&d);
            model.arch.encoder_hidden = layers(&d);
            model.arch.aux_hidden = layers(&d);
        }
        let datasets = ds_keys
            .into_iter()
            .map(|(id, f)| dataset_config(id, f, base))
            .collect::<Result<Vec<_>, _>>()?;

        let cfg = Self {
            seed,
            variants,
            datasets,
            model,
            metrics,
            train_overrides,
            entries: entries.into_iter().map(|(_, k, v)| (k, v)).collect(),
        };
        for v in cfg.variants.clone() {
            cfg.train_config(v)?.validate().map_err(|e| err(0, format!("{v}: {e}")))?;
        }
        Ok(cfg)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.entries.insert("seed".into(), seed.to_string());
    }

    /// SHA-256 over the sorted effective key-value pairs.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.entries {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    /// Per-variant defaults with `train.*` then `train.<VARIANT>.*`
    /// overrides applied. The seed is filled in by the runner.
    pub fn train_config(&self, v: GanVariant) -> Result<TrainConfig, BenchError> {
        let mut c = TrainConfig::for_variant(v);
        for scope in [String::from("train."), format!("train.{}.", v.name())] {
            for field in TRAIN_FIELDS {
                let Some(val) = self.train_overrides.get(&format!("{scope}{field}")) else {
                    continue;
                };
                let key = format!("{scope}{field}");
                match field {
                    "epochs" => c.epochs = num(0, &key, val)?,
                    "critic_steps" => c.critic_steps = num(0, &key, val)?,
                    "batch" => c.batch = num(0, &key, val)?,
                    "latent" => c.latent = num(0, &key, val)?,
                    "lr" => {
                        let lr = num(0, &key, val)?;
                        c.opt_g.lr = lr;
                        c.opt_d.lr = lr;
                    }
                    "lr_g" => c.opt_g.lr = num(0, &key, val)?,
                    "lr_d" => c.opt_d.lr = num(0, &key, val)?,
                    "clip" => c.clip = num(0, &key, val)?,
                    "lambda_gp" => c.lambda_gp = num(0, &key, val)?,
                    "lambda_info" => c.lambda_info = num(0, &key, val)?,
                    "non_saturating" => c.non_saturating = boolean(0, &key, val)?,
                    "snapshot_every" => c.snapshot_every = num(0, &key, val)?,
                    _ => unreachable!("field list"),
                }
            }
        }
        Ok(c)
    }

    /// Optimizer name for provenance.
    pub fn optimizer_name(c: &TrainConfig) -> &'static str {
        match c.opt_d.kind {
            OptimizerKind::Adam { .. } => "adam",
            OptimizerKind::RmsProp { .. } => "rmsprop",
        }
    }
}

fn dataset_config(
    id: String,
    f: BTreeMap<String, (usize, String)>,
    base: &Path,
) -> Result<DatasetConfig, BenchError> {
    let get = |k: &str| f.get(k).map(|(l, v)| (*l, v.as_str()));
    let known = ["kind", "path", "header", "label", "decimate", "rows", "weights", "means", "variances", "labeled"];
    if let Some((k, (l, _))) = f.iter().find(|(k, _)| !known.contains(&k.as_str())) {
        return Err(err(*l, format!("unknown key `dataset.{id}.{k}`")));
    }
    let (kline, kind) = get("kind").ok_or_else(|| err(0, format!("dataset `{id}` has no kind")))?;
    let path = || -> Result<PathBuf, BenchError> {
        let (_, p) = get("path").ok_or_else(|| err(kline, format!("dataset `{id}` needs a path")))?;
        let p = PathBuf::from(p);
        Ok(if p.is_absolute() { p } else { base.join(p) })
    };
    let header = match get("header") {
        Some((l, v)) => header_mode(l, v)?,
        None => HeaderMode::Auto,
    };
    let source = match kind {
        "csv" => DatasetSource::Csv {
            path: path()?,
            header,
            label: get("label").map(|(_, v)| v.to_string()),
        },
        "kdd99" => DatasetSource::Kdd99 { path: path()?, header },
        "tensor" => DatasetSource::Tensor { path: path()? },
        "mixture" => {
            let (rl, rows) = get("rows").ok_or_else(|| err(kline, format!("mixture `{id}` needs rows")))?;
            let rows: usize = num(rl, "rows", rows)?;
            let (ml, means) = get("means").ok_or_else(|| err(kline, format!("mixture `{id}` needs means")))?;
            let means: Vec<Vec<f64>> = means
                .split(';')
                .map(|c| floats(ml, "means", c))
                .collect::<Result<_, _>>()?;
            let k = means.len();
            let variances: Vec<Vec<f64>> = match get("variances") {
                Some((l, v)) => v.split(';').map(|c| floats(l, "variances", c)).collect::<Result<_, _>>()?,
                None => means.iter().map(|m| vec![1.0; m.len()]).collect(),
            };
            let weights = match get("weights") {
                Some((l, v)) => floats(l, "weights", v)?,
                None => vec![1.0 / k as f64; k],
            };
            if variances.len() != k || weights.len() != k {
                return Err(err(ml, format!("mixture `{id}`: means, variances and weights disagree on component count")));
            }
            let labeled = match get("labeled") {
                Some((l, v)) => boolean(l, "labeled", v)?,
                None => false,
            };
            let components = means
                .into_iter()
                .zip(variances)
                .zip(weights)
                .map(|((mean, variance), weight)| MixtureComponent { weight, mean, variance })
                .collect();
            DatasetSource::Mixture {
                spec: MixtureSpec { components },
                rows,
                labeled,
            }
        }
        other => return Err(err(kline, format!("unknown dataset kind `{other}`"))),
    };
    let decimate = match get("decimate") {
        Some((l, v)) => num(l, "decimate", v)?,
        None => 1,
    };
    if decimate == 0 {
        return Err(err(0, format!("dataset `{id}`: decimate must be positive")));
    }
    Ok(DatasetConfig { id, source, decimate })
}
