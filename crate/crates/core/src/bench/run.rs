use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::seq::index::sample as sample_indices;
use sha2::{Digest, Sha256};

use super::config::{DatasetConfig, DatasetSource, ExperimentConfig};
use super::plots::{kde_series, qq_series, write_plot, PlotSeries};
use super::report::{write_report, MetricReport, Provenance, ReportRow, RowStatus};
use super::BenchError;
use crate::datasets::{
    flatten, kdd99_schema, load_tabular, normalize, preprocess_kdd99, read_tensor_file, synth_gaussian_mixture, Dataset,
    DatasetError, NormState, TabularOptions,
};
use crate::gan::{
    build_model, generate_from_noise, train, write_checkpoint, Conditioning, GanError, GanVariant, ModelBundle,
    ModelSpec, NoisePrior, TrainConfig, TrainHistory,
};
use crate::metrics::{critic_emd, emd, jsd, kl_divergence, mmd_squared_with, shared_histograms, CriticConfig, KernelSpec};
use crate::rng::{derive_seed, rng};
use crate::sample::SampleSet;

pub struct TrainedModel {
    pub dataset: String,
    pub variant: GanVariant,
    pub bundle: ModelBundle,
    pub train: TrainConfig,
}

pub struct ExperimentOutput {
    pub report: MetricReport,
    pub plots: Vec<PlotSeries>,
    pub models: Vec<TrainedModel>,
}

/// A loaded dataset with everything its cells share.
struct Prepared {
    id: String,
    shape: Vec<usize>,
    train_data: SampleSet,
    norm: NormState,
    /// Real rows scored against, in scoring space, with labels if any.
    real_score: SampleSet,
    k_classes: usize,
    plot_col: usize,
    plot_name: String,
}

struct CellOut {
    row: ReportRow,
    plot_values: Option<Vec<f64>>,
    history: Option<TrainHistory>,
    model: Option<TrainedModel>,
}

fn load(cfg: &ExperimentConfig, dc: &DatasetConfig) -> Result<Dataset, DatasetError> {
    match &dc.source {
        DatasetSource::Csv { path, header, label } => load_tabular(
            path,
            &TabularOptions {
                header: *header,
                schema: None,
                label_column: label.clone(),
            },
        )?
        .continuous(),
        DatasetSource::Kdd99 { path, header } => {
            let text = std::fs::read_to_string(path).map_err(|e| DatasetError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            let fields = text.lines().find(|l| !l.trim().is_empty()).map_or(0, |l| l.split(',').count());
            let with_label = fields == 42;
            let raw = crate::datasets::parse_tabular(
                &text,
                &TabularOptions {
                    header: *header,
                    schema: Some(kdd99_schema(with_label)),
                    label_column: with_label.then(|| "label".to_string()),
                },
            )?;
            preprocess_kdd99(&raw)
        }
        DatasetSource::Tensor { path } => flatten(&read_tensor_file(path)?),
        DatasetSource::Mixture { spec, rows, labeled } => {
            synth_gaussian_mixture(spec, *rows, derive_seed(cfg.seed, &format!("data:{}", dc.id)), *labeled)
        }
    }
}

fn prepare(cfg: &ExperimentConfig, dc: &DatasetConfig, notes: &mut Vec<String>) -> Result<Prepared, DatasetError> {
    let ds = load(cfg, dc)?.decimate(dc.decimate)?;
    notes.extend(ds.notes.iter().map(|n| format!("{}: {n}", dc.id)));
    let (normed, norm) = normalize(&ds)?;
    let n = ds.rows();
    let m = cfg.metrics.scoring_rows.min(n);
    let mut idx = sample_indices(&mut rng(derive_seed(cfg.seed, &format!("score-rows:{}", dc.id))), n, m).into_vec();
    idx.sort_unstable();
    let real_score = if cfg.metrics.raw_space { &ds.data } else { &normed.data }.select(&idx);
    let names = ds.column_names();
    let plot_col = match &cfg.metrics.plot_column {
        Some(c) => names.iter().position(|n| n == c),
        None => names.iter().position(|n| n == "count"),
    }
    .unwrap_or(0);
    Ok(Prepared {
        id: dc.id.clone(),
        shape: ds.shape().to_vec(),
        k_classes: ds.data.labels().map_or(1, |l| l.iter().max().map_or(1, |m| m + 1)),
        train_data: normed.data,
        norm,
        real_score,
        plot_name: names[plot_col].clone(),
        plot_col,
    })
}

/// Scoring noise for one dataset: the same stream for every variant with
/// the same latent width.
fn scoring_noise(cfg: &ExperimentConfig, id: &str, latent: usize, rows: usize) -> crate::tensor::Tensor {
    let prior = NoisePrior {
        kind: cfg.model.prior,
        dim: latent,
    };
    prior.sample_tensor(&mut rng(derive_seed(cfg.seed, &format!("score:{id}"))), rows)
}

fn hash_tensor(t: &crate::tensor::Tensor) -> String {
    let mut h = Sha256::new();
    for v in t.data() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn mean_over_columns(
    real: &SampleSet,
    fake: &SampleSet,
    bins: usize,
) -> (Option<f64>, Option<f64>) {
    let (mut kl, mut js) = (Some(0.0), Some(0.0));
    for j in 0..real.cols() {
        let Ok((p, q)) = shared_histograms(&real.column(j), &fake.column(j), bins) else {
            return (None, None);
        };
        kl = kl.zip(kl_divergence(&p, &q).ok()).map(|(a, b)| a + b);
        js = js.zip(jsd(&p, &q).ok()).map(|(a, b)| a + b);
    }
    let d = real.cols() as f64;
    (kl.map(|v| v / d), js.map(|v| v / d))
}

fn run_cell(cfg: &ExperimentConfig, p: &Prepared, v: GanVariant) -> CellOut {
    let fail = |e: &dyn std::fmt::Display, history: Option<TrainHistory>| CellOut {
        row: ReportRow::failed(&p.id, p.shape.clone(), v.name(), e),
        plot_values: None,
        history,
        model: None,
    };
    let tag = format!("{}:{}", p.id, v.name());
    let mut tc = match cfg.train_config(v) {
        Ok(tc) => tc,
        Err(e) => return fail(&e, None),
    };
    tc.seed = derive_seed(cfg.seed, &format!("train:{tag}"));
    let mut spec = ModelSpec::new(v, p.train_data.cols(), tc.latent, derive_seed(cfg.seed, &format!("model:{tag}")))
        .with_classes(p.k_classes)
        .with_arch(cfg.model.arch.clone());
    spec.prior = cfg.model.prior;
    spec.code_factors = cfg.model.code_factors.clone();

    let result = (|| -> Result<(ModelBundle, TrainHistory), GanError> {
        let bundle = build_model(&spec)?;
        train(&bundle, &p.train_data, &tc)
    })();
    let (bundle, history) = match result {
        Ok(r) => r,
        Err(GanError::Diverged { epoch, reason, history }) => {
            return fail(&format!("training diverged at epoch {epoch}: {reason}"), Some(*history))
        }
        Err(e) => return fail(&e, None),
    };

    let m = p.real_score.rows();
    let z = scoring_noise(cfg, &p.id, tc.latent, m);
    let noise_sha256 = hash_tensor(&z);
    let cond = if v.is_conditioned() {
        match p.real_score.labels() {
            Some(l) => Conditioning::Labels(l.to_vec()),
            None => return fail(&GanError::MissingLabels(v), Some(history)),
        }
    } else if v == GanVariant::InfoGan {
        let mut r = rng(derive_seed(cfg.seed, &format!("score-codes:{}", p.id)));
        Conditioning::Codes(crate::gan::sample_codes(&mut r, &cfg.model.code_factors, m))
    } else {
        Conditioning::None
    };
    let scored = (|| -> Result<(SampleSet, f64, f64, Option<f64>), BenchError> {
        let x = generate_from_noise(&bundle, &z, &cond)?;
        let mut fake = SampleSet::from_tensor(&x).map_err(GanError::from)?;
        if cfg.metrics.raw_space {
            fake = p.norm.invert(&fake).map_err(|e| BenchError::Report(e.to_string()))?;
        }
        let metric = |e: crate::metrics::MetricError| BenchError::Report(e.to_string());
        let kernel = KernelSpec {
            bandwidth: cfg.metrics.bandwidth,
        };
        let mmd = mmd_squared_with(&fake, &p.real_score, &kernel, cfg.metrics.unbiased).map_err(metric)?;
        let emd = emd(&fake, &p.real_score).map_err(metric)?;
        let critic = if cfg.metrics.critic_emd {
            let cc = CriticConfig {
                steps: cfg.metrics.critic_steps,
                seed: derive_seed(cfg.seed, &format!("critic:{tag}")),
                ..CriticConfig::default()
            };
            Some(critic_emd(&p.real_score, &fake, &cc).map_err(metric)?.value)
        } else {
            None
        };
        Ok((fake, mmd, emd, critic))
    })();
    let (fake, mmd, emd, critic) = match scored {
        Ok(s) => s,
        Err(e) => return fail(&e, Some(history)),
    };
    let (kl, jsd) = mean_over_columns(&p.real_score, &fake, cfg.metrics.histogram_bins);
    let d_real_mean = history.records.last().map(|r| r.d_real_mean);
    let all = [Some(mmd), Some(emd), kl, jsd, critic, d_real_mean];
    if all.iter().flatten().any(|x| !x.is_finite()) {
        return fail(&"non-finite metric value", Some(history));
    }
    CellOut {
        row: ReportRow {
            dataset: p.id.clone(),
            shape: p.shape.clone(),
            variant: v.name().to_string(),
            status: RowStatus::Ok,
            mmd: Some(mmd),
            emd: Some(emd),
            kl,
            jsd,
            critic_emd: critic,
            d_real_mean,
            noise_sha256,
            error: String::new(),
        },
        plot_values: Some(fake.column(p.plot_col)),
        history: Some(history),
        model: Some(TrainedModel {
            dataset: p.id.clone(),
            variant: v,
            bundle,
            train: tc,
        }),
    }
}

/// Trains and scores every (dataset, variant) cell with up to `workers`
/// threads. Results are merged in (dataset, variant) order and each cell
/// draws from its own derived seeds, so the report does not depend on the
/// worker count.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> ExperimentOutput {
    let start = Instant::now();
    let mut notes = Vec::new();
    let prepared: Vec<Result<Prepared, String>> = cfg
        .datasets
        .iter()
        .map(|dc| prepare(cfg, dc, &mut notes).map_err(|e| e.to_string()))
        .collect();

    let cells: Vec<(usize, GanVariant)> = prepared
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_ok())
        .flat_map(|(i, _)| cfg.variants.iter().map(move |&v| (i, v)))
        .collect();
    let results: Mutex<Vec<Option<CellOut>>> = Mutex::new((0..cells.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, cells.len().max(1)) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(i, v)) = cells.get(k) else { break };
                let p = prepared[i].as_ref().expect("only loaded datasets have cells");
                let out = run_cell(cfg, p, v);
                results.lock().expect("no poisoned workers")[k] = Some(out);
            });
        }
    });
    let mut results = results.into_inner().expect("workers joined").into_iter().map(|c| c.expect("every cell ran"));

    let mut rows = Vec::new();
    let mut plots = Vec::new();
    let mut models = Vec::new();
    for (dc, p) in cfg.datasets.iter().zip(&prepared) {
        let p = match p {
            Ok(p) => p,
            Err(e) => {
                rows.extend(cfg.variants.iter().map(|v| ReportRow::failed(&dc.id, Vec::new(), v.name(), e)));
                continue;
            }
        };
        let real_col = p.real_score.column(p.plot_col);
        let mut kde_sources = vec![("real".to_string(), real_col.clone())];
        for &v in &cfg.variants {
            let cell = results.next().expect("one result per cell");
            if let Some(h) = &cell.history {
                plots.push(PlotSeries::Loss {
                    dataset: p.id.clone(),
                    variant: v.name().into(),
                    records: h.records.clone(),
                });
            }
            if let Some(vals) = cell.plot_values {
                match qq_series(&p.id, v.name(), &real_col, &vals, cfg.metrics.qq_points) {
                    Ok(s) => plots.push(s),
                    Err(e) => notes.push(format!("{}: qq {} skipped: {e}", p.id, v.name())),
                }
                kde_sources.push((format!("generated-{}", v.name()), vals));
            }
            rows.push(cell.row);
            models.extend(cell.model);
        }
        match kde_series(&p.id, &p.plot_name, &kde_sources, cfg.metrics.kde_points) {
            Ok(s) => plots.push(s),
            Err(e) => notes.push(format!("{}: kde skipped: {e}", p.id)),
        }
    }

    ExperimentOutput {
        report: MetricReport {
            provenance: Provenance {
                version: env!("CARGO_PKG_VERSION").to_string(),
                config_sha256: cfg.hash(),
                seed: cfg.seed,
                wall_clock_s: start.elapsed().as_secs_f64(),
                notes,
            },
            rows,
        },
        plots,
        models,
    }
}

/// Writes the report, every plot series and one checkpoint per trained
/// cell into `dir`.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> Result<(), BenchError> {
    write_report(dir, &out.report)?;
    for s in &out.plots {
        write_plot(dir, s)?;
    }
    for m in &out.models {
        let name = format!(
            "checkpoint_{}_{}.bin",
            super::plots::sanitize(&m.dataset),
            super::plots::sanitize(m.variant.name())
        );
        write_checkpoint(&dir.join(name), &m.bundle, Some(&m.train))?;
    }
    Ok(())
}
