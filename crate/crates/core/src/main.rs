use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ganbench::bench::{run_experiment, write_outputs, ExperimentConfig};
use ganbench::datasets::{flatten, load_tabular, read_tensor_file, Dataset, TabularOptions};
use ganbench::gan::read_checkpoint;
use ganbench::metrics::{
    critic_emd, emd, jsd, kl_divergence, mmd_squared_with, shared_histograms, Bandwidth, CriticConfig, KernelSpec,
};

#[derive(Parser)]
#[command(name = "ganbench", version, about = "Train GAN variants on tabular data and score them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and score every (dataset, variant) cell of a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Compare two sample files without training.
    Metrics {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        fake: PathBuf,
        /// Gaussian kernel bandwidth: `median` or a positive number.
        #[arg(long, alias = "kernel", default_value = "median")]
        bandwidth: String,
        #[arg(long)]
        unbiased: bool,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Also estimate EMD with a trained critic.
        #[arg(long)]
        critic: bool,
    },
    /// Print a checkpoint's header.
    Inspect {
        #[arg(long)]
        checkpoint: PathBuf,
    },
}

/// `.csv` files are read as tables, anything else as a tensor container.
fn load_samples(path: &Path) -> Result<Dataset, String> {
    let ds = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        load_tabular(path, &TabularOptions::default())
    } else {
        read_tensor_file(path).and_then(|a| flatten(&a))
    };
    ds.map_err(|e| format!("{}: {e}", path.display()))
}

fn metrics(real: &Path, fake: &Path, bandwidth: &str, unbiased: bool, bins: usize, critic: bool) -> Result<(), String> {
    let bandwidth = match bandwidth {
        "median" => Bandwidth::MedianHeuristic,
        s => match s.parse::<f64>() {
            Ok(v) if v > 0.0 => Bandwidth::Fixed(v),
            _ => return Err(format!("bandwidth must be `median` or a positive number, got `{s}`")),
        },
    };
    let (x, y) = (load_samples(real)?.data, load_samples(fake)?.data);
    let e = |e: ganbench::metrics::MetricError| e.to_string();
    println!("rows      {} vs {}", x.rows(), y.rows());
    println!("mmd2      {}", mmd_squared_with(&y, &x, &KernelSpec { bandwidth }, unbiased).map_err(e)?);
    println!("emd       {}", emd(&y, &x).map_err(e)?);
    if x.cols() == y.cols() {
        let (mut kl, mut js) = (Some(0.0), 0.0);
        for j in 0..x.cols() {
            let (p, q) = shared_histograms(&x.column(j), &y.column(j), bins).map_err(e)?;
            kl = kl.zip(kl_divergence(&p, &q).ok()).map(|(a, b)| a + b);
            js += jsd(&p, &q).map_err(e)?;
        }
        let d = x.cols() as f64;
        match kl {
            Some(kl) => println!("kl        {}", kl / d),
            None => println!("kl        undefined (generated histogram misses a real bin)"),
        }
        println!("jsd       {}", js / d);
    }
    if critic {
        println!("critic    {}", critic_emd(&x, &y, &CriticConfig::default()).map_err(e)?.value);
    }
    Ok(())
}

fn inspect(path: &Path) -> Result<(), String> {
    let (bundle, header) = read_checkpoint(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let s = &bundle.spec;
    println!("variant     {}", header.variant);
    println!("data dim    {}", s.data_dim);
    println!("latent      {} ({:?})", s.latent, s.prior);
    if s.variant.is_conditioned() {
        println!("classes     {}", s.k_classes);
    }
    let mut total = 0;
    for (name, shape) in &header.params {
        let n: usize = shape.iter().product();
        total += n;
        println!("  {name:<24} {shape:?}");
    }
    println!("parameters  {total}");
    if let Some(t) = &header.train {
        println!(
            "training    epochs {} critic steps {} batch {} lr g {} d {}",
            t.epochs, t.critic_steps, t.batch, t.opt_g.lr, t.opt_d.lr
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            workers,
        } => {
            let mut cfg = match ExperimentConfig::from_file(&config) {
                Ok(c) => c,
                Err(e @ ganbench::bench::BenchError::Io { .. }) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    return ExitCode::from(1);
                }
            };
            if let Some(s) = seed {
                cfg.set_seed(s);
            }
            let result = run_experiment(&cfg, workers);
            if let Err(e) = write_outputs(&result, &out) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            print!("{}", ganbench::bench::render_text(&result.report));
            let failed = result.report.failures();
            if failed > 0 {
                eprintln!("{failed} of {} cells failed", result.report.rows.len());
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Command::Metrics {
            real,
            fake,
            bandwidth,
            unbiased,
            bins,
            critic,
        } => match metrics(&real, &fake, &bandwidth, unbiased, bins, critic) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Inspect { checkpoint } => match inspect(&checkpoint) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
