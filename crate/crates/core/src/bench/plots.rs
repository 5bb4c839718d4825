//! Plot-data files: KDE curves, Q-Q points and loss histories, one
//! delimited file per series. Rendering is left to external tools.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::BenchError;
use crate::gan::EpochRecord;
use crate::metrics::{kde, qq_points, silverman_bandwidth, Bandwidth, MetricError};
use crate::sample::SampleSet;

#[derive(Debug, Clone, PartialEq)]
pub enum PlotSeries {
    /// Density curves on a shared grid: `real` first, then one
    /// `generated-<variant>` curve per variant.
    Kde {
        dataset: String,
        column: String,
        x: Vec<f64>,
        curves: Vec<(String, Vec<f64>)>,
    },
    /// Quantile pairs (real, generated) plus the two endpoints of the
    /// 45-degree reference line.
    Qq {
        dataset: String,
        variant: String,
        points: Vec<(f64, f64)>,
        reference: [(f64, f64); 2],
    },
    Loss {
        dataset: String,
        variant: String,
        records: Vec<EpochRecord>,
    },
}

/// Replaces anything outside `[A-Za-z0-9_.-]` with `_`.
pub fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.-".contains(c) { c } else { '_' })
        .collect()
}

fn as_set(v: &[f64]) -> Result<SampleSet, MetricError> {
    SampleSet::from_column(v).map_err(|e| MetricError::InvalidArgument(e.to_string()))
}

/// KDE curves for one column. The grid has `points` values spanning
/// `[min - 3h, max + 3h]` of the pooled sample, with `h` the pooled
/// Silverman bandwidth, which every curve also uses.
pub fn kde_series(
    dataset: &str,
    column: &str,
    sources: &[(String, Vec<f64>)],
    points: usize,
) -> Result<PlotSeries, MetricError> {
    let pooled: Vec<f64> = sources.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    if pooled.is_empty() {
        return Err(MetricError::Empty);
    }
    if points < 2 {
        return Err(MetricError::InvalidArgument("a KDE grid needs at least 2 points".into()));
    }
    let h = silverman_bandwidth(&as_set(&pooled)?)?[0];
    let (lo, hi) = pooled
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &v| (l.min(v), u.max(v)));
    let (a, b) = (lo - 3.0 * h, hi + 3.0 * h);
    let step = (b - a) / (points - 1) as f64;
    let x: Vec<f64> = (0..points).map(|i| if i + 1 == points { b } else { a + step * i as f64 }).collect();
    let grid = as_set(&x)?;
    let curves = sources
        .iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(name, v)| Ok((name.clone(), kde(&as_set(v)?, Bandwidth::Fixed(h), &grid)?)))
        .collect::<Result<_, MetricError>>()?;
    Ok(PlotSeries::Kde {
        dataset: dataset.into(),
        column: column.into(),
        x,
        curves,
    })
}

pub fn qq_series(dataset: &str, variant: &str, real: &[f64], fake: &[f64], q: usize) -> Result<PlotSeries, MetricError> {
    let points = qq_points(real, fake, q)?;
    let lo = points.iter().map(|p| p.0.min(p.1)).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0.max(p.1)).fold(f64::NEG_INFINITY, f64::max);
    Ok(PlotSeries::Qq {
        dataset: dataset.into(),
        variant: variant.into(),
        points,
        reference: [(lo, lo), (hi, hi)],
    })
}

impl PlotSeries {
    pub fn file_name(&self) -> String {
        match self {
            Self::Kde { dataset, column, .. } => format!("kde_{}_{}.csv", sanitize(dataset), sanitize(column)),
            Self::Qq { dataset, variant, .. } => format!("qq_{}_{}.csv", sanitize(dataset), sanitize(variant)),
            Self::Loss { dataset, variant, .. } => format!("loss_{}_{}.csv", sanitize(dataset), sanitize(variant)),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        match self {
            Self::Kde { x, curves, .. } => {
                s.push('x');
                for (name, _) in curves {
                    write!(s, ",{name}").unwrap();
                }
                s.push('\n');
                for (i, xi) in x.iter().enumerate() {
                    write!(s, "{xi}").unwrap();
                    for (_, y) in curves {
                        write!(s, ",{}", y[i]).unwrap();
                    }
                    s.push('\n');
                }
            }
            Self::Qq { points, reference, .. } => {
                s.push_str("kind,x,y\n");
                for (x, y) in points {
                    writeln!(s, "quantile,{x},{y}").unwrap();
                }
                for (x, y) in reference {
                    writeln!(s, "reference,{x},{y}").unwrap();
                }
            }
            Self::Loss { records, .. } => {
                s.push_str("epoch,d_loss,g_loss,d_real_mean,mmd\n");
                for r in records {
                    let mmd = r.mmd.map(|m| m.to_string()).unwrap_or_default();
                    writeln!(s, "{},{},{},{},{mmd}", r.epoch, r.d_loss, r.g_loss, r.d_real_mean).unwrap();
                }
            }
        }
        s
    }
}

pub fn write_plot(dir: &Path, series: &PlotSeries) -> Result<PathBuf, BenchError> {
    let path = dir.join(series.file_name());
    std::fs::write(&path, series.render()).map_err(|e| BenchError::io(&path, e))?;
    Ok(path)
}
