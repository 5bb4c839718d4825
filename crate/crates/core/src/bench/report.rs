//! `report.csv` / `report.txt`.
//!
//! The delimited form starts with `# key: value` provenance lines, then one
//! header row and one row per (dataset, variant) cell. Floats are written
//! in shortest round-trip form, so [`parse_report`] recovers equal values.

use std::fmt::Write as _;
use std::path::Path;

use super::BenchError;

pub const REPORT_COLUMNS: [&str; 12] = [
    "dataset",
    "shape",
    "variant",
    "status",
    "mmd",
    "emd",
    "kl",
    "jsd",
    "critic_emd",
    "d_real_mean",
    "noise_sha256",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    /// Shape of the data the model was trained on; empty when loading failed.
    pub shape: Vec<usize>,
    pub variant: String,
    pub status: RowStatus,
    pub mmd: Option<f64>,
    pub emd: Option<f64>,
    /// Mean over columns of KL(real ‖ generated); `None` when some column's
    /// generated histogram misses a bin the real one occupies.
    pub kl: Option<f64>,
    pub jsd: Option<f64>,
    pub critic_emd: Option<f64>,
    pub d_real_mean: Option<f64>,
    /// SHA-256 of the scoring noise; equal across variants of one dataset.
    pub noise_sha256: String,
    pub error: String,
}

impl ReportRow {
    pub fn failed(dataset: &str, shape: Vec<usize>, variant: &str, error: impl std::fmt::Display) -> Self {
        Self {
            dataset: dataset.to_string(),
            shape,
            variant: variant.to_string(),
            status: RowStatus::Failed,
            mmd: None,
            emd: None,
            kl: None,
            jsd: None,
            critic_emd: None,
            d_real_mean: None,
            noise_sha256: String::new(),
            error: error.to_string().replace(['\n', '\r'], " "),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub wall_clock_s: f64,
    /// Preprocessing notes, e.g. selected KDD99 columns.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub provenance: Provenance,
    pub rows: Vec<ReportRow>,
}

impl MetricReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status == RowStatus::Failed).count()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn shape_str(s: &[usize]) -> String {
    s.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

pub fn render_csv(report: &MetricReport) -> Result<String, BenchError> {
    let p = &report.provenance;
    let mut out = String::new();
    writeln!(out, "# version: {}", p.version).unwrap();
    writeln!(out, "# config_sha256: {}", p.config_sha256).unwrap();
    writeln!(out, "# seed: {}", p.seed).unwrap();
    writeln!(out, "# wall_clock_s: {}", p.wall_clock_s).unwrap();
    for n in &p.notes {
        writeln!(out, "# note: {}", n.replace(['\n', '\r'], " ")).unwrap();
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let e = |e: csv::Error| BenchError::Report(e.to_string());
    w.write_record(REPORT_COLUMNS).map_err(e)?;
    for r in &report.rows {
        w.write_record([
            r.dataset.clone(),
            shape_str(&r.shape),
            r.variant.clone(),
            match r.status {
                RowStatus::Ok => "ok".into(),
                RowStatus::Failed => "failed".into(),
            },
            opt(r.mmd),
            opt(r.emd),
            opt(r.kl),
            opt(r.jsd),
            opt(r.critic_emd),
            opt(r.d_real_mean),
            r.noise_sha256.clone(),
            r.error.clone(),
        ])
        .map_err(e)?;
    }
    let body = w.into_inner().map_err(|e| BenchError::Report(e.to_string()))?;
    out.push_str(&String::from_utf8(body).expect("utf-8 fields"));
    Ok(out)
}

pub fn parse_report(text: &str) -> Result<MetricReport, BenchError> {
    let bad = |m: String| BenchError::Report(m);
    let mut prov = Provenance {
        version: String::new(),
        config_sha256: String::new(),
        seed: 0,
        wall_clock_s: 0.0,
        notes: Vec::new(),
    };
    let mut body = String::new();
    for line in text.lines() {
        let Some(meta) = line.strip_prefix("# ") else {
            body.push_str(line);
            body.push('\n');
            continue;
        };
        let (k, v) = meta.split_once(": ").ok_or_else(|| bad(format!("bad provenance line `{line}`")))?;
        match k {
            "version" => prov.version = v.to_string(),
            "config_sha256" => prov.config_sha256 = v.to_string(),
            "seed" => prov.seed = v.parse().map_err(|_| bad(format!("seed `{v}`")))?,
            "wall_clock_s" => prov.wall_clock_s = v.parse().map_err(|_| bad(format!("wall clock `{v}`")))?,
            "note" => prov.notes.push(v.to_string()),
            _ => return Err(bad(format!("unknown provenance key `{k}`"))),
        }
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(REPORT_COLUMNS) {
        return Err(bad(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let num = |s: &str| -> Result<Option<f64>, BenchError> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad(format!("number `{s}`")))
        }
    };
    let mut rows = Vec::new();
    for rec in reader.records() {
        let r = rec.map_err(|e| bad(e.to_string()))?;
        let shape = if r[1].is_empty() {
            Vec::new()
        } else {
            r[1].split('x')
                .map(|t| t.parse().map_err(|_| bad(format!("shape `{}`", &r[1]))))
                .collect::<Result<_, _>>()?
        };
        rows.push(ReportRow {
            dataset: r[0].to_string(),
            shape,
            variant: r[2].to_string(),
            status: match &r[3] {
                "ok" => RowStatus::Ok,
                "failed" => RowStatus::Failed,
                s => return Err(bad(format!("status `{s}`"))),
            },
            mmd: num(&r[4])?,
            emd: num(&r[5])?,
            kl: num(&r[6])?,
            jsd: num(&r[7])?,
            critic_emd: num(&r[8])?,
            d_real_mean: num(&r[9])?,
            noise_sha256: r[10].to_string(),
            error: r[11].to_string(),
        });
    }
    Ok(MetricReport { provenance: prov, rows })
}

/// Fixed-width table: one line per cell, metrics to six decimals.
pub fn render_text(report: &MetricReport) -> String {
    let p = &report.provenance;
    let mut out = format!(
        "ganbench {}  seed {}  config {}  wall clock {:.1} s\n",
        p.version, p.seed, p.config_sha256, p.wall_clock_s
    );
    for n in &p.notes {
        writeln!(out, "  {n}").unwrap();
    }
    out.push('\n');
    let head = ["Dataset", "Shape", "Model", "MMD", "EMD", "KL", "JSD", "Critic EMD", "Status"];
    let cell = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into());
    let table: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.dataset.clone(),
                shape_str(&r.shape),
                r.variant.clone(),
                cell(r.mmd),
                cell(r.emd),
                cell(r.kl),
                cell(r.jsd),
                cell(r.critic_emd),
                match r.status {
                    RowStatus::Ok => "ok".into(),
                    RowStatus::Failed => format!("FAILED: {}", r.error),
                },
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..head.len())
        .map(|j| table.iter().map(|r| r[j].len()).chain([head[j].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (j, c) in cells.iter().enumerate() {
            if j + 1 == cells.len() {
                s.push_str(c);
            } else {
                write!(s, "{c:<w$}  ", w = widths[j]).unwrap();
            }
        }
        s.trim_end().to_string() + "\n"
    };
    out.push_str(&line(head.to_vec()));
    out.push_str(&line(widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
    for r in &table {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

/// Writes `report.csv` and `report.txt` into `dir`.
pub fn write_report(dir: &Path, report: &MetricReport) -> Result<(), BenchError> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    for (name, text) in [("report.csv", render_csv(report)?), ("report.txt", render_text(report))] {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| BenchError::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MetricReport {
        let mut ok = ReportRow::failed("mix", vec![100, 2], "WGAN", "");
        ok.status = RowStatus::Ok;
        ok.mmd = Some(0.1 + 0.2);
        ok.emd = Some(1e-17);
        ok.jsd = Some(std::f64::consts::LN_2);
        ok.d_real_mean = Some(-3.25);
        ok.noise_sha256 = "ab".repeat(32);
        MetricReport {
            provenance: Provenance {
                version: "0.1.0".into(),
                config_sha256: "00".repeat(32),
                seed: 42,
                wall_clock_s: 1.5,
                notes: vec!["mix: kdd99 columns: a b".into()],
            },
            rows: vec![ok, ReportRow::failed("gone", vec![], "VANILLA", "x.csv: no such file, \"quoted\"\nnext")],
        }
    }

    #[test]
    fn csv_round_trip() {
        let r = sample();
        let text = render_csv(&r).unwrap();
        let mut back = parse_report(&text).unwrap();
        assert_eq!(back.rows[1].error, "x.csv: no such file, \"quoted\" next");
        back.rows[1].error = r.rows[1].error.replace('\n', " ");
        let mut expect = r.clone();
        expect.rows[1].error = back.rows[1].error.clone();
        assert_eq!(back, expect);
        assert!(text.contains("# seed: 42\n"));
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut r = sample();
        r.rows.clear();
        let text = render_csv(&r).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1);
        assert_eq!(parse_report(&text).unwrap(), r);
    }

    #[test]
    fn text_table_lists_rows() {
        let t = render_text(&sample());
        assert!(t.contains("WGAN") && t.contains("FAILED"));
    }
}
