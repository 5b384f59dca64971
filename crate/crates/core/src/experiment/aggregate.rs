//! Summary tables over replicated runs: mean and sample standard deviation
//! of the final metrics per configuration and pairwise Welch p-values.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::run::Manifest;
use crate::error::{Error, Result};
use crate::metrics::stats::{mean, sample_std, welch_t_test};
use crate::metrics::RunMetrics;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MeanFitness,
    Coverage,
    QdScore,
    PhenotypicDiversity,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::MeanFitness,
        Metric::Coverage,
        Metric::QdScore,
        Metric::PhenotypicDiversity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::MeanFitness => "mean_fitness",
            Metric::Coverage => "coverage",
            Metric::QdScore => "qd_score",
            Metric::PhenotypicDiversity => "phenotypic_diversity",
        }
    }

    pub fn of(self, m: &RunMetrics) -> f64 {
        match self {
            Metric::MeanFitness => m.mean_fitness,
            Metric::Coverage => m.coverage,
            Metric::QdScore => m.qd_score,
            Metric::PhenotypicDiversity => m.phenotypic_diversity,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub label: String,
    pub replicates: usize,
    /// Indexed like [`Metric::ALL`].
    pub stats: [MeanStd; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    /// `pvalues[metric][i][j]` compares configurations `i` and `j`; NaN when
    /// either has fewer than two replicates.
    pub pvalues: [Vec<Vec<f64>>; 4],
}

impl Summary {
    pub fn stat(&self, row: usize, metric: Metric) -> MeanStd {
        self.rows[row].stats[metric as usize]
    }

    pub fn pvalue(&self, metric: Metric, i: usize, j: usize) -> f64 {
        self.pvalues[metric as usize][i][j]
    }
}

/// Summarizes final metric rows, one list per configuration.
pub fn summarize(configs: &[(String, Vec<RunMetrics>)]) -> Summary {
    let samples: Vec<[Vec<f64>; 4]> = configs
        .iter()
        .map(|(_, finals)| Metric::ALL.map(|m| finals.iter().map(|r| m.of(r)).collect()))
        .collect();
    let rows = configs
        .iter()
        .zip(&samples)
        .map(|((label, finals), s)| SummaryRow {
            label: label.clone(),
            replicates: finals.len(),
            stats: std::array::from_fn(|k| MeanStd {
                mean: if s[k].is_empty() { f64::NAN } else { mean(&s[k]) },
                std: sample_std(&s[k]),
            }),
        })
        .collect();
    let pvalues = std::array::from_fn(|k| {
        samples
            .iter()
            .map(|a| {
                samples
                    .iter()
                    .map(|b| welch_t_test(&a[k], &b[k]).map_or(f64::NAN, |r| r.p_value))
                    .collect()
            })
            .collect()
    });
    Summary { rows, pvalues }
}

/// Loads each manifest's final rows and summarizes them. Labels are the
/// experiment names, suffixed with `#i` when names repeat.
pub fn aggregate(manifest_paths: &[PathBuf]) -> Result<Summary> {
    let mut configs = Vec::with_capacity(manifest_paths.len());
    for path in manifest_paths {
        let manifest = Manifest::load(path)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        configs.push((manifest.name.clone(), manifest.final_metrics(dir)?));
    }
    let names: Vec<String> = configs.iter().map(|(n, _)| n.clone()).collect();
    for (i, (label, _)) in configs.iter_mut().enumerate() {
        if names.iter().filter(|n| *n == label).count() > 1 {
            *label = format!("{label}#{i}");
        }
    }
    Ok(summarize(&configs))
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        x.to_string()
    }
}

pub fn summary_csv(summary: &Summary) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["config".to_string(), "replicates".to_string()];
    for m in Metric::ALL {
        header.push(format!("{}_mean", m.name()));
        header.push(format!("{}_std", m.name()));
    }
    w.write_record(&header).expect("in-memory write");
    for row in &summary.rows {
        let mut rec = vec![row.label.clone(), row.replicates.to_string()];
        for s in &row.stats {
            rec.push(fmt(s.mean));
            rec.push(fmt(s.std));
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn pvalue_csv(summary: &Summary, metric: Metric) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let labels: Vec<&str> = summary.rows.iter().map(|r| r.label.as_str()).collect();
    let mut header = vec!["config"];
    header.extend(&labels);
    w.write_record(&header).expect("in-memory write");
    for (i, label) in labels.iter().enumerate() {
        let mut rec = vec![label.to_string()];
        rec.extend(summary.pvalues[metric as usize][i].iter().map(|&p| fmt(p)));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Writes `summary.csv` and one `pvalues_<metric>.csv` per metric; returns
/// the written paths.
pub fn write_summary(summary: &Summary, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = vec![(dir.join("summary.csv"), summary_csv(summary))];
    for m in Metric::ALL {
        files.push((dir.join(format!("pvalues_{}.csv", m.name())), pvalue_csv(summary, m)));
    }
    for (path, text) in &files {
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn row(qd: f64, fit: f64) -> RunMetrics {
        RunMetrics {
            generation: 10,
            coverage: 0.5,
            qd_score: qd,
            mean_fitness: fit,
            phenotypic_diversity: 1e20,
            proportions: [1.0, 0.0, 0.0, 0.0, 0.0],
        }
    }

    #[test]
    fn one_replicate_has_zero_std() {
        let s = summarize(&[("a".into(), vec![row(100.0, 0.4)])]);
        assert_eq!(s.stat(0, Metric::QdScore), MeanStd { mean: 100.0, std: 0.0 });
        assert!(s.pvalue(Metric::QdScore, 0, 0).is_nan());
    }

    #[test]
    fn two_replicates_hand_arithmetic() {
        let s = summarize(&[("a".into(), vec![row(100.0, 0.4), row(104.0, 0.4)])]);
        let q = s.stat(0, Metric::QdScore);
        assert_eq!(q.mean, 102.0);
        assert_relative_eq!(q.std, 2.828, epsilon = 1e-3);
        assert_relative_eq!(q.std, 8.0f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn identical_streams_diagonal_is_one() {
        let rows = vec![row(100.0, 0.40), row(104.0, 0.41), row(99.0, 0.39)];
        let s = summarize(&[("a".into(), rows.clone()), ("b".into(), rows)]);
        for m in Metric::ALL {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(s.pvalue(m, i, j), 1.0, "{m:?}");
                }
            }
        }
    }

    #[test]
    fn replicate_order_does_not_matter() {
        let a = vec![row(100.0, 0.40), row(104.0, 0.41), row(99.0, 0.39)];
        let b = vec![row(120.0, 0.45), row(118.0, 0.47), row(121.0, 0.44)];
        let mut a_rev = a.clone();
        a_rev.reverse();
        let s1 = summarize(&[("a".into(), a), ("b".into(), b.clone())]);
        let s2 = summarize(&[("a".into(), a_rev), ("b".into(), b)]);
        for m in Metric::ALL {
            assert_relative_eq!(s1.stat(0, m).mean, s2.stat(0, m).mean, max_relative = 1e-15);
            assert_relative_eq!(s1.stat(0, m).std, s2.stat(0, m).std, max_relative = 1e-12);
            assert_relative_eq!(s1.pvalue(m, 0, 1), s2.pvalue(m, 0, 1), max_relative = 1e-12);
        }
        assert!(s1.pvalue(Metric::QdScore, 0, 1) < 0.05);
    }

    #[test]
    fn csv_layout() {
        let s = summarize(&[("a".into(), vec![row(1.0, 0.5)]), ("b".into(), vec![row(2.0, 0.5), row(3.0, 0.5)])]);
        let text = summary_csv(&s);
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("config,replicates,mean_fitness_mean,mean_fitness_std"));
        assert!(lines.next().unwrap().starts_with("a,1,0.5,0,"));
        let p = pvalue_csv(&s, Metric::QdScore);
        assert_eq!(p.lines().next().unwrap(), "config,a,b");
        assert_eq!(p.lines().nth(1).unwrap(), "a,,");
    }

    #[test]
    fn missing_manifest_is_io_error() {
        let err = aggregate(&[PathBuf::from("/nonexistent/manifest.json")]).unwrap_err();
        assert!(err.is_io());
        assert!(err.to_string().contains("/nonexistent/manifest.json"));
    }
}
