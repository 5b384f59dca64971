//! Grid-search sweeps over one encoding's hyperparameters, ranked by Pareto
//! fronts over (mean fitness, phenotypic diversity).
//!
//! ```toml
//! name = "sweep-ca"
//! encoding = "ca"
//! replicates = 3
//! output_dir = "results/sweep-ca"
//!
//! [loop]
//! max_generations = 25000
//!
//! [grid]
//! p_mut = [0.01, 0.05, 0.1]
//! mask_size = [3, 5]
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{from_value, parse_toml, DomainConfig, ExperimentConfig};
use super::run::{run_experiment, Manifest};
use crate::encodings::{EncodingConfig, EncodingTag};
use crate::error::{Error, Result};
use crate::metrics::stats::mean;
use crate::metrics::{pareto_fronts, select_best};
use crate::qd::{ArchiveSpec, LoopConfig};

/// Number of configurations a sweep keeps.
pub const SELECTED: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub encoding: EncodingTag,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_cadence")]
    pub snapshot_cadence: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(rename = "loop", default = "sweep_loop")]
    pub loop_config: LoopConfig,
    #[serde(default)]
    pub archive: ArchiveSpec,
    #[serde(default)]
    pub domain: DomainConfig,
    /// Hyperparameter name to candidate values. Unlisted hyperparameters keep
    /// their defaults.
    pub grid: BTreeMap<String, Vec<toml::Value>>,
}

fn default_name() -> String {
    "sweep".into()
}

fn default_replicates() -> usize {
    3
}

fn default_cadence() -> u64 {
    1000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results/sweep")
}

fn sweep_loop() -> LoopConfig {
    LoopConfig {
        max_generations: 25_000,
        ..LoopConfig::default()
    }
}

impl SweepSpec {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value = parse_toml(text)?;
        for o in overrides {
            super::config::apply_override(&mut value, o)?;
        }
        let spec: SweepSpec = from_value(value)?;
        spec.points()?;
        Ok(spec)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, overrides)
    }

    /// Cartesian product of the grid axes, last axis (in key order) varying
    /// fastest.
    pub fn grid_points(&self) -> Result<Vec<BTreeMap<String, toml::Value>>> {
        if self.grid.is_empty() {
            return Err(Error::config("grid", "needs at least one axis"));
        }
        let mut points = vec![BTreeMap::new()];
        for (key, values) in &self.grid {
            if values.is_empty() {
                return Err(Error::config(format!("grid.{key}"), "axis has no values"));
            }
            if key == "kind" {
                return Err(Error::config("grid.kind", "the encoding is fixed by `encoding`"));
            }
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.insert(key.clone(), v.clone());
                        q
                    })
                })
                .collect();
        }
        Ok(points)
    }

    /// One validated experiment config per grid point.
    pub fn points(&self) -> Result<Vec<(BTreeMap<String, toml::Value>, ExperimentConfig)>> {
        self.grid_points()?
            .into_iter()
            .enumerate()
            .map(|(i, params)| {
                let config = self.experiment_for(i, &params)?;
                Ok((params, config))
            })
            .collect()
    }

    fn experiment_for(&self, index: usize, params: &BTreeMap<String, toml::Value>) -> Result<ExperimentConfig> {
        let base = EncodingConfig::default_for(self.encoding);
        let mut value = toml::Value::try_from(&base).expect("encoding config serializes");
        let table = value.as_table_mut().expect("encoding config is a table");
        for (k, v) in params {
            table.insert(k.clone(), v.clone());
        }
        let encoding: EncodingConfig = from_value(value).map_err(|e| match e {
            Error::Config { field, message } => Error::config(format!("grid.{field}"), message),
            other => other,
        })?;
        encoding.validate().map_err(|e| match e {
            Error::Config { field, message } => Error::config(format!("grid.{field}"), message),
            other => other,
        })?;
        let config = ExperimentConfig {
            name: format!("{}/point_{index:03}", self.name),
            encodings: vec![encoding],
            loop_config: self.loop_config.clone(),
            archive: self.archive.clone(),
            domain: self.domain.clone(),
            replicates: self.replicates,
            base_seed: self.base_seed,
            snapshot_cadence: self.snapshot_cadence,
            output_dir: self.output_dir.join(format!("point_{index:03}")),
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub params: BTreeMap<String, toml::Value>,
    pub mean_fitness: f64,
    pub phenotypic_diversity: f64,
    /// 1 for the non-dominated front.
    pub front: usize,
    pub selected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub name: String,
    pub encoding: EncodingTag,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    pub fn selected(&self) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(|p| p.selected)
    }
}

/// Front rank (1-based) and selection flag per objective pair.
pub fn rank(objectives: &[(f64, f64)]) -> Vec<(usize, bool)> {
    let mut out = vec![(0, false); objectives.len()];
    for (k, front) in pareto_fronts(objectives).iter().enumerate() {
        for &i in front {
            out[i].0 = k + 1;
        }
    }
    for i in select_best(objectives, SELECTED) {
        out[i].1 = true;
    }
    out
}

/// Runs every grid point, ranks them and writes `sweep_report.csv` and
/// `sweep_report.json` to the sweep's output directory.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    let points = spec.points()?;
    let manifests: Vec<Manifest> = points
        .par_iter()
        .map(|(_, config)| run_experiment(config))
        .collect::<Result<_>>()?;

    let mut objectives = Vec::with_capacity(points.len());
    for ((_, config), manifest) in points.iter().zip(&manifests) {
        let finals = manifest.final_metrics(&config.output_dir)?;
        let fit: Vec<f64> = finals.iter().map(|m| m.mean_fitness).collect();
        let div: Vec<f64> = finals.iter().map(|m| m.phenotypic_diversity).collect();
        objectives.push((mean(&fit), mean(&div)));
    }
    let ranks = rank(&objectives);
    let report = SweepReport {
        name: spec.name.clone(),
        encoding: spec.encoding,
        points: points
            .into_iter()
            .zip(objectives)
            .zip(ranks)
            .enumerate()
            .map(|(index, (((params, _), (f, d)), (front, selected)))| SweepPoint {
                index,
                params,
                mean_fitness: f,
                phenotypic_diversity: d,
                front,
                selected,
            })
            .collect(),
    };
    write_report(&report, &spec.output_dir)?;
    Ok(report)
}

pub fn report_csv(report: &SweepReport) -> String {
    let keys: Vec<&String> = report.points.first().map(|p| p.params.keys().collect()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["point".to_string()];
    header.extend(keys.iter().map(|k| k.to_string()));
    header.extend(["mean_fitness", "phenotypic_diversity", "front", "selected"].map(String::from));
    w.write_record(&header).expect("in-memory write");
    for p in &report.points {
        let mut rec = vec![p.index.to_string()];
        rec.extend(keys.iter().map(|k| p.params[*k].to_string()));
        rec.push(p.mean_fitness.to_string());
        rec.push(p.phenotypic_diversity.to_string());
        rec.push(p.front.to_string());
        rec.push(p.selected.to_string());
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn write_report(report: &SweepReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join("sweep_report.csv");
    fs::write(&csv_path, report_csv(report)).map_err(|e| Error::io(&csv_path, e))?;
    let json_path = dir.join("sweep_report.json");
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;
    Ok(())
}
