//! Replicated runs and their on-disk layout.
//!
//! ```text
//! <output_dir>/
//!   manifest.json
//!   replicate_000/metrics.csv
//!   replicate_000/archive.json
//!   replicate_001/...
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::metrics::{read_metrics_csv, write_metrics_csv, RunMetrics};
use crate::qd::{Archive, ArchiveSnapshot, Observer, RunOutcome, Surrogate};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.csv";
pub const ARCHIVE_FILE: &str = "archive.json";

/// Called from worker threads with the replicate index of each snapshot.
pub type ProgressFn<'a> = &'a (dyn Fn(usize, &RunMetrics) + Sync);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub index: usize,
    pub seed: u64,
    /// Relative to the manifest's directory.
    pub metrics: PathBuf,
    pub archive: PathBuf,
}

/// Index of an experiment's outputs. `created_at` is the only
/// non-reproducible field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub replicates: Vec<ReplicateRecord>,
    pub created_at: String,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
            message: e.to_string(),
        })
    }

    /// Final metric row of every replicate, in replicate order. `dir` is the
    /// directory holding the manifest.
    pub fn final_metrics(&self, dir: &Path) -> Result<Vec<RunMetrics>> {
        self.replicates
            .iter()
            .map(|r| {
                let path = dir.join(&r.metrics);
                let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
                let rows = read_metrics_csv(file, &path.display().to_string())?;
                rows.last().cloned().ok_or_else(|| Error::Parse {
                    location: path.display().to_string(),
                    message: "metrics file has no rows".into(),
                })
            })
            .collect()
    }
}

fn run_one(config: &ExperimentConfig, replicate: usize, seed: u64, progress: ProgressFn) -> Result<RunOutcome> {
    struct Forward<'a> {
        replicate: usize,
        progress: ProgressFn<'a>,
    }
    impl Observer for Forward<'_> {
        fn on_snapshot(&mut self, metrics: &RunMetrics) {
            (self.progress)(self.replicate, metrics);
        }
    }

    let mut me = config.map_elites()?;
    me.loop_config.rng_seed = seed;
    let fitness = Surrogate {
        inflow: config.domain.inflow,
    };
    Ok(me.run(&fitness, &mut Forward { replicate, progress }))
}

/// Runs every replicate in memory, in parallel, without touching disk.
pub fn run_replicates(config: &ExperimentConfig) -> Result<Vec<RunOutcome>> {
    run_replicates_with(config, &|_, _| {})
}

pub fn run_replicates_with(config: &ExperimentConfig, progress: ProgressFn) -> Result<Vec<RunOutcome>> {
    config.validate()?;
    config
        .seeds()
        .into_par_iter()
        .enumerate()
        .map(|(r, seed)| run_one(config, r, seed, progress))
        .collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Manifest> {
    run_experiment_with(config, &|_, _| {})
}

/// Runs all replicates and writes metrics, final archives and the manifest
/// under `config.output_dir`.
pub fn run_experiment_with(config: &ExperimentConfig, progress: ProgressFn) -> Result<Manifest> {
    config.validate()?;
    let out = &config.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let replicates = config
        .seeds()
        .into_par_iter()
        .enumerate()
        .map(|(r, seed)| {
            let outcome = run_one(config, r, seed, progress)?;
            write_replicate(out, r, seed, &outcome.metrics, &outcome.archive)
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = Manifest {
        name: config.name.clone(),
        config_hash: config.hash(),
        config: config.clone(),
        seeds: config.seeds(),
        replicates,
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    let path = out.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn write_replicate(
    out: &Path,
    index: usize,
    seed: u64,
    metrics: &[RunMetrics],
    archive: &Archive,
) -> Result<ReplicateRecord> {
    let rel = PathBuf::from(format!("replicate_{index:03}"));
    let dir = out.join(&rel);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let metrics_path = dir.join(METRICS_FILE);
    let file = fs::File::create(&metrics_path).map_err(|e| Error::io(&metrics_path, e))?;
    write_metrics_csv(std::io::BufWriter::new(file), metrics).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(&metrics_path, source),
        other => other,
    })?;

    let archive_path = dir.join(ARCHIVE_FILE);
    let snapshot: ArchiveSnapshot = archive.to_snapshot();
    fs::write(&archive_path, snapshot.to_json() + "\n").map_err(|e| Error::io(&archive_path, e))?;

    Ok(ReplicateRecord {
        index,
        seed,
        metrics: rel.join(METRICS_FILE),
        archive: rel.join(ARCHIVE_FILE),
    })
}

/// Reads a replicate's final archive back.
pub fn load_archive(path: &Path) -> Result<ArchiveSnapshot> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ArchiveSnapshot::from_json(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::{EncodingConfig, EncodingTag};
    use crate::qd::LoopConfig;

    fn small(dir: &Path, replicates: usize, generations: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::with_encodings(vec![EncodingConfig::default_for(EncodingTag::Direct)]);
        c.replicates = replicates;
        c.base_seed = 7;
        c.snapshot_cadence = 5;
        c.loop_config = LoopConfig {
            init_population: 20,
            children_per_generation: 5,
            max_generations: generations,
            rng_seed: 0,
        };
        c.output_dir = dir.to_path_buf();
        c
    }

    #[test]
    fn zero_generations_single_row() {
        let tmp = tempfile::tempdir().unwrap();
        let m = run_experiment(&small(tmp.path(), 1, 0)).unwrap();
        let rows = read_metrics_csv(fs::File::open(tmp.path().join(&m.replicates[0].metrics)).unwrap(), "m").unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].generation, 0);
    }

    #[test]
    fn replicates_get_distinct_seeds() {
        let tmp = tempfile::tempdir().unwrap();
        let c = small(tmp.path(), 3, 10);
        let m = run_experiment(&c).unwrap();
        assert_eq!(m.seeds, vec![7, 8, 9]);
        for r in &m.replicates {
            assert!(tmp.path().join(&r.metrics).is_file());
            assert!(tmp.path().join(&r.archive).is_file());
        }
        let loaded = Manifest::load(&tmp.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(loaded, m);
        assert_eq!(loaded.config.seeds(), loaded.seeds);
        assert_eq!(loaded.config_hash, c.hash());
        assert_eq!(loaded.final_metrics(tmp.path()).unwrap().len(), 3);
    }

    #[test]
    fn written_archive_matches_memory_run() {
        let tmp = tempfile::tempdir().unwrap();
        let c = small(tmp.path(), 2, 15);
        let m = run_experiment(&c).unwrap();
        let outcomes = run_replicates(&c).unwrap();
        for (rec, out) in m.replicates.iter().zip(&outcomes) {
            let snap = load_archive(&tmp.path().join(&rec.archive)).unwrap();
            assert_eq!(snap, out.archive.to_snapshot());
            let rows = read_metrics_csv(fs::File::open(tmp.path().join(&rec.metrics)).unwrap(), "m").unwrap();
            assert_eq!(rows, out.metrics);
        }
    }

    #[test]
    fn unwritable_output_is_io_error() {
        let tmp = tempfile::tempdir().unwrap();
        let blocker = tmp.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = run_experiment(&small(&blocker.join("sub"), 1, 0)).unwrap_err();
        assert!(err.is_io(), "{err}");
    }

    #[test]
    fn missing_metrics_file_names_the_path() {
        let tmp = tempfile::tempdir().unwrap();
        let m = run_experiment(&small(tmp.path(), 1, 0)).unwrap();
        fs::remove_file(tmp.path().join(&m.replicates[0].metrics)).unwrap();
        let err = m.final_metrics(tmp.path()).unwrap_err();
        assert!(err.to_string().contains("metrics.csv"), "{err}");
    }
}
