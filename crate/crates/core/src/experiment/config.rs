//! TOML experiment configuration with dot-path overrides.
//!
//! ```toml
//! name = "ca"
//! replicates = 10
//! base_seed = 0
//! snapshot_cadence = 100
//! output_dir = "results/ca"
//!
//! [domain]
//! rows = 11
//! cols = 14
//! inflow = "along_rows"
//!
//! [loop]
//! init_population = 100
//! children_per_generation = 10
//! max_generations = 50000
//!
//! [archive]
//! area_bins = 16
//! count_bins = 16
//! count_max = 16.0
//!
//! [[encodings]]
//! kind = "ca"
//! p_mut = 0.05
//! sigma = 0.3
//! mask_size = 3
//! steps = 10
//! ```
//!
//! Every table is optional except `encodings`; omitted keys take their
//! defaults and unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encodings::EncodingConfig;
use crate::error::{Error, Result};
use crate::phenotype::{GridShape, InflowAxis};
use crate::qd::{ArchiveSpec, LoopConfig, MapElites};

/// Shipped defaults: all five encodings in one archive at the full-scale
/// loop settings.
pub const DEFAULT_CONFIG: &str = include_str!("../../configs/default.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub rows: usize,
    pub cols: usize,
    pub inflow: InflowAxis,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            rows: GridShape::SITE.rows,
            cols: GridShape::SITE.cols,
            inflow: InflowAxis::default(),
        }
    }
}

impl DomainConfig {
    pub fn shape(&self) -> GridShape {
        GridShape::new(self.rows, self.cols)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub encodings: Vec<EncodingConfig>,
    #[serde(rename = "loop", default)]
    pub loop_config: LoopConfig,
    #[serde(default)]
    pub archive: ArchiveSpec,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_cadence")]
    pub snapshot_cadence: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_replicates() -> usize {
    10
}

fn default_cadence() -> u64 {
    100
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    /// A config with defaults everywhere and the given encodings.
    pub fn with_encodings(encodings: Vec<EncodingConfig>) -> Self {
        ExperimentConfig {
            name: default_name(),
            encodings,
            loop_config: LoopConfig::default(),
            archive: ArchiveSpec::default(),
            domain: DomainConfig::default(),
            replicates: default_replicates(),
            base_seed: 0,
            snapshot_cadence: default_cadence(),
            output_dir: default_output_dir(),
        }
    }

    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value = parse_toml(text)?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let config: ExperimentConfig = from_value(value)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        if self.domain.rows == 0 || self.domain.cols == 0 {
            return Err(Error::config("domain", "grid must have at least one cell"));
        }
        self.map_elites().map(|_| ())
    }

    /// Loop setup shared by all replicates; the seed is left at zero.
    pub fn map_elites(&self) -> Result<MapElites> {
        MapElites::new(
            &self.encodings,
            self.domain.shape(),
            self.archive.clone(),
            self.loop_config.clone(),
            self.snapshot_cadence,
        )
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.replicates as u64).map(|r| self.base_seed + r).collect()
    }

    /// SHA-256 over the canonical JSON form, ignoring `output_dir`.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

pub(crate) fn parse_toml(text: &str) -> Result<toml::Value> {
    text.parse::<toml::Table>()
        .map(toml::Value::Table)
        .map_err(|e| Error::config("<file>", e.to_string().trim_end()))
}

/// Deserializes with the failing field's path in the error.
pub(crate) fn from_value<T: DeserializeOwned>(value: toml::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
    })
}

/// Applies `dotted.path=value`. The value is read as a TOML literal when it
/// parses as one and as a bare string otherwise. Array elements are
/// addressed by index (`encodings.0.p_mut` or `encodings[0].p_mut`).
pub fn apply_override(root: &mut toml::Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must look like key.path=value"))?;
    let path = path.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let segments: Vec<String> = path
        .replace('[', ".")
        .replace(']', "")
        .split('.')
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect();
    let (last, parents) = segments
        .split_last()
        .ok_or_else(|| Error::config(path, "empty override path"))?;
    let mut node = root;
    for seg in parents {
        node = step(node, seg, path)?;
    }
    match node {
        toml::Value::Table(t) => {
            t.insert(last.clone(), value);
        }
        toml::Value::Array(a) => {
            let i = index(last, a.len(), path)?;
            a[i] = value;
        }
        _ => return Err(Error::config(path, "cannot override inside a scalar value")),
    }
    Ok(())
}

fn step<'a>(node: &'a mut toml::Value, seg: &str, path: &str) -> Result<&'a mut toml::Value> {
    match node {
        toml::Value::Table(t) => Ok(t
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))),
        toml::Value::Array(a) => {
            let i = index(seg, a.len(), path)?;
            Ok(&mut a[i])
        }
        _ => Err(Error::config(path, "cannot override inside a scalar value")),
    }
}

fn index(seg: &str, len: usize, path: &str) -> Result<usize> {
    let i: usize = seg
        .parse()
        .map_err(|_| Error::config(path, format!("`{seg}` is not an array index")))?;
    if i >= len {
        return Err(Error::config(path, format!("index {i} out of range (length {len})")));
    }
    Ok(i)
}
