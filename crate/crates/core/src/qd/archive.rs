use serde::{Deserialize, Serialize};

use crate::encodings::{EncodingTag, Genome};
use crate::error::{Error, Result};
use crate::phenotype::{Features, HeightGrid};

/// Archive resolution. Area edges default to `area_bins` uniform bins over
/// `[0, grid cells]`, count edges to `count_bins` uniform bins over
/// `[0, count_max]`; explicit edge lists override both.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchiveSpec {
    pub area_bins: usize,
    pub count_bins: usize,
    pub count_max: f64,
    pub area_edges: Option<Vec<f64>>,
    pub count_edges: Option<Vec<f64>>,
}

impl Default for ArchiveSpec {
    fn default() -> Self {
        ArchiveSpec {
            area_bins: 16,
            count_bins: 16,
            count_max: 16.0,
            area_edges: None,
            count_edges: None,
        }
    }
}

pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    (0..=bins)
        .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
        .collect()
}

fn check_edges(field: &str, edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::config(field, "need at least two edges (one bin)"));
    }
    if edges.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::config(field, "edges must be strictly increasing"));
    }
    Ok(())
}

impl ArchiveSpec {
    /// Resolves the edge arrays for a grid with `cells` cells.
    pub fn edges(&self, cells: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let area = match &self.area_edges {
            Some(e) => e.clone(),
            None => {
                if self.area_bins == 0 {
                    return Err(Error::config("archive.area_bins", "must be positive"));
                }
                uniform_edges(0.0, cells as f64, self.area_bins)
            }
        };
        let count = match &self.count_edges {
            Some(e) => e.clone(),
            None => {
                if self.count_bins == 0 {
                    return Err(Error::config("archive.count_bins", "must be positive"));
                }
                if self.count_max.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                    return Err(Error::config("archive.count_max", "must be positive"));
                }
                uniform_edges(0.0, self.count_max, self.count_bins)
            }
        };
        check_edges("archive.area_edges", &area)?;
        check_edges("archive.count_edges", &count)?;
        Ok((area, count))
    }
}

/// Bin holding `value`: the first bin whose upper edge is not below it, so
/// a value on a shared edge goes to the lower bin. Values past the last
/// edge land in the last bin.
pub fn bin_index(value: f64, edges: &[f64]) -> usize {
    let bins = edges.len() - 1;
    edges[1..]
        .iter()
        .position(|&upper| value <= upper)
        .unwrap_or(bins - 1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Elite {
    pub genome: Genome,
    pub phenotype: HeightGrid,
    pub fitness: f64,
    pub features: Features,
    pub encoding_tag: EncodingTag,
    /// Index of the encoding configuration that produced the genome.
    #[serde(default)]
    pub species: usize,
    pub birth_generation: u64,
}

/// MAP-Elites grid over (built area, building count).
#[derive(Clone, Debug, PartialEq)]
pub struct Archive {
    area_edges: Vec<f64>,
    count_edges: Vec<f64>,
    bins: Vec<Option<Elite>>,
    /// Filled bin indices in the order they were first filled.
    filled: Vec<usize>,
}

impl Archive {
    pub fn new(area_edges: Vec<f64>, count_edges: Vec<f64>) -> Result<Self> {
        check_edges("archive.area_edges", &area_edges)?;
        check_edges("archive.count_edges", &count_edges)?;
        let n = (area_edges.len() - 1) * (count_edges.len() - 1);
        Ok(Archive {
            area_edges,
            count_edges,
            bins: vec![None; n],
            filled: Vec::new(),
        })
    }

    pub fn from_spec(spec: &ArchiveSpec, cells: usize) -> Result<Self> {
        let (area, count) = spec.edges(cells)?;
        Archive::new(area, count)
    }

    pub fn area_edges(&self) -> &[f64] {
        &self.area_edges
    }

    pub fn count_edges(&self) -> &[f64] {
        &self.count_edges
    }

    pub fn area_bins(&self) -> usize {
        self.area_edges.len() - 1
    }

    pub fn count_bins(&self) -> usize {
        self.count_edges.len() - 1
    }

    pub fn total_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn filled_bins(&self) -> usize {
        self.filled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filled.is_empty()
    }

    /// (area bin, count bin) for a feature pair.
    pub fn bin_of(&self, features: Features) -> (usize, usize) {
        (
            bin_index(features.built_area as f64, &self.area_edges),
            bin_index(features.building_count as f64, &self.count_edges),
        )
    }

    fn flat(&self, bin: (usize, usize)) -> usize {
        bin.0 * self.count_bins() + bin.1
    }

    pub fn get(&self, bin: (usize, usize)) -> Option<&Elite> {
        self.bins.get(self.flat(bin))?.as_ref()
    }

    /// Inserts the candidate if its bin is empty or holds a strictly worse
    /// elite. Ties keep the incumbent.
    pub fn try_replace(&mut self, candidate: Elite) -> bool {
        let index = self.flat(self.bin_of(candidate.features));
        match &self.bins[index] {
            Some(incumbent) if incumbent.fitness >= candidate.fitness => false,
            Some(_) => {
                self.bins[index] = Some(candidate);
                true
            }
            None => {
                self.bins[index] = Some(candidate);
                self.filled.push(index);
                true
            }
        }
    }

    /// Elites in the order their bins were first filled.
    pub fn elites(&self) -> impl Iterator<Item = &Elite> + '_ {
        self.filled.iter().map(move |&i| self.bins[i].as_ref().expect("filled bin"))
    }

    /// Elites with their (area bin, count bin), in bin order.
    pub fn iter_bins(&self) -> impl Iterator<Item = ((usize, usize), &Elite)> + '_ {
        let cb = self.count_bins();
        self.bins
            .iter()
            .enumerate()
            .filter_map(move |(i, e)| e.as_ref().map(|e| ((i / cb, i % cb), e)))
    }

    /// The `k`-th filled bin's elite, in fill order.
    pub fn nth_filled(&self, k: usize) -> &Elite {
        self.bins[self.filled[k]].as_ref().expect("filled bin")
    }

    /// Fraction of filled bins per encoding, indexed by [`EncodingTag::index`].
    /// All zero for an empty archive.
    pub fn encoding_proportions(&self) -> [f64; 5] {
        let mut counts = [0usize; 5];
        for e in self.elites() {
            counts[e.encoding_tag.index()] += 1;
        }
        let n = self.filled_bins();
        if n == 0 {
            return [0.0; 5];
        }
        counts.map(|c| c as f64 / n as f64)
    }

    pub fn to_snapshot(&self) -> ArchiveSnapshot {
        ArchiveSnapshot {
            area_edges: self.area_edges.clone(),
            count_edges: self.count_edges.clone(),
            elites: self
                .iter_bins()
                .map(|(bin, e)| BinnedElite {
                    area_bin: bin.0,
                    count_bin: bin.1,
                    elite: e.clone(),
                })
                .collect(),
        }
    }

    /// Rebuilds an archive, checking each elite sits in the bin its features
    /// map to. Fill order becomes bin order.
    pub fn from_snapshot(snapshot: ArchiveSnapshot) -> Result<Self> {
        let mut archive = Archive::new(snapshot.area_edges, snapshot.count_edges)?;
        for (k, entry) in snapshot.elites.into_iter().enumerate() {
            let bin = archive.bin_of(entry.elite.features);
            if bin != (entry.area_bin, entry.count_bin) {
                return Err(Error::Parse {
                    location: format!("elites[{k}]"),
                    message: format!(
                        "elite stored in bin ({}, {}) but its features map to ({}, {})",
                        entry.area_bin, entry.count_bin, bin.0, bin.1
                    ),
                });
            }
            if archive.get(bin).is_some() {
                return Err(Error::Parse {
                    location: format!("elites[{k}]"),
                    message: "two elites in one bin".into(),
                });
            }
            archive.try_replace(entry.elite);
        }
        Ok(archive)
    }
}

/// Serialized form of an archive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveSnapshot {
    pub area_edges: Vec<f64>,
    pub count_edges: Vec<f64>,
    pub elites: Vec<BinnedElite>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinnedElite {
    pub area_bin: usize,
    pub count_bin: usize,
    pub elite: Elite,
}

impl ArchiveSnapshot {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }

    pub fn from_json(text: &str, location: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("{location}:{}:{}", e.line(), e.column()),
            message: e.to_string(),
        })
    }
}
