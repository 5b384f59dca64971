//! Archive metrics: coverage, QD-score, mean fitness and L0.1 phenotypic
//! diversity, plus significance testing and Pareto ranking.

pub mod pareto;
pub mod stats;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use pareto::{dominates, pareto_fronts, select_best};
pub use stats::{welch_t_test, TTestResult};

use crate::encodings::EncodingTag;
use crate::error::{Error, Result};
use crate::phenotype::{flatten, HeightGrid, MAX_LEVEL};
use crate::qd::Archive;

/// Exponent of the fractional norm used for phenotype distances.
pub const NORM_EXPONENT: f64 = 0.1;

pub fn coverage(archive: &Archive) -> f64 {
    archive.filled_bins() as f64 / archive.total_bins() as f64
}

pub fn qd_score(archive: &Archive) -> f64 {
    archive.elites().map(|e| e.fitness).sum()
}

pub fn mean_fitness(archive: &Archive) -> f64 {
    if archive.is_empty() {
        0.0
    } else {
        qd_score(archive) / archive.filled_bins() as f64
    }
}

/// `(Σ |a_i - b_i|^0.1)^10`.
pub fn l01_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let s: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs().powf(NORM_EXPONENT))
        .sum();
    Ok(s.powf(1.0 / NORM_EXPONENT))
}

/// [`l01_distance`] between two grids of equal shape. Level differences are
/// 0..=3, so the per-cell terms come from a table.
pub fn grid_distance(a: &HeightGrid, b: &HeightGrid) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    let table: [f64; MAX_LEVEL as usize + 1] =
        std::array::from_fn(|d| (d as f64).powf(NORM_EXPONENT));
    let s: f64 = a
        .levels()
        .iter()
        .zip(b.levels())
        .map(|(&x, &y)| table[x.abs_diff(y) as usize])
        .sum();
    s.powf(1.0 / NORM_EXPONENT)
}

/// Sum of distances over unordered pairs of elite phenotypes.
pub fn phenotypic_diversity(archive: &Archive) -> f64 {
    let grids: Vec<&HeightGrid> = archive.elites().map(|e| &e.phenotype).collect();
    let mut total = 0.0;
    for (i, a) in grids.iter().enumerate() {
        for b in &grids[i + 1..] {
            total += grid_distance(a, b);
        }
    }
    total
}

/// Same as [`phenotypic_diversity`] via the generic real-vector distance.
pub fn phenotypic_diversity_slow(archive: &Archive) -> f64 {
    let vectors: Vec<Vec<f64>> = archive.elites().map(|e| flatten(&e.phenotype)).collect();
    let mut total = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for b in &vectors[i + 1..] {
            total += l01_distance(a, b).expect("equal phenotype shapes");
        }
    }
    total
}

/// One row of a run's metric stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub generation: u64,
    pub coverage: f64,
    pub qd_score: f64,
    pub mean_fitness: f64,
    pub phenotypic_diversity: f64,
    /// Archive share per encoding, indexed by [`EncodingTag::index`].
    pub proportions: [f64; 5],
}

impl RunMetrics {
    pub fn measure(generation: u64, archive: &Archive) -> Self {
        RunMetrics {
            generation,
            coverage: coverage(archive),
            qd_score: qd_score(archive),
            mean_fitness: mean_fitness(archive),
            phenotypic_diversity: phenotypic_diversity(archive),
            proportions: archive.encoding_proportions(),
        }
    }

    pub fn proportion(&self, tag: EncodingTag) -> f64 {
        self.proportions[tag.index()]
    }
}

pub const METRICS_HEADER: [&str; 10] = [
    "generation",
    "coverage",
    "qd_score",
    "mean_fitness",
    "phenotypic_diversity",
    "prop_direct",
    "prop_dictionary",
    "prop_parametric",
    "prop_cppn",
    "prop_ca",
];

#[derive(Serialize, Deserialize)]
struct MetricsRow {
    generation: u64,
    coverage: f64,
    qd_score: f64,
    mean_fitness: f64,
    phenotypic_diversity: f64,
    prop_direct: f64,
    prop_dictionary: f64,
    prop_parametric: f64,
    prop_cppn: f64,
    prop_ca: f64,
}

impl From<&RunMetrics> for MetricsRow {
    fn from(m: &RunMetrics) -> Self {
        let [prop_direct, prop_dictionary, prop_parametric, prop_cppn, prop_ca] = m.proportions;
        MetricsRow {
            generation: m.generation,
            coverage: m.coverage,
            qd_score: m.qd_score,
            mean_fitness: m.mean_fitness,
            phenotypic_diversity: m.phenotypic_diversity,
            prop_direct,
            prop_dictionary,
            prop_parametric,
            prop_cppn,
            prop_ca,
        }
    }
}

impl From<MetricsRow> for RunMetrics {
    fn from(r: MetricsRow) -> Self {
        RunMetrics {
            generation: r.generation,
            coverage: r.coverage,
            qd_score: r.qd_score,
            mean_fitness: r.mean_fitness,
            phenotypic_diversity: r.phenotypic_diversity,
            proportions: [r.prop_direct, r.prop_dictionary, r.prop_parametric, r.prop_cppn, r.prop_ca],
        }
    }
}

/// Writes a metric stream as CSV with [`METRICS_HEADER`].
pub fn write_metrics_csv<W: Write>(writer: W, rows: &[RunMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for m in rows {
        w.serialize(MetricsRow::from(m)).map_err(csv_error("metrics"))?;
    }
    w.flush().map_err(|e| Error::io("metrics", e))?;
    Ok(())
}

pub fn read_metrics_csv<R: Read>(reader: R, location: &str) -> Result<Vec<RunMetrics>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r
        .headers()
        .map_err(csv_error(location))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header != METRICS_HEADER {
        return Err(Error::Parse {
            location: format!("{location}:1"),
            message: format!("unexpected header {header:?}"),
        });
    }
    r.deserialize::<MetricsRow>()
        .map(|row| row.map(RunMetrics::from).map_err(csv_error(location)))
        .collect()
}

fn csv_error(location: &str) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        Error::Parse {
            location: format!("{location}:{line}"),
            message: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::{DirectGenome, Genome};
    use crate::phenotype::{features, GridShape};
    use crate::qd::{ArchiveSpec, Elite};
    use approx::assert_relative_eq;

    fn elite_from(grid: HeightGrid, fitness: f64, tag: EncodingTag) -> Elite {
        Elite {
            genome: Genome::Direct(DirectGenome { heights: grid.levels().to_vec() }),
            features: features(&grid),
            phenotype: grid,
            fitness,
            encoding_tag: tag,
            species: 0,
            birth_generation: 0,
        }
    }

    #[test]
    fn distance_examples() {
        let a = vec![0.0; 154];
        assert_eq!(l01_distance(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        b[3] = 1.0;
        assert_eq!(l01_distance(&a, &b).unwrap(), 1.0);
        b[100] = 1.0;
        assert_eq!(l01_distance(&a, &b).unwrap(), 1024.0);
        assert!(l01_distance(&a, &b[1..]).is_err());
    }

    #[test]
    fn table_distance_agrees() {
        let shape = GridShape::new(3, 3);
        let a = HeightGrid::from_levels(shape, vec![0, 1, 2, 3, 0, 1, 2, 3, 0]).unwrap();
        let b = HeightGrid::from_levels(shape, vec![3, 3, 0, 0, 1, 1, 2, 2, 0]).unwrap();
        assert_relative_eq!(
            grid_distance(&a, &b),
            l01_distance(&flatten(&a), &flatten(&b)).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn empty_archive_metrics() {
        let a = Archive::from_spec(&ArchiveSpec::default(), 154).unwrap();
        let m = RunMetrics::measure(0, &a);
        assert_eq!((m.coverage, m.qd_score, m.mean_fitness, m.phenotypic_diversity), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(m.proportions, [0.0; 5]);
    }

    #[test]
    fn three_elite_diversity() {
        // level grids cannot realise distances 1, 1024, 1024 (parity), so
        // that case is checked on real vectors
        let y = (2.0 - 0.5f64.powf(0.1)).powi(10);
        let pts = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, y]];
        let mut sum = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                sum += l01_distance(&pts[i], &pts[j]).unwrap();
            }
        }
        assert_relative_eq!(sum, 2049.0, max_relative = 1e-9);

        let shape = GridShape::new(1, 4);
        let mut a = Archive::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.0, 4.0]).unwrap();
        let g = |v: Vec<u8>| HeightGrid::from_levels(shape, v).unwrap();
        a.try_replace(elite_from(g(vec![1, 0, 0, 0]), 0.5, EncodingTag::Direct));
        a.try_replace(elite_from(g(vec![1, 1, 0, 0]), 0.5, EncodingTag::Direct));
        a.try_replace(elite_from(g(vec![1, 1, 1, 1]), 0.25, EncodingTag::Ca));
        assert_eq!(a.filled_bins(), 3);
        // d(1000,1100)=1, d(1000,1111)=3^10, d(1100,1111)=2^10
        let expected = 1.0 + 59049.0 + 1024.0;
        assert_relative_eq!(phenotypic_diversity(&a), expected, max_relative = 1e-12);
        assert_relative_eq!(qd_score(&a), 1.25);
        assert_relative_eq!(coverage(&a), 0.75);
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            RunMetrics {
                generation: 0,
                coverage: 0.5,
                qd_score: 1.0 / 3.0,
                mean_fitness: 0.1,
                phenotypic_diversity: 6.653e22,
                proportions: [0.2, 0.2, 0.2, 0.2, 0.2],
            },
            RunMetrics {
                generation: 100,
                coverage: 0.9765625,
                qd_score: 105.0,
                mean_fitness: 0.42,
                phenotypic_diversity: 0.0,
                proportions: [1.0, 0.0, 0.0, 0.0, 0.0],
            },
        ];
        let mut buf = Vec::new();
        write_metrics_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&METRICS_HEADER.join(",")));
        assert_eq!(read_metrics_csv(&buf[..], "mem").unwrap(), rows);
        assert!(read_metrics_csv("a,b\n1,2\n".as_bytes(), "x").is_err());
    }
}
