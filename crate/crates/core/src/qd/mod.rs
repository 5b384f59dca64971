//! MAP-Elites over height grids, single- or multi-encoding.
//!
//! In multi-encoding mode every configured encoding is a species: the
//! initial population is split evenly between them, each child is mutated by
//! its parent's own operator and species meet only through the archive's
//! fitness comparison. Nothing re-introduces a species that has lost all of
//! its bins.

pub mod archive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use archive::{Archive, ArchiveSnapshot, ArchiveSpec, BinnedElite, Elite};

use crate::encodings::{Encoder, EncodingConfig, Genome};
use crate::error::{Error, Result};
use crate::metrics::RunMetrics;
use crate::phenotype::{self, GridShape, HeightGrid, InflowAxis};

/// Quality of a phenotype, higher is better, in `[0, 1]`.
pub trait Fitness: Sync {
    fn fitness(&self, grid: &HeightGrid) -> f64;
}

impl<F: Fn(&HeightGrid) -> f64 + Sync> Fitness for F {
    fn fitness(&self, grid: &HeightGrid) -> f64 {
        self(grid)
    }
}

/// Inflow-silhouette surrogate, see [`phenotype::fitness`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Surrogate {
    pub inflow: InflowAxis,
}

impl Fitness for Surrogate {
    fn fitness(&self, grid: &HeightGrid) -> f64 {
        phenotype::fitness(grid, self.inflow)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopConfig {
    pub init_population: usize,
    pub children_per_generation: usize,
    pub max_generations: u64,
    /// Set per replicate by the experiment harness; not read from files.
    #[serde(skip)]
    pub rng_seed: u64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            init_population: 100,
            children_per_generation: 10,
            max_generations: 50_000,
            rng_seed: 0,
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        if self.init_population == 0 {
            return Err(Error::config("loop.init_population", "must be positive"));
        }
        if self.children_per_generation == 0 {
            return Err(Error::config("loop.children_per_generation", "must be positive"));
        }
        Ok(())
    }
}

/// Callbacks invoked while a run progresses.
pub trait Observer {
    /// After initialization (generation 0) and after each generation's
    /// insertions.
    fn on_generation(&mut self, _generation: u64, _archive: &Archive) {}

    fn on_snapshot(&mut self, _metrics: &RunMetrics) {}
}

impl Observer for () {}

/// Everything a run needs besides the fitness function.
#[derive(Clone, Debug)]
pub struct MapElites {
    pub encoders: Vec<Encoder>,
    pub archive_spec: ArchiveSpec,
    pub loop_config: LoopConfig,
    /// Generations between metric snapshots. Generation 0 and the final
    /// generation are always recorded.
    pub snapshot_cadence: u64,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub archive: Archive,
    pub metrics: Vec<RunMetrics>,
}

impl MapElites {
    pub fn new(
        encodings: &[EncodingConfig],
        shape: GridShape,
        archive_spec: ArchiveSpec,
        loop_config: LoopConfig,
        snapshot_cadence: u64,
    ) -> Result<Self> {
        if encodings.is_empty() {
            return Err(Error::config("encodings", "at least one encoding is required"));
        }
        loop_config.validate()?;
        if snapshot_cadence == 0 {
            return Err(Error::config("snapshot_cadence", "must be positive"));
        }
        let encoders = encodings
            .iter()
            .enumerate()
            .map(|(i, c)| {
                Encoder::new(c.clone(), shape).map_err(|e| match e {
                    Error::Config { field, message } => {
                        Error::config(format!("encodings[{i}].{field}"), message)
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        archive_spec.edges(shape.cells())?;
        Ok(MapElites {
            encoders,
            archive_spec,
            loop_config,
            snapshot_cadence,
        })
    }

    pub fn shape(&self) -> GridShape {
        self.encoders[0].shape()
    }

    fn evaluate(&self, genome: Genome, species: usize, generation: u64, fitness: &dyn Fitness) -> Elite {
        let encoder = &self.encoders[species];
        let phenotype = encoder.decode(&genome);
        Elite {
            fitness: fitness.fitness(&phenotype),
            features: phenotype::features(&phenotype),
            encoding_tag: encoder.tag(),
            species,
            birth_generation: generation,
            genome,
            phenotype,
        }
    }

    /// Random genomes split evenly over the species. Species interleave so
    /// that equal-fitness ties do not favour the first encoding.
    fn initial_population(&self, rng: &mut ChaCha8Rng, fitness: &dyn Fitness) -> Vec<Elite> {
        let species = self.encoders.len();
        (0..self.loop_config.init_population)
            .map(|i| {
                let s = i % species;
                let genome = self.encoders[s].random(rng);
                self.evaluate(genome, s, 0, fitness)
            })
            .collect()
    }

    /// Runs the loop with the seed in `loop_config`.
    pub fn run(&self, fitness: &dyn Fitness, observer: &mut dyn Observer) -> RunOutcome {
        let cfg = &self.loop_config;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        let mut archive = Archive::from_spec(&self.archive_spec, self.shape().cells())
            .expect("archive spec validated on construction");
        let mut metrics = Vec::new();
        let mut record = |generation: u64, archive: &Archive, observer: &mut dyn Observer| {
            let m = RunMetrics::measure(generation, archive);
            observer.on_snapshot(&m);
            metrics.push(m);
        };

        for elite in self.initial_population(&mut rng, fitness) {
            archive.try_replace(elite);
        }
        observer.on_generation(0, &archive);
        record(0, &archive, observer);

        for generation in 1..=cfg.max_generations {
            let filled = archive.filled_bins();
            let children: Vec<Elite> = (0..cfg.children_per_generation)
                .map(|_| {
                    let parent = archive.nth_filled(rng.random_range(0..filled));
                    let child = self.encoders[parent.species].mutate(&parent.genome, &mut rng);
                    (child, parent.species)
                })
                .collect::<Vec<_>>()
                .into_iter()
                .map(|(genome, s)| self.evaluate(genome, s, generation, fitness))
                .collect();
            for child in children {
                archive.try_replace(child);
            }
            observer.on_generation(generation, &archive);
            if generation % self.snapshot_cadence == 0 || generation == cfg.max_generations {
                record(generation, &archive, observer);
            }
        }
        RunOutcome { archive, metrics }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::{DirectConfig, EncodingTag};

    fn toy(max_generations: u64, seed: u64) -> MapElites {
        let mut m = MapElites::new(
            &[EncodingConfig::Direct(DirectConfig { p_mut: 0.25 })],
            GridShape::new(2, 2),
            ArchiveSpec {
                area_edges: Some(vec![0.0, 1.0, 2.0, 3.0, 4.0]),
                count_edges: Some(vec![0.0, 1.0, 2.0]),
                ..Default::default()
            },
            LoopConfig {
                init_population: 10,
                children_per_generation: 10,
                max_generations,
                rng_seed: seed,
            },
            10,
        )
        .unwrap();
        m.loop_config.rng_seed = seed;
        m
    }

    #[test]
    fn zero_generations_is_initialization_only() {
        let m = toy(0, 1);
        let out = m.run(&Surrogate::default(), &mut ());
        assert_eq!(out.metrics.len(), 1);
        assert_eq!(out.metrics[0].generation, 0);
        assert!(out.archive.elites().all(|e| e.birth_generation == 0));
    }

    #[test]
    fn same_seed_same_stream() {
        let a = toy(200, 5).run(&Surrogate::default(), &mut ());
        let b = toy(200, 5).run(&Surrogate::default(), &mut ());
        assert_eq!(a.metrics, b.metrics);
        assert_eq!(a.archive, b.archive);
        let c = toy(200, 6).run(&Surrogate::default(), &mut ());
        assert_ne!(a.archive.to_snapshot(), c.archive.to_snapshot());
    }

    #[test]
    fn snapshots_follow_cadence() {
        let out = toy(25, 1).run(&Surrogate::default(), &mut ());
        let gens: Vec<u64> = out.metrics.iter().map(|m| m.generation).collect();
        assert_eq!(gens, vec![0, 10, 20, 25]);
    }

    #[test]
    fn elites_match_reevaluation() {
        let m = toy(100, 3);
        let out = m.run(&Surrogate::default(), &mut ());
        for e in out.archive.elites() {
            let grid = m.encoders[e.species].decode(&e.genome);
            assert_eq!(grid, e.phenotype);
            assert_eq!(phenotype::features(&grid), e.features);
            assert_eq!(Surrogate::default().fitness(&grid), e.fitness);
            assert_eq!(out.archive.get(out.archive.bin_of(e.features)), Some(e));
        }
    }

    #[test]
    fn config_errors_name_the_field() {
        let err = MapElites::new(
            &[
                EncodingConfig::default_for(EncodingTag::Direct),
                EncodingConfig::Ca(crate::encodings::CaConfig {
                    mask_size: 2,
                    ..Default::default()
                }),
            ],
            GridShape::SITE,
            ArchiveSpec::default(),
            LoopConfig::default(),
            100,
        )
        .unwrap_err();
        assert!(err.to_string().contains("encodings[1].mask_size"), "{err}");
        assert!(MapElites::new(&[], GridShape::SITE, ArchiveSpec::default(), LoopConfig::default(), 1).is_err());
    }

    #[test]
    fn multi_encoding_splits_initial_population() {
        let configs: Vec<EncodingConfig> = EncodingTag::ALL.iter().map(|&t| EncodingConfig::default_for(t)).collect();
        let mut m = MapElites::new(
            &configs,
            GridShape::SITE,
            ArchiveSpec::default(),
            LoopConfig {
                init_population: 100,
                max_generations: 0,
                ..Default::default()
            },
            100,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let initial = m.initial_population(&mut rng, &Surrogate::default());
        for s in 0..5 {
            assert_eq!(initial.iter().filter(|e| e.species == s).count(), 20);
            assert!(initial.iter().filter(|e| e.species == s).all(|e| e.encoding_tag == EncodingTag::ALL[s]));
        }
        m.loop_config.rng_seed = 9;
        let out = m.run(&Surrogate::default(), &mut ());
        let p = out.archive.encoding_proportions();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
