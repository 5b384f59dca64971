//! One gene per grid cell; the genome is the phenotype.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::phenotype::{GridShape, HeightGrid, MAX_LEVEL};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectGenome {
    pub heights: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirectConfig {
    pub p_mut: f64,
}

impl Default for DirectConfig {
    fn default() -> Self {
        DirectConfig { p_mut: 0.05 }
    }
}

pub fn random<R: Rng + ?Sized>(shape: GridShape, rng: &mut R) -> DirectGenome {
    DirectGenome {
        heights: (0..shape.cells()).map(|_| rng.random_range(0..=MAX_LEVEL)).collect(),
    }
}

pub fn decode(genome: &DirectGenome, shape: GridShape) -> HeightGrid {
    HeightGrid::from_levels(shape, genome.heights.clone())
        .expect("direct genome does not match the grid shape")
}

/// Each gene moves one level up or down with probability `p_mut`. A gene
/// sitting at a bound can only move inwards, so a selected gene always
/// changes.
pub fn mutate<R: Rng + ?Sized>(genome: &DirectGenome, p_mut: f64, rng: &mut R) -> DirectGenome {
    let heights = genome
        .heights
        .iter()
        .map(|&h| {
            if !rng.random_bool(p_mut) {
                return h;
            }
            let up = rng.random_bool(0.5);
            match h {
                0 => 1,
                MAX_LEVEL => MAX_LEVEL - 1,
                _ if up => h + 1,
                _ => h - 1,
            }
        })
        .collect();
    DirectGenome { heights }
}
