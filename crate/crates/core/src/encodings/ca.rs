//! Neural cellular automaton grown from a single seed cell.
//!
//! The state is real-valued. Every step replaces each cell with the
//! mask-weighted sum over its `n x n` neighbourhood (cells outside the grid
//! count as zero) and clamps the result to `[0, 3]`. After the last step the
//! state is rounded half-up to height levels.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phenotype::{GridShape, HeightGrid, MAX_LEVEL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaGenome {
    /// Seed column.
    pub seed_x: usize,
    /// Seed row.
    pub seed_y: usize,
    pub mask_size: usize,
    /// Row-major `mask_size x mask_size` weights; the centre weight applies
    /// to the cell itself.
    pub mask: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaConfig {
    pub p_mut: f64,
    pub sigma: f64,
    pub mask_size: usize,
    pub steps: usize,
}

impl Default for CaConfig {
    fn default() -> Self {
        CaConfig {
            p_mut: 0.05,
            sigma: 0.3,
            mask_size: 3,
            steps: 10,
        }
    }
}

pub fn check_mask_size(mask_size: usize) -> Result<()> {
    if mask_size < 3 || mask_size.is_multiple_of(2) {
        return Err(Error::config(
            "mask_size",
            format!("neighbourhood size must be odd and at least 3, got {mask_size}"),
        ));
    }
    Ok(())
}

impl CaGenome {
    pub fn is_valid(&self, shape: GridShape) -> bool {
        check_mask_size(self.mask_size).is_ok()
            && self.mask.len() == self.mask_size * self.mask_size
            && self.seed_x < shape.cols
            && self.seed_y < shape.rows
            && self.mask.iter().all(|w| w.is_finite())
    }
}

pub fn random<R: Rng + ?Sized>(mask_size: usize, shape: GridShape, rng: &mut R) -> Result<CaGenome> {
    check_mask_size(mask_size)?;
    let seed_x = rng.random_range(0..shape.cols);
    let seed_y = rng.random_range(0..shape.rows);
    let mask = (0..mask_size * mask_size)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    Ok(CaGenome {
        seed_x,
        seed_y,
        mask_size,
        mask,
    })
}

/// Runs `steps` synchronous updates from the seed and quantizes the result.
pub fn decode(genome: &CaGenome, steps: usize, shape: GridShape) -> HeightGrid {
    let (rows, cols) = (shape.rows, shape.cols);
    let n = genome.mask_size;
    let half = (n / 2) as isize;
    let mut state = vec![0.0f64; rows * cols];
    state[genome.seed_y * cols + genome.seed_x] = 1.0;
    let mut next = vec![0.0f64; rows * cols];
    for _ in 0..steps {
        for r in 0..rows {
            for c in 0..cols {
                let mut sum = 0.0;
                for mi in 0..n {
                    let rr = r as isize + mi as isize - half;
                    if rr < 0 || rr >= rows as isize {
                        continue;
                    }
                    let row = &state[rr as usize * cols..(rr as usize + 1) * cols];
                    let weights = &genome.mask[mi * n..(mi + 1) * n];
                    for (mj, w) in weights.iter().enumerate() {
                        let cc = c as isize + mj as isize - half;
                        if cc >= 0 && cc < cols as isize {
                            sum += w * row[cc as usize];
                        }
                    }
                }
                next[r * cols + c] = sum.clamp(0.0, MAX_LEVEL as f64);
            }
        }
        std::mem::swap(&mut state, &mut next);
    }
    let levels = state
        .iter()
        .map(|&v| ((v + 0.5).floor() as u8).min(MAX_LEVEL))
        .collect();
    HeightGrid::from_levels(shape, levels).expect("clamped state is a valid grid")
}

fn shift<R: Rng + ?Sized>(v: usize, extent: usize, rng: &mut R) -> usize {
    if rng.random_bool(0.5) {
        (v + 1).min(extent - 1)
    } else {
        v.saturating_sub(1)
    }
}

pub fn mutate<R: Rng + ?Sized>(
    genome: &CaGenome,
    p_mut: f64,
    sigma: f64,
    shape: GridShape,
    rng: &mut R,
) -> CaGenome {
    let normal = Normal::new(0.0, sigma).expect("sigma must be positive and finite");
    let mut seed_x = genome.seed_x;
    if rng.random_bool(p_mut) {
        seed_x = shift(seed_x, shape.cols, rng);
    }
    let mut seed_y = genome.seed_y;
    if rng.random_bool(p_mut) {
        seed_y = shift(seed_y, shape.rows, rng);
    }
    let mask = genome
        .mask
        .iter()
        .map(|&w| if rng.random_bool(p_mut) { w + normal.sample(rng) } else { w })
        .collect();
    CaGenome {
        seed_x,
        seed_y,
        mask_size: genome.mask_size,
        mask,
    }
}
