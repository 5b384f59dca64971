//! Fixed-topology compositional pattern producing network queried once per
//! cell.
//!
//! Inputs are the cell's column and row mapped to `[-1, 1]` plus a constant
//! bias of 1. One or two fully connected hidden layers feed a single tanh
//! output, which is binned into a height level by three ascending
//! thresholds.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::phenotype::{GridShape, HeightGrid};

const INPUTS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Gaussian,
    Tanh,
    Sigmoid,
    Sine,
    Cosine,
    Zero,
    One,
    Step,
}

impl Activation {
    pub const ALL: [Activation; 8] = [
        Activation::Gaussian,
        Activation::Tanh,
        Activation::Sigmoid,
        Activation::Sine,
        Activation::Cosine,
        Activation::Zero,
        Activation::One,
        Activation::Step,
    ];

    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Gaussian => (-z * z).exp(),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Sine => z.sin(),
            Activation::Cosine => z.cos(),
            Activation::Zero => 0.0,
            Activation::One => 1.0,
            Activation::Step => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CppnGenome {
    pub hidden_layers: usize,
    pub hidden_neurons: usize,
    /// First layer (neuron-major, `[x, y, bias]` per neuron), then each
    /// further hidden layer (neuron-major), then the output neuron.
    pub weights: Vec<f64>,
    /// One per hidden neuron, layer by layer.
    pub activations: Vec<Activation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CppnConfig {
    pub p_mut: f64,
    pub sigma: f64,
    pub hidden_layers: usize,
    pub hidden_neurons: usize,
    /// Output values below `thresholds[0]` map to level 0, at or above
    /// `thresholds[2]` to level 3.
    pub thresholds: [f64; 3],
}

impl Default for CppnConfig {
    fn default() -> Self {
        CppnConfig {
            p_mut: 0.05,
            sigma: 0.3,
            hidden_layers: 1,
            hidden_neurons: 16,
            thresholds: [-0.5, 0.0, 0.5],
        }
    }
}

pub fn weight_count(hidden_layers: usize, hidden_neurons: usize) -> usize {
    INPUTS * hidden_neurons
        + hidden_layers.saturating_sub(1) * hidden_neurons * hidden_neurons
        + hidden_neurons
}

pub fn random<R: Rng + ?Sized>(hidden_layers: usize, hidden_neurons: usize, rng: &mut R) -> CppnGenome {
    let weights = (0..weight_count(hidden_layers, hidden_neurons))
        .map(|_| StandardNormal.sample(rng))
        .collect();
    let activations = (0..hidden_layers * hidden_neurons)
        .map(|_| Activation::ALL[rng.random_range(0..Activation::ALL.len())])
        .collect();
    CppnGenome {
        hidden_layers,
        hidden_neurons,
        weights,
        activations,
    }
}

impl CppnGenome {
    pub fn is_valid(&self) -> bool {
        (1..=2).contains(&self.hidden_layers)
            && self.hidden_neurons > 0
            && self.weights.len() == weight_count(self.hidden_layers, self.hidden_neurons)
            && self.activations.len() == self.hidden_layers * self.hidden_neurons
            && self.weights.iter().all(|w| w.is_finite())
    }

    /// Network output in `[-1, 1]` for one query point.
    pub fn query(&self, x: f64, y: f64) -> f64 {
        let n = self.hidden_neurons;
        let mut weights = self.weights.iter();
        let mut activations = self.activations.iter();
        let mut layer: Vec<f64> = vec![x, y, 1.0];
        for _ in 0..self.hidden_layers {
            layer = (0..n)
                .map(|_| {
                    let z: f64 = layer.iter().zip(weights.by_ref()).map(|(v, w)| v * w).sum();
                    activations.next().expect("activation count").apply(z)
                })
                .collect();
        }
        let z: f64 = layer.iter().zip(weights).map(|(v, w)| v * w).sum();
        z.tanh()
    }
}

fn normalized(i: usize, extent: usize) -> f64 {
    if extent <= 1 {
        0.0
    } else {
        -1.0 + 2.0 * i as f64 / (extent - 1) as f64
    }
}

/// Number of thresholds at or below `value`.
pub fn quantize(value: f64, thresholds: &[f64; 3]) -> u8 {
    thresholds.iter().filter(|&&t| value >= t).count() as u8
}

pub fn decode(genome: &CppnGenome, thresholds: &[f64; 3], shape: GridShape) -> HeightGrid {
    let mut grid = HeightGrid::zeros(shape);
    for row in 0..shape.rows {
        let y = normalized(row, shape.rows);
        for col in 0..shape.cols {
            let x = normalized(col, shape.cols);
            grid.set(row, col, quantize(genome.query(x, y), thresholds));
        }
    }
    grid
}

pub fn mutate<R: Rng + ?Sized>(genome: &CppnGenome, p_mut: f64, sigma: f64, rng: &mut R) -> CppnGenome {
    let normal = Normal::new(0.0, sigma).expect("sigma must be positive and finite");
    let weights = genome
        .weights
        .iter()
        .map(|&w| if rng.random_bool(p_mut) { w + normal.sample(rng) } else { w })
        .collect();
    let activations = genome
        .activations
        .iter()
        .map(|&a| {
            if rng.random_bool(p_mut) {
                Activation::ALL[rng.random_range(0..Activation::ALL.len())]
            } else {
                a
            }
        })
        .collect();
    CppnGenome {
        weights,
        activations,
        ..genome.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const THRESHOLDS: [f64; 3] = [-0.5, 0.0, 0.5];

    #[test]
    fn activation_definitions() {
        assert_eq!(Activation::Gaussian.apply(0.0), 1.0);
        assert!((Activation::Gaussian.apply(1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(Activation::Sigmoid.apply(0.0), 0.5);
        assert_eq!(Activation::Step.apply(0.0), 0.0);
        assert_eq!(Activation::Step.apply(1e-9), 1.0);
        assert_eq!(Activation::Zero.apply(7.0), 0.0);
        assert_eq!(Activation::One.apply(-7.0), 1.0);
        assert_eq!(Activation::Cosine.apply(0.0), 1.0);
    }

    #[test]
    fn weight_counts() {
        assert_eq!(weight_count(1, 16), 64);
        assert_eq!(weight_count(2, 4), 12 + 16 + 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(random(2, 5, &mut rng).is_valid());
    }

    #[test]
    fn quantization_bins() {
        assert_eq!(quantize(-1.0, &THRESHOLDS), 0);
        assert_eq!(quantize(-0.5, &THRESHOLDS), 1);
        assert_eq!(quantize(0.0, &THRESHOLDS), 2);
        assert_eq!(quantize(0.49, &THRESHOLDS), 2);
        assert_eq!(quantize(1.0, &THRESHOLDS), 3);
    }

    #[test]
    fn zero_network_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut g = random(1, 16, &mut rng);
        g.weights.iter_mut().for_each(|w| *w = 0.0);
        let grid = decode(&g, &THRESHOLDS, GridShape::SITE);
        assert_eq!(grid, HeightGrid::filled(GridShape::SITE, 2).unwrap());
    }

    #[test]
    fn saturated_constant_neuron_fills_to_top() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut g = random(1, 4, &mut rng);
        g.weights.iter_mut().for_each(|w| *w = 0.0);
        g.activations[0] = Activation::One;
        // output weights follow the 3*4 first-layer weights
        g.weights[12] = 10.0;
        let grid = decode(&g, &THRESHOLDS, GridShape::SITE);
        assert_eq!(grid, HeightGrid::filled(GridShape::SITE, 3).unwrap());
    }

    #[test]
    fn decoding_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random(2, 8, &mut rng);
        assert_eq!(decode(&g, &THRESHOLDS, GridShape::SITE), decode(&g, &THRESHOLDS, GridShape::SITE));
    }

    #[test]
    fn mutation_keeps_topology() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random(2, 6, &mut rng);
        assert_eq!(mutate(&g, 0.0, 0.3, &mut rng), g);
        let m = mutate(&g, 1.0, 0.3, &mut rng);
        assert!(m.is_valid());
        assert_eq!((m.hidden_layers, m.hidden_neurons), (2, 6));
        assert!(g.weights.iter().zip(&m.weights).all(|(a, b)| a != b));
    }

    #[test]
    fn weight_steps_are_half_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sigma = 0.3;
        let g = random(1, 1, &mut rng);
        let trials = 10_000;
        let mut sum = 0.0;
        let mut n = 0usize;
        for _ in 0..trials {
            let m = mutate(&g, 1.0, sigma, &mut rng);
            for (a, b) in g.weights.iter().zip(&m.weights) {
                sum += (b - a).abs();
                n += 1;
            }
        }
        let mean = sum / n as f64;
        let expected = sigma * (2.0 / std::f64::consts::PI).sqrt();
        // sd of |N(0, s)| is s * sqrt(1 - 2/pi)
        let se = sigma * (1.0 - 2.0 / std::f64::consts::PI).sqrt() / (n as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se, "mean {mean}, expected {expected}");
    }
}
