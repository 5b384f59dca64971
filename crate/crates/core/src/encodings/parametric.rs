//! A fixed number of axis-aligned rectangles, each raising the cells it
//! covers by one level. Overlapping rectangles stack up to the top level.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::phenotype::{GridShape, HeightGrid, MAX_LEVEL};

/// Column origin `x`, row origin `y`, width `w` (columns) and length `l`
/// (rows).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub l: u32,
}

impl Rect {
    /// Clamps raw parameters into the grid: sizes are floored at zero and
    /// capped at the grid extent, then the origin is moved so the rectangle
    /// fits.
    pub fn fitted(x: i64, y: i64, w: i64, l: i64, shape: GridShape) -> Rect {
        let (cols, rows) = (shape.cols as i64, shape.rows as i64);
        let w = w.clamp(0, cols);
        let l = l.clamp(0, rows);
        let x = x.clamp(0, cols - w.max(1));
        let y = y.clamp(0, rows - l.max(1));
        Rect {
            x: x as u32,
            y: y as u32,
            w: w as u32,
            l: l as u32,
        }
    }

    pub fn fits(&self, shape: GridShape) -> bool {
        (self.x as usize) < shape.cols
            && (self.y as usize) < shape.rows
            && (self.x + self.w) as usize <= shape.cols
            && (self.y + self.l) as usize <= shape.rows
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParametricGenome {
    pub rectangles: Vec<Rect>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParametricConfig {
    pub p_mut: f64,
    pub sigma: f64,
    pub rectangles: usize,
}

impl Default for ParametricConfig {
    fn default() -> Self {
        ParametricConfig {
            p_mut: 0.05,
            sigma: 0.3,
            rectangles: 8,
        }
    }
}

pub fn random<R: Rng + ?Sized>(rectangles: usize, shape: GridShape, rng: &mut R) -> ParametricGenome {
    let (cols, rows) = (shape.cols as u32, shape.rows as u32);
    let rectangles = (0..rectangles)
        .map(|_| {
            let w = rng.random_range(0..=cols);
            let l = rng.random_range(0..=rows);
            let x = rng.random_range(0..=cols - w.max(1));
            let y = rng.random_range(0..=rows - l.max(1));
            Rect { x, y, w, l }
        })
        .collect();
    ParametricGenome { rectangles }
}

pub fn decode(genome: &ParametricGenome, shape: GridShape) -> HeightGrid {
    let mut grid = HeightGrid::zeros(shape);
    for r in &genome.rectangles {
        for row in r.y..r.y + r.l {
            for col in r.x..r.x + r.w {
                let (row, col) = (row as usize, col as usize);
                let level = grid.get(row, col);
                grid.set(row, col, (level + 1).min(MAX_LEVEL));
            }
        }
    }
    grid
}

/// Integer step from a normal draw, rounded away from zero so that a
/// selected parameter always moves.
fn step<R: Rng + ?Sized>(normal: &Normal<f64>, rng: &mut R) -> i64 {
    let z = normal.sample(rng);
    z.signum() as i64 * z.abs().ceil() as i64
}

pub fn mutate<R: Rng + ?Sized>(
    genome: &ParametricGenome,
    p_mut: f64,
    sigma: f64,
    shape: GridShape,
    rng: &mut R,
) -> ParametricGenome {
    let normal = Normal::new(0.0, sigma).expect("sigma must be positive and finite");
    let mut perturb = |v: u32| {
        if rng.random_bool(p_mut) {
            v as i64 + step(&normal, rng)
        } else {
            v as i64
        }
    };
    let rectangles = genome
        .rectangles
        .iter()
        .map(|r| {
            let x = perturb(r.x);
            let y = perturb(r.y);
            let w = perturb(r.w);
            let l = perturb(r.l);
            Rect::fitted(x, y, w, l, shape)
        })
        .collect();
    ParametricGenome { rectangles }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SITE: GridShape = GridShape::SITE;

    #[test]
    fn empty_and_zero_width_rectangles_decode_to_nothing() {
        let none = ParametricGenome { rectangles: vec![] };
        assert_eq!(decode(&none, SITE), HeightGrid::zeros(SITE));
        let flat = ParametricGenome {
            rectangles: vec![Rect { x: 3, y: 3, w: 0, l: 4 }; 5],
        };
        assert_eq!(decode(&flat, SITE), HeightGrid::zeros(SITE));
    }

    #[test]
    fn rectangle_covers_its_cells() {
        let g = ParametricGenome {
            rectangles: vec![Rect { x: 0, y: 0, w: 2, l: 2 }],
        };
        let grid = decode(&g, SITE);
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_eq!(grid.get(r, c), 1);
        }
        assert_eq!(grid.levels().iter().map(|&l| l as u32).sum::<u32>(), 4);
    }

    #[test]
    fn overlaps_stack_and_clamp() {
        let one = Rect { x: 5, y: 5, w: 1, l: 1 };
        let grid = decode(&ParametricGenome { rectangles: vec![one; 3] }, SITE);
        assert_eq!(grid.get(5, 5), 3);
        let grid = decode(&ParametricGenome { rectangles: vec![one; 5] }, SITE);
        assert_eq!(grid.get(5, 5), 3);
    }

    #[test]
    fn zero_rate_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random(8, SITE, &mut rng);
        assert_eq!(mutate(&g, 0.0, 0.3, SITE, &mut rng), g);
    }

    #[test]
    fn width_never_negative() {
        assert_eq!(Rect::fitted(2, 2, 1 - 3, 1, SITE).w, 0);
    }

    #[test]
    fn corner_rectangles_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let corner = ParametricGenome {
            rectangles: vec![
                Rect { x: 0, y: 0, w: 3, l: 3 },
                Rect { x: 11, y: 8, w: 3, l: 3 },
                Rect { x: 13, y: 10, w: 1, l: 1 },
            ],
        };
        for _ in 0..2000 {
            let m = mutate(&corner, 1.0, 5.0, SITE, &mut rng);
            assert!(m.rectangles.iter().all(|r| r.fits(SITE)), "{m:?}");
        }
    }

    #[test]
    fn selected_parameters_always_move() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let g = ParametricGenome {
            rectangles: vec![Rect { x: 5, y: 4, w: 3, l: 3 }],
        };
        for _ in 0..500 {
            let m = mutate(&g, 1.0, 0.3, SITE, &mut rng);
            let (a, b) = (g.rectangles[0], m.rectangles[0]);
            assert!(a.x != b.x && a.y != b.y && a.w != b.w && a.l != b.l);
        }
    }
}
