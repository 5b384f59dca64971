//! Dictionary encoding: the grid is tiled into groups and each gene picks a
//! precomputed building block for its group.
//!
//! Blocks are height-level patterns. A height map has no overhangs, so every
//! pattern is a valid block and a group of `k` cells has `4^k` entries,
//! indexed lexicographically over the row-major cell levels (entry 0 is the
//! empty block, entry 1 raises only the last cell to level 1).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phenotype::{GridShape, HeightGrid, MAX_LEVEL};

/// Largest block (in cells) whose dictionary is enumerated.
pub const MAX_BLOCK_CELLS: usize = 9;

/// Largest total absolute level change a mutation may make to a block.
pub const MAX_TRANSITION_DISTANCE: u32 = 5;

const LEVELS: u32 = MAX_LEVEL as u32 + 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryGenome {
    pub block_rows: usize,
    pub block_cols: usize,
    pub block_indices: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DictionaryConfig {
    pub p_mut: f64,
    pub block_rows: usize,
    pub block_cols: usize,
}

impl Default for DictionaryConfig {
    fn default() -> Self {
        DictionaryConfig {
            p_mut: 0.05,
            block_rows: 2,
            block_cols: 2,
        }
    }
}

/// A rectangular group of cells filled by one dictionary block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Group {
    pub row: usize,
    pub col: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Group {
    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn dictionary_size(&self) -> u32 {
        LEVELS.pow(self.cells() as u32)
    }
}

/// Row-major tiling of the grid with `block_rows x block_cols` groups. When
/// the grid does not divide evenly the last band and the last column of
/// groups are cut short.
pub fn partition(shape: GridShape, block_rows: usize, block_cols: usize) -> Vec<Group> {
    let mut groups = Vec::new();
    for row in (0..shape.rows).step_by(block_rows) {
        for col in (0..shape.cols).step_by(block_cols) {
            groups.push(Group {
                row,
                col,
                rows: block_rows.min(shape.rows - row),
                cols: block_cols.min(shape.cols - col),
            });
        }
    }
    groups
}

pub(crate) fn check_block(block_rows: usize, block_cols: usize) -> Result<()> {
    if block_rows == 0 || block_cols == 0 {
        return Err(Error::config("block_rows", "block dimensions must be positive"));
    }
    if block_rows * block_cols > MAX_BLOCK_CELLS {
        return Err(Error::config(
            "block_rows",
            format!(
                "{block_rows}x{block_cols} block has more than {MAX_BLOCK_CELLS} cells; dictionary too large to enumerate"
            ),
        ));
    }
    Ok(())
}

/// All `4^(rows*cols)` blocks in index order.
pub fn build_dictionary(block_rows: usize, block_cols: usize) -> Result<Vec<Vec<u8>>> {
    check_block(block_rows, block_cols)?;
    let cells = block_rows * block_cols;
    Ok((0..LEVELS.pow(cells as u32))
        .map(|index| block_levels(index, cells))
        .collect())
}

/// Row-major levels of dictionary entry `index` for a block of `cells` cells.
pub fn block_levels(mut index: u32, cells: usize) -> Vec<u8> {
    let mut levels = vec![0u8; cells];
    for slot in levels.iter_mut().rev() {
        *slot = (index % LEVELS) as u8;
        index /= LEVELS;
    }
    levels
}

pub fn block_index(levels: &[u8]) -> u32 {
    levels.iter().fold(0, |acc, &l| acc * LEVELS + l as u32)
}

/// Precomputed tiling and mutation offsets for one grid shape and block size.
#[derive(Clone, Debug)]
pub struct Layout {
    pub block_rows: usize,
    pub block_cols: usize,
    pub groups: Vec<Group>,
    /// `offsets[k]` lists every per-cell level change over `k` cells with
    /// total absolute size in `1..=MAX_TRANSITION_DISTANCE`.
    offsets: Vec<Vec<Vec<i8>>>,
}

impl Layout {
    pub fn new(shape: GridShape, block_rows: usize, block_cols: usize) -> Result<Self> {
        check_block(block_rows, block_cols)?;
        let groups = partition(shape, block_rows, block_cols);
        let offsets = (0..=block_rows * block_cols).map(offsets_for).collect();
        Ok(Layout {
            block_rows,
            block_cols,
            groups,
            offsets,
        })
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> DictionaryGenome {
        DictionaryGenome {
            block_rows: self.block_rows,
            block_cols: self.block_cols,
            block_indices: self
                .groups
                .iter()
                .map(|g| rng.random_range(0..g.dictionary_size()))
                .collect(),
        }
    }

    /// Blocks reachable from `index` by one mutation, in ascending offset
    /// enumeration order.
    pub fn transitions(&self, group: &Group, index: u32) -> Vec<u32> {
        let cells = group.cells();
        let current = block_levels(index, cells);
        let place: Vec<i64> = (0..cells).rev().map(|k| (LEVELS as i64).pow(k as u32)).collect();
        self.offsets[cells]
            .iter()
            .filter(|delta| {
                current
                    .iter()
                    .zip(delta.iter())
                    .all(|(&l, &d)| (0..=MAX_LEVEL as i8).contains(&(l as i8 + d)))
            })
            .map(|delta| {
                let shift: i64 = delta.iter().zip(&place).map(|(&d, &p)| d as i64 * p).sum();
                (index as i64 + shift) as u32
            })
            .collect()
    }

    pub fn mutate<R: Rng + ?Sized>(
        &self,
        genome: &DictionaryGenome,
        p_mut: f64,
        rng: &mut R,
    ) -> DictionaryGenome {
        let block_indices = genome
            .block_indices
            .iter()
            .zip(&self.groups)
            .map(|(&index, group)| {
                if !rng.random_bool(p_mut) {
                    return index;
                }
                let options = self.transitions(group, index);
                options[rng.random_range(0..options.len())]
            })
            .collect();
        DictionaryGenome {
            block_indices,
            ..genome.clone()
        }
    }

    pub fn decode(&self, genome: &DictionaryGenome, shape: GridShape) -> HeightGrid {
        assert_eq!(
            genome.block_indices.len(),
            self.groups.len(),
            "dictionary genome does not match the layout"
        );
        let mut grid = HeightGrid::zeros(shape);
        for (group, &index) in self.groups.iter().zip(&genome.block_indices) {
            let levels = block_levels(index, group.cells());
            for (k, level) in levels.into_iter().enumerate() {
                grid.set(group.row + k / group.cols, group.col + k % group.cols, level);
            }
        }
        grid
    }

    pub fn is_valid(&self, genome: &DictionaryGenome) -> bool {
        genome.block_rows == self.block_rows
            && genome.block_cols == self.block_cols
            && genome.block_indices.len() == self.groups.len()
            && genome
                .block_indices
                .iter()
                .zip(&self.groups)
                .all(|(&i, g)| i < g.dictionary_size())
    }
}

/// Decodes against a freshly built layout.
pub fn decode(genome: &DictionaryGenome, shape: GridShape) -> Result<HeightGrid> {
    let layout = Layout::new(shape, genome.block_rows, genome.block_cols)?;
    Ok(layout.decode(genome, shape))
}

fn offsets_for(cells: usize) -> Vec<Vec<i8>> {
    fn extend(prefix: &mut Vec<i8>, cells: usize, budget: i32, out: &mut Vec<Vec<i8>>) {
        if prefix.len() == cells {
            if budget < MAX_TRANSITION_DISTANCE as i32 {
                out.push(prefix.clone());
            }
            return;
        }
        for d in -(MAX_LEVEL as i32)..=MAX_LEVEL as i32 {
            if d.abs() <= budget {
                prefix.push(d as i8);
                extend(prefix, cells, budget - d.abs(), out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), cells, MAX_TRANSITION_DISTANCE as i32, &mut out);
    out
}
