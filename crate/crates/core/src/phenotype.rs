//! Height-grid phenotype, the inflow-silhouette surrogate fitness and the two
//! archive features (built area, number of separate buildings).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest height level. Level `h` stands for a mass of `3 * h` meters.
pub const MAX_LEVEL: u8 = 3;

/// Meters per height level, used only for rendering and export.
pub const METERS_PER_LEVEL: u32 = 3;

/// Rows and columns of a height grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
}

impl GridShape {
    /// The 11 x 14 building site.
    pub const SITE: GridShape = GridShape { rows: 11, cols: 14 };

    pub const fn new(rows: usize, cols: usize) -> Self {
        GridShape { rows, cols }
    }

    pub const fn cells(&self) -> usize {
        self.rows * self.cols
    }
}

impl Default for GridShape {
    fn default() -> Self {
        GridShape::SITE
    }
}

/// Row-major grid of height levels in `0..=MAX_LEVEL`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HeightGrid {
    shape: GridShape,
    cells: Vec<u8>,
}

impl HeightGrid {
    pub fn zeros(shape: GridShape) -> Self {
        HeightGrid {
            shape,
            cells: vec![0; shape.cells()],
        }
    }

    pub fn filled(shape: GridShape, level: u8) -> Result<Self> {
        check_level(level)?;
        Ok(HeightGrid {
            shape,
            cells: vec![level; shape.cells()],
        })
    }

    /// Builds a grid from row-major levels, rejecting wrong lengths and
    /// out-of-range levels.
    pub fn from_levels(shape: GridShape, cells: Vec<u8>) -> Result<Self> {
        if cells.len() != shape.cells() {
            return Err(Error::LengthMismatch {
                expected: shape.cells(),
                actual: cells.len(),
            });
        }
        for &level in &cells {
            check_level(level)?;
        }
        Ok(HeightGrid { shape, cells })
    }

    /// Inverse of [`flatten`]; values must be integral levels.
    pub fn unflatten(shape: GridShape, values: &[f64]) -> Result<Self> {
        let mut cells = Vec::with_capacity(values.len());
        for &v in values {
            if v.fract() != 0.0 || !(0.0..=MAX_LEVEL as f64).contains(&v) {
                return Err(Error::InvalidLevel(v));
            }
            cells.push(v as u8);
        }
        HeightGrid::from_levels(shape, cells)
    }

    /// Builds a grid from nested rows, as found in phenotype JSON exports.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 || rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Parse {
                location: "phenotype rows".into(),
                message: "rows must be non-empty and of equal length".into(),
            });
        }
        HeightGrid::from_levels(GridShape::new(n_rows, n_cols), rows.concat())
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn rows(&self) -> usize {
        self.shape.rows
    }

    pub fn cols(&self) -> usize {
        self.shape.cols
    }

    pub fn levels(&self) -> &[u8] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.shape.cols + col]
    }

    /// Sets one cell. Panics on an out-of-range level or position.
    pub fn set(&mut self, row: usize, col: usize, level: u8) {
        assert!(level <= MAX_LEVEL, "height level {level} out of range");
        assert!(row < self.shape.rows && col < self.shape.cols);
        self.cells[row * self.shape.cols + col] = level;
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.cells
            .chunks(self.shape.cols)
            .map(<[u8]>::to_vec)
            .collect()
    }

    /// One CSV line of comma-separated levels, row-major.
    pub fn to_csv_row(&self) -> String {
        let fields: Vec<String> = self.cells.iter().map(u8::to_string).collect();
        fields.join(",")
    }

    /// Nested-array JSON (`[[..14 levels..], ..11 rows..]`).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_rows()).expect("nested u8 arrays always serialize")
    }
}

fn check_level(level: u8) -> Result<()> {
    if level > MAX_LEVEL {
        return Err(Error::InvalidLevel(level as f64));
    }
    Ok(())
}

impl Serialize for HeightGrid {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HeightGrid {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<u8>>::deserialize(deserializer)?;
        HeightGrid::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Direction the cold air arrives from, expressed as the grid axis it runs
/// along.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InflowAxis {
    /// Air travels along the row index (the 11-cell axis); the silhouette
    /// has one line per column.
    #[default]
    AlongRows,
    /// Air travels along the column index; one silhouette line per row.
    AlongCols,
}

/// Built area and number of 4-connected building masses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Features {
    pub built_area: usize,
    pub building_count: usize,
}

/// `1 - frontal / (lines * MAX_LEVEL)` where the frontal area sums the
/// tallest cell of each line perpendicular to the inflow.
pub fn fitness(grid: &HeightGrid, inflow: InflowAxis) -> f64 {
    let (rows, cols) = (grid.rows(), grid.cols());
    let frontal: u32 = match inflow {
        InflowAxis::AlongRows => (0..cols)
            .map(|c| (0..rows).map(|r| grid.get(r, c)).max().unwrap_or(0) as u32)
            .sum(),
        InflowAxis::AlongCols => (0..rows)
            .map(|r| (0..cols).map(|c| grid.get(r, c)).max().unwrap_or(0) as u32)
            .sum(),
    };
    let lines = match inflow {
        InflowAxis::AlongRows => cols,
        InflowAxis::AlongCols => rows,
    };
    1.0 - frontal as f64 / (lines as f64 * MAX_LEVEL as f64)
}

pub fn features(grid: &HeightGrid) -> Features {
    let (rows, cols) = (grid.rows(), grid.cols());
    let built = |i: usize| grid.cells[i] > 0;
    let mut seen = vec![false; grid.cells.len()];
    let mut stack = Vec::new();
    let mut built_area = 0;
    let mut building_count = 0;
    for start in 0..grid.cells.len() {
        if !built(start) {
            continue;
        }
        built_area += 1;
        if seen[start] {
            continue;
        }
        building_count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (r, c) = (i / cols, i % cols);
            let mut visit = |j: usize| {
                if built(j) && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if r > 0 {
                visit(i - cols);
            }
            if r + 1 < rows {
                visit(i + cols);
            }
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < cols {
                visit(i + 1);
            }
        }
    }
    Features {
        built_area,
        building_count,
    }
}

/// Row-major height levels as reals.
pub fn flatten(grid: &HeightGrid) -> Vec<f64> {
    grid.cells.iter().map(|&l| l as f64).collect()
}
