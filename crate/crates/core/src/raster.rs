//! Dense rasters and the query vocabulary shared by all structures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major grid of 32-bit signed cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    rows: usize,
    cols: usize,
    values: Vec<i32>,
}

impl Raster {
    pub fn new(rows: usize, cols: usize, values: Vec<i32>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "raster must be non-empty, got {rows}x{cols}"
            )));
        }
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::DimensionOverflow(format!("{rows}x{cols}")))?;
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "{rows}x{cols} raster needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn filled(rows: usize, cols: usize, value: i32) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows.saturating_mul(cols)])
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i32) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.saturating_mul(cols));
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(r, c));
            }
        }
        Self::new(rows, cols, values)
    }

    pub fn from_rows(rows: &[Vec<i32>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Self::new(rows.len(), ncols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<i32> {
        self.values
    }

    pub fn get(&self, r: usize, c: usize) -> Option<i32> {
        (r < self.rows && c < self.cols).then(|| self.values[r * self.cols + c])
    }

    #[inline]
    pub(crate) fn at(&self, r: usize, c: usize) -> i32 {
        self.values[r * self.cols + c]
    }

    pub(crate) fn check_same_shape(&self, other: &Raster) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected_rows: self.rows,
                expected_cols: self.cols,
                rows: other.rows,
                cols: other.cols,
            });
        }
        Ok(())
    }

    pub fn full_window(&self) -> Window {
        Window::full(self.rows, self.cols)
    }
}

/// A cell position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Inclusive rectangular region `[r1, r2] x [c1, c2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub r1: usize,
    pub r2: usize,
    pub c1: usize,
    pub c2: usize,
}

impl Window {
    pub fn new(r1: usize, r2: usize, c1: usize, c2: usize) -> Self {
        Self { r1, r2, c1, c2 }
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Self::new(0, rows - 1, 0, cols - 1)
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if self.r1 > self.r2 || self.c1 > self.c2 || self.r2 >= rows || self.c2 >= cols {
            return Err(Error::InvalidArgument(format!(
                "window [{}, {}] x [{}, {}] invalid for {rows}x{cols} raster",
                self.r1, self.r2, self.c1, self.c2
            )));
        }
        Ok(())
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        (self.r1..=self.r2).contains(&r) && (self.c1..=self.c2).contains(&c)
    }

    pub fn area(&self) -> usize {
        (self.r2 - self.r1 + 1) * (self.c2 - self.c1 + 1)
    }

    /// Intersection with the square `[r0, r0 + size) x [c0, c0 + size)`.
    #[inline]
    pub(crate) fn clip(&self, r0: usize, c0: usize, size: usize) -> Option<Window> {
        let r1 = self.r1.max(r0);
        let c1 = self.c1.max(c0);
        let r2 = self.r2.min(r0 + size - 1);
        let c2 = self.c2.min(c0 + size - 1);
        (r1 <= r2 && c1 <= c2).then_some(Window { r1, r2, c1, c2 })
    }

    pub(crate) fn push_cells(&self, out: &mut Vec<Cell>) {
        for r in self.r1..=self.r2 {
            out.extend((self.c1..=self.c2).map(|c| Cell::new(r, c)));
        }
    }
}

/// Inclusive value interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueRange {
    pub lo: i64,
    pub hi: i64,
}

impl ValueRange {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!("empty value range [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    #[inline]
    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }

    #[inline]
    pub(crate) fn disjoint(&self, min: i64, max: i64) -> bool {
        max < self.lo || min > self.hi
    }

    #[inline]
    pub(crate) fn covers(&self, min: i64, max: i64) -> bool {
        self.lo <= min && max <= self.hi
    }
}
