//! Uncompressed ground truth: a flat `tau x rows x cols` array.

use crate::error::{Error, Result};
use crate::raster::{Cell, Raster, ValueRange, Window};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseSeries {
    tau: usize,
    rows: usize,
    cols: usize,
    values: Vec<i32>,
}

impl DenseSeries {
    pub fn from_series(series: &[Raster]) -> Result<Self> {
        let first = series
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty series".into()))?;
        let (rows, cols) = (first.rows(), first.cols());
        let mut values = Vec::with_capacity(series.len() * rows * cols);
        for m in series {
            first.check_same_shape(m)?;
            values.extend_from_slice(m.values());
        }
        Ok(Self {
            tau: series.len(),
            rows,
            cols,
            values,
        })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get_cell(&self, r: usize, c: usize, t: usize) -> Result<i32> {
        if t >= self.tau || r >= self.rows || c >= self.cols {
            return Err(Error::InvalidArgument(format!(
                "({r}, {c}, {t}) outside {}x{}x{}",
                self.rows, self.cols, self.tau
            )));
        }
        Ok(self.values[(t * self.rows + r) * self.cols + c])
    }

    pub fn get_cells(&self, vb: i64, ve: i64, window: Window, t: usize) -> Result<Vec<Cell>> {
        let range = ValueRange::new(vb, ve)?;
        window.validate(self.rows, self.cols)?;
        if t >= self.tau {
            return Err(Error::IndexOutOfRange {
                index: t,
                len: self.tau,
            });
        }
        let frame = &self.values[t * self.rows * self.cols..(t + 1) * self.rows * self.cols];
        let mut out = Vec::new();
        for r in window.r1..=window.r2 {
            for c in window.c1..=window.c2 {
                if range.contains(i64::from(frame[r * self.cols + c])) {
                    out.push(Cell::new(r, c));
                }
            }
        }
        Ok(out)
    }
}
