use crate::error::{Error, Result};

/// Shape of the k^2-ary partition over a virtually padded square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Geometry {
    pub k: usize,
    pub side: usize,
    pub rows: usize,
    pub cols: usize,
    /// Depth of the 1x1 level; the root is depth 0.
    pub depth: usize,
}

impl Geometry {
    pub fn new(rows: usize, cols: usize, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("arity k must be >= 2, got {k}")));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("raster must be non-empty".into()));
        }
        let target = rows.max(cols);
        let mut side = 1usize;
        let mut depth = 0;
        while side < target {
            side = side
                .checked_mul(k)
                .ok_or_else(|| Error::DimensionOverflow(format!("padded side for {rows}x{cols}")))?;
            depth += 1;
        }
        Ok(Self {
            k,
            side,
            rows,
            cols,
            depth,
        })
    }

    /// Rebuilds from stored fields and checks they are mutually consistent.
    pub fn from_stored(k: usize, side: usize, rows: usize, cols: usize) -> Result<Self> {
        let g = Self::new(rows, cols, k)?;
        if g.side != side {
            return Err(Error::Format(format!(
                "stored side {side} does not match {rows}x{cols} with k={k}"
            )));
        }
        Ok(g)
    }

    pub fn k2(&self) -> usize {
        self.k * self.k
    }

    #[inline]
    pub fn outside(&self, r0: usize, c0: usize) -> bool {
        r0 >= self.rows || c0 >= self.cols
    }
}
