//! Temporal raster: periodic snapshots plus difference trees.
//!
//! Instant `i` is a full [`K2Raster`] snapshot when it starts a new
//! interval, otherwise a [`K2RasterDelta`] encoded against the most recent
//! snapshot. Queries on a delta frame walk both trees together.

mod delta;

pub use delta::{DeltaNodeKind, DeltaRoot, K2RasterDelta};

use serde::Serialize;

use crate::dataio::container;
use crate::error::{Error, Result};
use crate::k2raster::K2Raster;
use crate::raster::{Cell, Raster, ValueRange, Window};

/// Default fraction for [`SnapshotPolicy::Auto`].
pub const DEFAULT_AUTO_THRESHOLD: f64 = 0.8;

/// Where snapshots are placed along the timeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnapshotPolicy {
    /// A snapshot every `t_delta` instants, starting at instant 0.
    Fixed(usize),
    /// A new snapshot whenever an instant's difference tree would have more
    /// than `threshold` times the nodes of the current snapshot's tree.
    Auto { threshold: f64 },
}

impl SnapshotPolicy {
    /// Stored `t_delta` header value; 0 marks adaptive placement.
    pub fn header_t_delta(&self) -> u32 {
        match *self {
            Self::Fixed(td) => td as u32,
            Self::Auto { .. } => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    Snapshot(K2Raster),
    /// Difference tree against the snapshot at frame index `reference`.
    Delta {
        reference: usize,
        tree: K2RasterDelta,
    },
}

impl Frame {
    pub fn is_snapshot(&self) -> bool {
        matches!(self, Frame::Snapshot(_))
    }

    pub fn node_count(&self) -> usize {
        match self {
            Frame::Snapshot(s) => s.node_count(),
            Frame::Delta { tree, .. } => tree.node_count(),
        }
    }

    pub(crate) fn encoded_len(&self) -> usize {
        match self {
            Frame::Snapshot(s) => s.encoded_len(),
            Frame::Delta { tree, .. } => tree.encoded_len(),
        }
    }
}

/// Compressed time series of rasters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TK2Raster {
    k: usize,
    /// 0 when snapshots were placed adaptively.
    t_delta: usize,
    rows: usize,
    cols: usize,
    frames: Vec<Frame>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrameStats {
    pub index: usize,
    pub snapshot: bool,
    pub bytes: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TK2RasterStats {
    pub frames: Vec<FrameStats>,
    /// File header plus frame directory.
    pub header_bytes: usize,
    pub total_bytes: usize,
    pub snapshots: usize,
}

impl TK2Raster {
    /// Builds with a snapshot every `t_delta` instants.
    pub fn build(series: &[Raster], k: usize, t_delta: usize) -> Result<Self> {
        Self::build_with(series, k, SnapshotPolicy::Fixed(t_delta))
    }

    pub fn build_with(series: &[Raster], k: usize, policy: SnapshotPolicy) -> Result<Self> {
        let first = series
            .first()
            .ok_or_else(|| Error::InvalidArgument("series must contain at least one raster".into()))?;
        for m in &series[1..] {
            first.check_same_shape(m)?;
        }
        match policy {
            SnapshotPolicy::Fixed(0) => {
                return Err(Error::InvalidArgument("t_delta must be >= 1".into()));
            }
            SnapshotPolicy::Auto { threshold } if !(threshold > 0.0 && threshold.is_finite()) => {
                return Err(Error::InvalidArgument(format!(
                    "auto-snapshot threshold must be positive, got {threshold}"
                )));
            }
            _ => {}
        }

        let frames = match policy {
            SnapshotPolicy::Fixed(t_delta) => build_fixed(series, k, t_delta)?,
            SnapshotPolicy::Auto { threshold } => build_auto(series, k, threshold)?,
        };
        Ok(Self {
            k,
            t_delta: policy.header_t_delta() as usize,
            rows: first.rows(),
            cols: first.cols(),
            frames,
        })
    }

    pub(crate) fn from_parts(k: usize, t_delta: usize, rows: usize, cols: usize, frames: Vec<Frame>) -> Self {
        Self {
            k,
            t_delta,
            rows,
            cols,
            frames,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Snapshot interval, or 0 for adaptive placement.
    pub fn t_delta(&self) -> usize {
        self.t_delta
    }

    /// Number of instants.
    pub fn tau(&self) -> usize {
        self.frames.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, t: usize) -> Result<&Frame> {
        self.frames.get(t).ok_or(Error::IndexOutOfRange {
            index: t,
            len: self.frames.len(),
        })
    }

    pub fn is_snapshot(&self, t: usize) -> Result<bool> {
        self.frame(t).map(Frame::is_snapshot)
    }

    fn snapshot(&self, index: usize) -> &K2Raster {
        match &self.frames[index] {
            Frame::Snapshot(s) => s,
            Frame::Delta { .. } => unreachable!("delta references a snapshot frame"),
        }
    }

    pub fn get_cell_value(&self, r: usize, c: usize, t: usize) -> Result<i32> {
        let frame = self.frame(t)?;
        if r >= self.rows || c >= self.cols {
            return Err(Error::InvalidArgument(format!(
                "cell ({r}, {c}) outside {}x{} raster",
                self.rows, self.cols
            )));
        }
        Ok(match frame {
            Frame::Snapshot(s) => s.get_cell(r, c)?,
            Frame::Delta { reference, tree } => delta::get_cell(self.snapshot(*reference), tree, r, c) as i32,
        })
    }

    /// Cells of `window` at instant `t` with value in `[vb, ve]`, row-major.
    pub fn get_cells(&self, vb: i64, ve: i64, window: Window, t: usize) -> Result<Vec<Cell>> {
        let frame = self.frame(t)?;
        match frame {
            Frame::Snapshot(s) => s.get_cells(vb, ve, window),
            Frame::Delta { reference, tree } => {
                let range = ValueRange::new(vb, ve)?;
                window.validate(self.rows, self.cols)?;
                Ok(delta::get_cells(self.snapshot(*reference), tree, &range, &window))
            }
        }
    }

    pub fn decompress_frame(&self, t: usize) -> Result<Raster> {
        Ok(match self.frame(t)? {
            Frame::Snapshot(s) => s.decompress(),
            Frame::Delta { reference, tree } => delta::decompress(self.snapshot(*reference), tree),
        })
    }

    pub fn stats(&self) -> TK2RasterStats {
        let frames: Vec<FrameStats> = self
            .frames
            .iter()
            .enumerate()
            .map(|(index, f)| FrameStats {
                index,
                snapshot: f.is_snapshot(),
                bytes: f.encoded_len(),
                nodes: f.node_count(),
            })
            .collect();
        let header_bytes = container::tk2_header_len(self.frames.len());
        let total_bytes = header_bytes + frames.iter().map(|f| f.bytes).sum::<usize>();
        TK2RasterStats {
            snapshots: frames.iter().filter(|f| f.snapshot).count(),
            frames,
            header_bytes,
            total_bytes,
        }
    }
}

fn build_fixed(series: &[Raster], k: usize, t_delta: usize) -> Result<Vec<Frame>> {
    let build_interval = |ci: usize, chunk: &[Raster]| -> Result<Vec<Frame>> {
        let base = ci * t_delta;
        let mut frames = Vec::with_capacity(chunk.len());
        frames.push(Frame::Snapshot(K2Raster::build(&chunk[0], k)?));
        for m in &chunk[1..] {
            frames.push(Frame::Delta {
                reference: base,
                tree: K2RasterDelta::build(&chunk[0], m, k)?,
            });
        }
        Ok(frames)
    };
    // Intervals are independent given their snapshot.
    let chunks: Vec<&[Raster]> = series.chunks(t_delta).collect();
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(chunks.len());
    let mut parts: Vec<(usize, Result<Vec<Frame>>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let chunks = &chunks;
                let build_interval = &build_interval;
                scope.spawn(move || {
                    (w..chunks.len())
                        .step_by(workers)
                        .map(|ci| (ci, build_interval(ci, chunks[ci])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("build worker panicked"))
            .collect()
    });
    parts.sort_by_key(|(ci, _)| *ci);
    let mut frames = Vec::with_capacity(series.len());
    for (_, part) in parts {
        frames.extend(part?);
    }
    Ok(frames)
}

fn build_auto(series: &[Raster], k: usize, threshold: f64) -> Result<Vec<Frame>> {
    let mut frames = Vec::with_capacity(series.len());
    let mut reference = 0;
    let mut snap_nodes = 0;
    for (i, m) in series.iter().enumerate() {
        if i > 0 {
            let tree = K2RasterDelta::build(&series[reference], m, k)?;
            if (tree.node_count() as f64) <= threshold * snap_nodes as f64 {
                frames.push(Frame::Delta { reference, tree });
                continue;
            }
        }
        let snap = K2Raster::build(m, k)?;
        snap_nodes = snap.node_count();
        reference = i;
        frames.push(Frame::Snapshot(snap));
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_from(vals: &[&[i32]], rows: usize, cols: usize) -> Vec<Raster> {
        vals.iter()
            .map(|v| Raster::new(rows, cols, v.to_vec()).unwrap())
            .collect()
    }

    #[test]
    fn single_raster_is_one_snapshot() {
        let s = series_from(&[&[1, 2, 3, 4]], 2, 2);
        let tk = TK2Raster::build(&s, 2, 6).unwrap();
        assert_eq!(tk.tau(), 1);
        assert!(tk.frames()[0].is_snapshot());
    }

    #[test]
    fn frame_layout_for_three_instants() {
        let s = series_from(&[&[1, 2, 3, 4], &[1, 2, 3, 5], &[2, 3, 4, 5]], 2, 2);
        let tk = TK2Raster::build(&s, 2, 3).unwrap();
        let kinds: Vec<bool> = tk.frames().iter().map(Frame::is_snapshot).collect();
        assert_eq!(kinds, vec![true, false, false]);
        for (t, m) in s.iter().enumerate() {
            assert_eq!(&tk.decompress_frame(t).unwrap(), m);
        }
        let tk = TK2Raster::build(&s, 2, 2).unwrap();
        let kinds: Vec<bool> = tk.frames().iter().map(Frame::is_snapshot).collect();
        assert_eq!(kinds, vec![true, false, true]);
    }

    #[test]
    fn argument_errors() {
        let s = series_from(&[&[1, 2, 3, 4]], 2, 2);
        assert!(TK2Raster::build(&[], 2, 1).is_err());
        assert!(TK2Raster::build(&s, 2, 0).is_err());
        assert!(TK2Raster::build_with(&s, 2, SnapshotPolicy::Auto { threshold: 0.0 }).is_err());
        let mut mixed = s.clone();
        mixed.push(Raster::filled(3, 2, 0).unwrap());
        assert!(matches!(
            TK2Raster::build(&mixed, 2, 2),
            Err(Error::DimensionMismatch { .. })
        ));
        let tk = TK2Raster::build(&s, 2, 1).unwrap();
        assert!(tk.get_cell_value(0, 0, 1).is_err());
        assert!(tk.get_cell_value(2, 0, 0).is_err());
        assert!(tk.decompress_frame(1).is_err());
        assert!(tk.get_cells(0, 9, Window::new(0, 1, 0, 1), 1).is_err());
    }

    #[test]
    fn auto_policy_snapshots_on_large_change() {
        let a = Raster::from_fn(8, 8, |r, c| (r * 8 + c) as i32).unwrap();
        let b = Raster::from_fn(8, 8, |r, c| if r == 0 && c == 0 { 100 } else { (r * 8 + c) as i32 }).unwrap();
        let noisy = Raster::from_fn(8, 8, |r, c| ((r * 31 + c * 17) % 13) as i32).unwrap();
        let series = vec![a.clone(), b, noisy, a];
        let tk = TK2Raster::build_with(&series, 2, SnapshotPolicy::Auto { threshold: 0.8 }).unwrap();
        let kinds: Vec<bool> = tk.frames().iter().map(Frame::is_snapshot).collect();
        assert_eq!(kinds[..3], [true, false, true]);
        assert_eq!(tk.t_delta(), 0);
        for (t, m) in series.iter().enumerate() {
            assert_eq!(&tk.decompress_frame(t).unwrap(), m);
        }
    }
}
