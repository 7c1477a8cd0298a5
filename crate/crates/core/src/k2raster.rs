//! Single-instant compressed raster.
//!
//! The raster is padded (virtually) to a `side x side` square with `side` a
//! power of `k` and split recursively into `k^2` quadrants, row-major. Each
//! node of the conceptual tree stores the min and max of its submatrix.
//! Subdivision stops when min == max or the submatrix is a single cell.
//!
//! Nodes are laid out level by level (root excluded):
//! - `T` has one bit per node above the cell level: 1 = has children.
//! - `Lmax` has one entry per node: parent max minus node max.
//! - `Lmin` has one entry per internal node: node min minus parent min,
//!   addressed by `rank1(T, pos)`.
//!
//! The children of the node at `T` position `z` start at
//! `rank1(T, z + 1) * k^2`; the root's children occupy `0..k^2`.
//! Quadrants lying completely in the padding are leaves with gap 0 and are
//! never visited by queries, which clamp to the real bounds.

use crate::bitvector::{BitBuilder, RankBitVector};
use crate::dataio::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::intcodes::{DacSequence, DEFAULT_CHUNK_WIDTH};
use crate::raster::{Cell, Raster, ValueRange, Window};

/// Compressed single-instant raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct K2Raster {
    geom: Geometry,
    root_min: i64,
    root_max: i64,
    t: RankBitVector,
    lmax: DacSequence,
    lmin: DacSequence,
}

/// Sizes of a [`K2Raster`]; byte counts match the serialized form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct K2RasterStats {
    pub bits_t: usize,
    pub bits_lmax: usize,
    pub bits_lmin: usize,
    /// Length of the standalone `K2R1` file.
    pub total_bytes: usize,
    pub node_count: usize,
}

#[derive(Clone, Copy)]
struct Rec {
    /// `None` for quadrants entirely in the padding.
    stats: Option<(i64, i64)>,
    internal: bool,
}

struct Builder<'a> {
    m: &'a Raster,
    geom: Geometry,
    levels: Vec<Vec<Rec>>,
}

impl Builder<'_> {
    fn stats(&mut self, depth: usize, r0: usize, c0: usize, size: usize) -> Option<(i64, i64)> {
        if self.geom.outside(r0, c0) {
            return None;
        }
        if size == 1 {
            let v = i64::from(self.m.at(r0, c0));
            return Some((v, v));
        }
        let child = size / self.geom.k;
        let mut acc: Option<(i64, i64)> = None;
        for i in 0..self.geom.k {
            for j in 0..self.geom.k {
                let (cr, cc) = (r0 + i * child, c0 + j * child);
                // Grandchildren of a uniform child are uniform and already
                // pruned their own subtrees, so only one level needs undoing.
                let mark = self.levels[depth + 2].len();
                let s = self.stats(depth + 1, cr, cc, child);
                let internal = matches!(s, Some((lo, hi)) if lo < hi);
                if !internal {
                    self.levels[depth + 2].truncate(mark);
                }
                self.levels[depth + 1].push(Rec { stats: s, internal });
                if let Some((lo, hi)) = s {
                    acc = Some(acc.map_or((lo, hi), |(a, b)| (a.min(lo), b.max(hi))));
                }
            }
        }
        acc
    }
}

impl K2Raster {
    /// Compresses `m` with arity `k`.
    pub fn build(m: &Raster, k: usize) -> Result<Self> {
        let geom = Geometry::new(m.rows(), m.cols(), k)?;
        let mut b = Builder {
            m,
            geom,
            levels: vec![Vec::new(); geom.depth + 2],
        };
        let (root_min, root_max) = b.stats(0, 0, 0, geom.side).expect("root overlaps raster");
        if root_min == root_max {
            b.levels.iter_mut().for_each(Vec::clear);
        }
        let k2 = geom.k2();

        let mut t = BitBuilder::new();
        let mut lmax = Vec::new();
        let mut lmin = Vec::new();
        let mut parents = Vec::new();
        if root_min < root_max {
            parents.push((root_min, root_max));
        }
        for depth in 1..=geom.depth {
            let recs = &b.levels[depth];
            debug_assert_eq!(recs.len(), parents.len() * k2);
            let mut next = Vec::new();
            for (p, chunk) in parents.iter().zip(recs.chunks(k2)) {
                let (pmin, pmax) = *p;
                for rec in chunk {
                    let (mn, mx) = rec.stats.unwrap_or((pmax, pmax));
                    lmax.push((pmax - mx) as u64);
                    if depth < geom.depth {
                        t.push(rec.internal);
                        if rec.internal {
                            lmin.push((mn - pmin) as u64);
                            next.push((mn, mx));
                        }
                    }
                }
            }
            parents = next;
            if parents.is_empty() && depth < geom.depth {
                // No internal nodes below here; the deeper level lists were
                // truncated to empty as well.
                debug_assert!(b.levels[depth + 1].is_empty());
                break;
            }
        }

        Ok(Self {
            geom,
            root_min,
            root_max,
            t: t.finish(),
            lmax: DacSequence::build(&lmax, DEFAULT_CHUNK_WIDTH)?,
            lmin: DacSequence::build(&lmin, DEFAULT_CHUNK_WIDTH)?,
        })
    }

    pub fn rows(&self) -> usize {
        self.geom.rows
    }

    pub fn cols(&self) -> usize {
        self.geom.cols
    }

    pub fn k(&self) -> usize {
        self.geom.k
    }

    pub fn side(&self) -> usize {
        self.geom.side
    }

    pub fn root_min(&self) -> i64 {
        self.root_min
    }

    pub fn root_max(&self) -> i64 {
        self.root_max
    }

    /// Topology bitmap `T`.
    pub fn topology(&self) -> &RankBitVector {
        &self.t
    }

    pub fn max_gaps(&self) -> &DacSequence {
        &self.lmax
    }

    pub fn min_gaps(&self) -> &DacSequence {
        &self.lmin
    }

    /// Number of nodes of the conceptual tree, root included.
    pub fn node_count(&self) -> usize {
        1 + self.lmax.len()
    }

    pub(crate) fn geometry(&self) -> &Geometry {
        &self.geom
    }

    pub(crate) fn root_internal(&self) -> bool {
        self.root_min < self.root_max
    }

    /// First child position of the node at `pos`; `None` is the root.
    #[inline]
    pub(crate) fn child_base(&self, pos: Option<usize>) -> usize {
        pos.map_or(0, |p| self.t.rank1_unchecked(p + 1) * self.geom.k2())
    }

    #[inline]
    pub(crate) fn has_children(&self, pos: usize) -> bool {
        pos < self.t.len() && self.t.bit(pos)
    }

    #[inline]
    pub(crate) fn max_gap(&self, pos: usize) -> i64 {
        self.lmax.get(pos) as i64
    }

    /// Min gap of the internal node at `pos`.
    #[inline]
    pub(crate) fn min_gap(&self, pos: usize) -> i64 {
        self.lmin.get(self.t.rank1_unchecked(pos)) as i64
    }

    pub fn get_cell(&self, r: usize, c: usize) -> Result<i32> {
        self.check_cell(r, c)?;
        Ok(self.cell_unchecked(r, c) as i32)
    }

    pub(crate) fn check_cell(&self, r: usize, c: usize) -> Result<()> {
        if r >= self.geom.rows || c >= self.geom.cols {
            return Err(Error::InvalidArgument(format!(
                "cell ({r}, {c}) outside {}x{} raster",
                self.geom.rows, self.geom.cols
            )));
        }
        Ok(())
    }

    fn cell_unchecked(&self, mut r: usize, mut c: usize) -> i64 {
        let k = self.geom.k;
        let mut max = self.root_max;
        if !self.root_internal() {
            return max;
        }
        let mut base = 0;
        let mut size = self.geom.side;
        loop {
            size /= k;
            let pos = base + (r / size) * k + c / size;
            max -= self.max_gap(pos);
            if !self.has_children(pos) {
                return max;
            }
            base = self.child_base(Some(pos));
            r %= size;
            c %= size;
        }
    }

    /// Cells of `window` whose value lies in `[vb, ve]`, in row-major order.
    pub fn get_cells(&self, vb: i64, ve: i64, window: Window) -> Result<Vec<Cell>> {
        let range = ValueRange::new(vb, ve)?;
        window.validate(self.geom.rows, self.geom.cols)?;
        let mut out = Vec::new();
        self.collect(
            None,
            0,
            0,
            self.geom.side,
            self.root_min,
            self.root_max,
            &range,
            &window,
            &mut out,
        );
        out.sort_unstable();
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn collect(
        &self,
        pos: Option<usize>,
        r0: usize,
        c0: usize,
        size: usize,
        min: i64,
        max: i64,
        range: &ValueRange,
        window: &Window,
        out: &mut Vec<Cell>,
    ) {
        let Some(clip) = window.clip(r0, c0, size) else {
            return;
        };
        if range.disjoint(min, max) {
            return;
        }
        let internal = match pos {
            None => self.root_internal(),
            Some(p) => self.has_children(p),
        };
        if range.covers(min, max) || !internal {
            // A leaf is uniform, so not disjoint means covered.
            clip.push_cells(out);
            return;
        }
        let k = self.geom.k;
        let child = size / k;
        let base = self.child_base(pos);
        for i in 0..k {
            for j in 0..k {
                let (cr, cc) = (r0 + i * child, c0 + j * child);
                if window.clip(cr, cc, child).is_none() {
                    continue;
                }
                let cpos = base + i * k + j;
                let cmax = max - self.max_gap(cpos);
                let cmin = if self.has_children(cpos) {
                    min + self.min_gap(cpos)
                } else {
                    cmax
                };
                self.collect(Some(cpos), cr, cc, child, cmin, cmax, range, window, out);
            }
        }
    }

    pub fn decompress(&self) -> Raster {
        let mut values = vec![0i32; self.geom.rows * self.geom.cols];
        self.fill(None, 0, 0, self.geom.side, self.root_max, &mut values);
        Raster::new(self.geom.rows, self.geom.cols, values).expect("dimensions validated at build")
    }

    fn fill(&self, pos: Option<usize>, r0: usize, c0: usize, size: usize, max: i64, out: &mut [i32]) {
        if self.geom.outside(r0, c0) {
            return;
        }
        let internal = match pos {
            None => self.root_internal(),
            Some(p) => self.has_children(p),
        };
        if !internal {
            let cols = self.geom.cols;
            for r in r0..(r0 + size).min(self.geom.rows) {
                out[r * cols + c0..r * cols + (c0 + size).min(cols)].fill(max as i32);
            }
            return;
        }
        let k = self.geom.k;
        let child = size / k;
        let base = self.child_base(pos);
        for i in 0..k {
            for j in 0..k {
                let cpos = base + i * k + j;
                self.fill(
                    Some(cpos),
                    r0 + i * child,
                    c0 + j * child,
                    child,
                    max - self.max_gap(cpos),
                    out,
                );
            }
        }
    }

    pub fn stats(&self) -> K2RasterStats {
        K2RasterStats {
            bits_t: self.t.len(),
            bits_lmax: self.lmax.payload_bits(),
            bits_lmin: self.lmin.payload_bits(),
            total_bytes: crate::dataio::container::K2R_PREAMBLE_LEN + self.encoded_len(),
            node_count: self.node_count(),
        }
    }

    /// Size of the block written by [`Self::write_to`].
    pub(crate) fn encoded_len(&self) -> usize {
        BLOCK_HEADER_LEN + self.t.encoded_len() + self.lmax.encoded_len() + self.lmin.encoded_len()
    }

    /// k, side, rows, cols, root_min, root_max, then T, Lmax, Lmin.
    pub(crate) fn write_to(&self, w: &mut ByteWriter) {
        w.put_u32(self.geom.k as u32);
        w.put_u64(self.geom.side as u64);
        w.put_u32(self.geom.rows as u32);
        w.put_u32(self.geom.cols as u32);
        w.put_i32(self.root_min as i32);
        w.put_i32(self.root_max as i32);
        self.t.write_to(w);
        self.lmax.write_to(w);
        self.lmin.write_to(w);
    }

    pub(crate) fn read_from(r: &mut ByteReader<'_>) -> Result<Self> {
        let k = r.u32()? as usize;
        let side = r.len_u64()?;
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        let root_min = i64::from(r.i32()?);
        let root_max = i64::from(r.i32()?);
        let geom = Geometry::from_stored(k, side, rows, cols)?;
        if root_min > root_max {
            return Err(Error::Format("root min exceeds root max".into()));
        }
        let t = RankBitVector::read_from(r)?;
        let lmax = DacSequence::read_from(r)?;
        let lmin = DacSequence::read_from(r)?;
        let nodes = expected_nodes(&geom, &t, root_min < root_max)?;
        if lmax.len() != nodes || lmin.len() != t.count_ones() {
            return Err(Error::Format("gap arrays inconsistent with topology".into()));
        }
        Ok(Self {
            geom,
            root_min,
            root_max,
            t,
            lmax,
            lmin,
        })
    }
}

const BLOCK_HEADER_LEN: usize = 4 + 8 + 4 + 4 + 4 + 4;

/// Checks that `t` describes a well-formed level-order topology for `geom`
/// and returns the number of non-root nodes it implies.
pub(crate) fn expected_nodes(geom: &Geometry, t: &RankBitVector, root_internal: bool) -> Result<usize> {
    let bad = || Error::Format("topology bitmap inconsistent with dimensions".into());
    if geom.depth == 0 {
        return if root_internal || !t.is_empty() {
            Err(bad())
        } else {
            Ok(0)
        };
    }
    let k2 = geom.k2();
    let mut level = if root_internal { k2 } else { 0 };
    let mut consumed = 0usize;
    for _ in 1..geom.depth {
        let end = consumed.checked_add(level).filter(|&e| e <= t.len()).ok_or_else(bad)?;
        let ones = t.rank1_unchecked(end) - t.rank1_unchecked(consumed);
        consumed = end;
        level = ones * k2;
    }
    if consumed != t.len() {
        return Err(bad());
    }
    Ok(consumed + level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_raster(rng: &mut ChaCha8Rng, rows: usize, cols: usize, spread: i32) -> Raster {
        Raster::from_fn(rows, cols, |_, _| rng.gen_range(-spread..=spread)).unwrap()
    }

    fn brute_cells(m: &Raster, vb: i64, ve: i64, w: &Window) -> Vec<Cell> {
        let mut out = Vec::new();
        for r in w.r1..=w.r2 {
            for c in w.c1..=w.c2 {
                let v = i64::from(m.at(r, c));
                if vb <= v && v <= ve {
                    out.push(Cell::new(r, c));
                }
            }
        }
        out
    }

    #[test]
    fn uniform_raster_collapses_to_root() {
        let m = Raster::filled(4, 4, 7).unwrap();
        let s = K2Raster::build(&m, 2).unwrap();
        assert_eq!((s.root_min(), s.root_max()), (7, 7));
        assert!(s.topology().is_empty());
        assert!(s.max_gaps().is_empty());
        assert!(s.min_gaps().is_empty());
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(s.get_cell(r, c).unwrap(), 7);
            }
        }
        let full = m.full_window();
        assert_eq!(s.get_cells(7, 7, full).unwrap().len(), 16);
        assert!(s.get_cells(8, 9, full).unwrap().is_empty());
        assert_eq!(s.decompress(), m);
        let st = s.stats();
        assert_eq!(st.node_count, 1);
        assert_eq!(
            st.total_bytes,
            crate::dataio::container::K2R_PREAMBLE_LEN + BLOCK_HEADER_LEN + 8 + 1 + 1
        );
    }

    #[test]
    fn two_by_two_hand_trace() {
        let m = Raster::from_rows(&[vec![1, 2], vec![3, 4]]).unwrap();
        let s = K2Raster::build(&m, 2).unwrap();
        assert_eq!((s.root_min(), s.root_max()), (1, 4));
        assert!(s.topology().is_empty());
        assert_eq!(s.max_gaps().iter().collect::<Vec<_>>(), vec![3, 2, 1, 0]);
        assert!(s.min_gaps().is_empty());
        assert_eq!(s.get_cell(1, 0).unwrap(), 3);
        assert_eq!(s.decompress(), m);
        assert!(s.get_cell(2, 0).is_err());
        assert!(s.get_cell(0, 2).is_err());
    }

    #[test]
    fn one_by_one() {
        let m = Raster::filled(1, 1, -3).unwrap();
        let s = K2Raster::build(&m, 2).unwrap();
        assert_eq!(s.side(), 1);
        assert!(s.topology().is_empty() && s.max_gaps().is_empty());
        assert_eq!(s.get_cell(0, 0).unwrap(), -3);
    }

    #[test]
    fn bad_arity() {
        let m = Raster::filled(2, 2, 0).unwrap();
        assert!(K2Raster::build(&m, 1).is_err());
    }

    #[test]
    fn structural_invariants_on_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in [2, 3, 4] {
            for _ in 0..20 {
                let (rows, cols) = (rng.gen_range(1..40), rng.gen_range(1..40));
                let m = random_raster(&mut rng, rows, cols, 3);
                let s = K2Raster::build(&m, k).unwrap();
                assert_eq!(s.min_gaps().len(), s.topology().count_ones());
                assert_eq!(
                    expected_nodes(s.geometry(), s.topology(), s.root_internal()).unwrap(),
                    s.max_gaps().len()
                );
                assert_eq!(s.decompress(), m);
            }
        }
    }

    #[test]
    fn dense_oracle_cells_and_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let m = random_raster(&mut rng, 64, 64, 5);
        let s = K2Raster::build(&m, 2).unwrap();
        for r in 0..64 {
            for c in 0..64 {
                assert_eq!(s.get_cell(r, c).unwrap(), m.at(r, c));
            }
        }
        for _ in 0..100 {
            let (r1, r2) = {
                let a = rng.gen_range(0..64);
                (a, rng.gen_range(a..64))
            };
            let (c1, c2) = {
                let a = rng.gen_range(0..64);
                (a, rng.gen_range(a..64))
            };
            let vb = rng.gen_range(-6..=6);
            let ve = rng.gen_range(vb..=7);
            let w = Window::new(r1, r2, c1, c2);
            assert_eq!(s.get_cells(vb, ve, w).unwrap(), brute_cells(&m, vb, ve, &w));
        }
        let full = m.full_window();
        assert_eq!(s.get_cells(-5, 5, full).unwrap().len(), 64 * 64);
        assert!(s.get_cells(3, 2, full).is_err());
        assert!(s.get_cells(0, 0, Window::new(0, 64, 0, 0)).is_err());
    }

    #[test]
    fn many_roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for i in 0..200 {
            let (rows, cols) = (rng.gen_range(1..=128), rng.gen_range(1..=128));
            let spread = [0, 1, 4, 1000][i % 4];
            let m = random_raster(&mut rng, rows, cols, spread);
            assert_eq!(K2Raster::build(&m, 2).unwrap().decompress(), m);
        }
    }
}
