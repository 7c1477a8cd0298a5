//! Difference tree of one instant against its reference snapshot.
//!
//! The target and snapshot matrices are partitioned in lockstep. For each
//! node, with `(min_t, max_t)` from the target and `(min_s, max_s)` from
//! the snapshot over the same submatrix:
//!
//! - target minus snapshot is one constant `alpha` over the submatrix: leaf,
//!   `eqB` bit 1, max gap `max_t - max_s` (which equals `alpha`);
//! - otherwise, target uniform (or a single cell): leaf, `eqB` bit 0, max
//!   gap `max_t - max_s`;
//! - otherwise: internal, max gap `max_t - max_s`, min gap `min_t - min_s`.
//!
//! All gaps are zigzag encoded. `eqB` holds one bit per leaf in level order,
//! so for a leaf with a `T` bit at `z` its bit is `eqB[rank0(T, z)]`; leaves at
//! the cell level follow and always carry 0. The root is described by
//! [`DeltaRoot`] instead of `T`/`Lmax`/`Lmin`.

use crate::bitvector::{BitBuilder, RankBitVector};
use crate::dataio::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::intcodes::{zigzag_decode, zigzag_encode, DacSequence, DEFAULT_CHUNK_WIDTH};
use crate::k2raster::{expected_nodes, K2Raster};
use crate::raster::{Cell, Raster, ValueRange, Window};

/// How a delta node was resolved during construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaNodeKind {
    /// Split into `k^2` children.
    Internal,
    /// Uniform shift of the snapshot submatrix (`eqB` = 1).
    Shift,
    /// Uniform submatrix in the target instant (`eqB` = 0).
    Uniform,
}

impl DeltaNodeKind {
    fn code(self) -> u8 {
        match self {
            Self::Internal => 0,
            Self::Shift => 1,
            Self::Uniform => 2,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(Self::Internal),
            1 => Ok(Self::Shift),
            2 => Ok(Self::Uniform),
            _ => Err(Error::Format(format!("unknown delta root kind {c}"))),
        }
    }
}

/// Root of a difference tree: gaps against the snapshot's root min/max.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeltaRoot {
    pub kind: DeltaNodeKind,
    pub max_gap: i64,
    pub min_gap: i64,
}

/// Difference tree of one instant against a snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct K2RasterDelta {
    geom: Geometry,
    root: DeltaRoot,
    t: RankBitVector,
    eqb: RankBitVector,
    lmax: DacSequence,
    lmin: DacSequence,
}

#[derive(Clone, Copy)]
struct Pair {
    tmin: i64,
    tmax: i64,
    smin: i64,
    smax: i64,
    shift: Option<i64>,
}

#[derive(Clone, Copy)]
struct Rec {
    pair: Option<Pair>,
    kind: DeltaNodeKind,
}

struct Builder<'a> {
    snapshot: &'a Raster,
    target: &'a Raster,
    geom: Geometry,
    levels: Vec<Vec<Rec>>,
}

impl Builder<'_> {
    fn classify(&self, pair: Option<Pair>, depth: usize) -> DeltaNodeKind {
        match pair {
            _ if depth == self.geom.depth => DeltaNodeKind::Uniform,
            None => DeltaNodeKind::Uniform,
            Some(p) if p.shift.is_some() => DeltaNodeKind::Shift,
            Some(p) if p.tmin == p.tmax => DeltaNodeKind::Uniform,
            Some(_) => DeltaNodeKind::Internal,
        }
    }

    fn stats(&mut self, depth: usize, r0: usize, c0: usize, size: usize) -> Option<Pair> {
        if self.geom.outside(r0, c0) {
            return None;
        }
        if size == 1 {
            let tv = i64::from(self.target.at(r0, c0));
            let sv = i64::from(self.snapshot.at(r0, c0));
            return Some(Pair {
                tmin: tv,
                tmax: tv,
                smin: sv,
                smax: sv,
                shift: Some(tv - sv),
            });
        }
        let child = size / self.geom.k;
        let mut acc: Option<Pair> = None;
        for i in 0..self.geom.k {
            for j in 0..self.geom.k {
                let mark = self.levels[depth + 2].len();
                let p = self.stats(depth + 1, r0 + i * child, c0 + j * child, child);
                let kind = self.classify(p, depth + 1);
                if kind != DeltaNodeKind::Internal {
                    // Children of a leaf are leaves, so their own subtrees
                    // were already dropped.
                    self.levels[depth + 2].truncate(mark);
                }
                self.levels[depth + 1].push(Rec { pair: p, kind });
                if let Some(p) = p {
                    acc = Some(match acc {
                        None => p,
                        Some(a) => Pair {
                            tmin: a.tmin.min(p.tmin),
                            tmax: a.tmax.max(p.tmax),
                            smin: a.smin.min(p.smin),
                            smax: a.smax.max(p.smax),
                            shift: a.shift.filter(|&x| Some(x) == p.shift),
                        },
                    });
                }
            }
        }
        acc
    }
}

impl K2RasterDelta {
    /// Encodes `target` against `snapshot` with arity `k`.
    pub fn build(snapshot: &Raster, target: &Raster, k: usize) -> Result<Self> {
        snapshot.check_same_shape(target)?;
        let geom = Geometry::new(target.rows(), target.cols(), k)?;
        let mut b = Builder {
            snapshot,
            target,
            geom,
            levels: vec![Vec::new(); geom.depth + 2],
        };
        let root_pair = b.stats(0, 0, 0, geom.side).expect("root overlaps raster");
        let root = DeltaRoot {
            kind: b.classify(Some(root_pair), 0),
            max_gap: root_pair.tmax - root_pair.smax,
            min_gap: root_pair.tmin - root_pair.smin,
        };
        if root.kind != DeltaNodeKind::Internal {
            b.levels.iter_mut().for_each(Vec::clear);
        }

        let mut t = BitBuilder::new();
        let mut eqb = BitBuilder::new();
        let mut lmax = Vec::new();
        let mut lmin = Vec::new();
        for depth in 1..=geom.depth {
            for rec in &b.levels[depth] {
                let (gmax, gmin) = rec.pair.map_or((0, 0), |p| (p.tmax - p.smax, p.tmin - p.smin));
                lmax.push(zigzag_encode(gmax));
                if depth < geom.depth {
                    t.push(rec.kind == DeltaNodeKind::Internal);
                }
                match rec.kind {
                    DeltaNodeKind::Internal => lmin.push(zigzag_encode(gmin)),
                    DeltaNodeKind::Shift => eqb.push(true),
                    DeltaNodeKind::Uniform => eqb.push(false),
                }
            }
        }
        debug_assert!(root.kind == DeltaNodeKind::Internal || lmax.is_empty());

        Ok(Self {
            geom,
            root,
            t: t.finish(),
            eqb: eqb.finish(),
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

    pub fn root(&self) -> DeltaRoot {
        self.root
    }

    pub fn topology(&self) -> &RankBitVector {
        &self.t
    }

    pub fn eq_bitmap(&self) -> &RankBitVector {
        &self.eqb
    }

    /// Zigzag-encoded max gaps, one per non-root node.
    pub fn max_gaps(&self) -> &DacSequence {
        &self.lmax
    }

    /// Zigzag-encoded min gaps, one per internal non-root node.
    pub fn min_gaps(&self) -> &DacSequence {
        &self.lmin
    }

    pub fn node_count(&self) -> usize {
        1 + self.lmax.len()
    }

    pub(crate) fn geometry(&self) -> &Geometry {
        &self.geom
    }

    #[inline]
    fn child_base(&self, pos: Option<usize>) -> usize {
        pos.map_or(0, |p| self.t.rank1_unchecked(p + 1) * self.geom.k2())
    }

    #[inline]
    fn has_children(&self, pos: usize) -> bool {
        pos < self.t.len() && self.t.bit(pos)
    }

    /// `eqB` bit for a leaf that has an explicit `T` bit.
    #[inline]
    fn shift_leaf(&self, pos: usize) -> bool {
        pos < self.t.len() && self.eqb.bit(self.t.rank0_unchecked(pos))
    }

    #[inline]
    fn max_gap(&self, pos: usize) -> i64 {
        zigzag_decode(self.lmax.get(pos))
    }

    #[inline]
    fn min_gap(&self, pos: usize) -> i64 {
        zigzag_decode(self.lmin.get(self.t.rank1_unchecked(pos)))
    }

    pub(crate) fn encoded_len(&self) -> usize {
        BLOCK_HEADER_LEN
            + self.t.encoded_len()
            + self.eqb.encoded_len()
            + self.lmax.encoded_len()
            + self.lmin.encoded_len()
    }

    /// k, side, rows, cols, root kind, zigzagged root gaps, then T, eqB,
    /// Lmax, Lmin.
    pub(crate) fn write_to(&self, w: &mut ByteWriter) {
        w.put_u32(self.geom.k as u32);
        w.put_u64(self.geom.side as u64);
        w.put_u32(self.geom.rows as u32);
        w.put_u32(self.geom.cols as u32);
        w.put_u8(self.root.kind.code());
        w.put_u64(zigzag_encode(self.root.max_gap));
        w.put_u64(zigzag_encode(self.root.min_gap));
        self.t.write_to(w);
        self.eqb.write_to(w);
        self.lmax.write_to(w);
        self.lmin.write_to(w);
    }

    pub(crate) fn read_from(r: &mut ByteReader<'_>) -> Result<Self> {
        let k = r.u32()? as usize;
        let side = r.len_u64()?;
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        let kind = DeltaNodeKind::from_code(r.u8()?)?;
        let max_gap = zigzag_decode(r.u64()?);
        let min_gap = zigzag_decode(r.u64()?);
        let geom = Geometry::from_stored(k, side, rows, cols)?;
        if geom.depth == 0 && kind == DeltaNodeKind::Internal {
            return Err(Error::Format("1x1 delta with internal root".into()));
        }
        let t = RankBitVector::read_from(r)?;
        let eqb = RankBitVector::read_from(r)?;
        let lmax = DacSequence::read_from(r)?;
        let lmin = DacSequence::read_from(r)?;
        let nodes = expected_nodes(&geom, &t, kind == DeltaNodeKind::Internal)?;
        if lmax.len() != nodes || lmin.len() != t.count_ones() || eqb.len() != t.count_zeros() + (nodes - t.len()) {
            return Err(Error::Format("delta arrays inconsistent with topology".into()));
        }
        Ok(Self {
            geom,
            root: DeltaRoot { kind, max_gap, min_gap },
            t,
            eqb,
            lmax,
            lmin,
        })
    }
}

const BLOCK_HEADER_LEN: usize = 4 + 8 + 4 + 4 + 1 + 8 + 8;

/// Value of cell `(r, c)` by a synchronized descent of snapshot and delta.
///
/// A side that reaches a leaf stops moving and keeps its last max value.
/// Reaching a delta leaf with `eqB` = 0 ends the search; with `eqB` = 1 the
/// delta side stops with its gap as the shift and the snapshot continues.
pub(crate) fn get_cell(snap: &K2Raster, delta: &K2RasterDelta, mut r: usize, mut c: usize) -> i64 {
    let k = snap.k();
    let mut max_s = snap.root_max();
    let mut gap = delta.root.max_gap;
    let mut s_live = snap.root_internal();
    let mut t_live = match delta.root.kind {
        DeltaNodeKind::Uniform => return max_s + gap,
        DeltaNodeKind::Shift => false,
        DeltaNodeKind::Internal => true,
    };
    let (mut s_base, mut t_base) = (0, 0);
    let mut size = snap.side();
    while s_live || t_live {
        size /= k;
        let child = (r / size) * k + c / size;
        if s_live {
            let pos = s_base + child;
            max_s -= snap.max_gap(pos);
            if snap.has_children(pos) {
                s_base = snap.child_base(Some(pos));
            } else {
                s_live = false;
            }
        }
        if t_live {
            let pos = t_base + child;
            gap = delta.max_gap(pos);
            if delta.has_children(pos) {
                t_base = delta.child_base(Some(pos));
            } else {
                t_live = false;
                if !delta.shift_leaf(pos) {
                    return max_s + gap;
                }
            }
        }
        r %= size;
        c %= size;
    }
    max_s + gap
}

/// Delta-side state of a node during multi-branch traversal.
#[derive(Clone, Copy)]
enum DeltaSide {
    Internal { pos: Option<usize>, gmin: i64, gmax: i64 },
    Shift(i64),
    Uniform(i64),
}

/// Synchronized node: snapshot `[smin, smax]` over the submatrix plus the
/// delta state. `s_pos` is `Some` while the snapshot node has children.
#[derive(Clone, Copy)]
struct SyncNode {
    r0: usize,
    c0: usize,
    size: usize,
    s_pos: Option<Option<usize>>,
    smin: i64,
    smax: i64,
    t: DeltaSide,
}

impl SyncNode {
    /// Exact `[min, max]` of the target submatrix.
    fn range(&self) -> (i64, i64) {
        match self.t {
            DeltaSide::Internal { gmin, gmax, .. } => (self.smin + gmin, self.smax + gmax),
            DeltaSide::Shift(a) => (self.smin + a, self.smax + a),
            DeltaSide::Uniform(v) => (v, v),
        }
    }

    fn is_leaf(&self) -> bool {
        match self.t {
            DeltaSide::Uniform(_) => true,
            DeltaSide::Shift(_) => self.s_pos.is_none(),
            DeltaSide::Internal { .. } => false,
        }
    }
}

struct Sync<'a> {
    snap: &'a K2Raster,
    delta: &'a K2RasterDelta,
}

impl Sync<'_> {
    fn root(&self) -> SyncNode {
        let (snap, delta) = (self.snap, self.delta);
        let (smin, smax) = (snap.root_min(), snap.root_max());
        let root = delta.root;
        SyncNode {
            r0: 0,
            c0: 0,
            size: snap.side(),
            s_pos: snap.root_internal().then_some(None),
            smin,
            smax,
            t: match root.kind {
                DeltaNodeKind::Internal => DeltaSide::Internal {
                    pos: None,
                    gmin: root.min_gap,
                    gmax: root.max_gap,
                },
                DeltaNodeKind::Shift => DeltaSide::Shift(root.max_gap),
                DeltaNodeKind::Uniform => DeltaSide::Uniform(smax + root.max_gap),
            },
        }
    }

    /// Child `(i, j)` of a node that is not a leaf.
    #[inline]
    fn child(&self, n: &SyncNode, i: usize, j: usize) -> SyncNode {
        let k = self.snap.k();
        let size = n.size / k;
        let idx = i * k + j;
        let (s_pos, smin, smax) = match n.s_pos {
            Some(p) => {
                let pos = self.snap.child_base(p) + idx;
                let smax = n.smax - self.snap.max_gap(pos);
                if self.snap.has_children(pos) {
                    (Some(Some(pos)), n.smin + self.snap.min_gap(pos), smax)
                } else {
                    (None, smax, smax)
                }
            }
            None => (None, n.smin, n.smax),
        };
        let t = match n.t {
            DeltaSide::Internal { pos, .. } => {
                let pos = self.delta.child_base(pos) + idx;
                let gmax = self.delta.max_gap(pos);
                if self.delta.has_children(pos) {
                    DeltaSide::Internal {
                        pos: Some(pos),
                        gmin: self.delta.min_gap(pos),
                        gmax,
                    }
                } else if self.delta.shift_leaf(pos) {
                    DeltaSide::Shift(gmax)
                } else {
                    DeltaSide::Uniform(smax + gmax)
                }
            }
            shifted => shifted,
        };
        SyncNode {
            r0: n.r0 + i * size,
            c0: n.c0 + j * size,
            size,
            s_pos,
            smin,
            smax,
            t,
        }
    }

    fn collect(&self, n: &SyncNode, range: &ValueRange, window: &Window, out: &mut Vec<Cell>) {
        let (min, max) = n.range();
        if range.disjoint(min, max) {
            return;
        }
        let clip = window.clip(n.r0, n.c0, n.size).expect("caller checked overlap");
        if range.covers(min, max) || n.is_leaf() {
            clip.push_cells(out);
            return;
        }
        let k = self.snap.k();
        let size = n.size / k;
        for i in 0..k {
            for j in 0..k {
                if window.clip(n.r0 + i * size, n.c0 + j * size, size).is_none() {
                    continue;
                }
                let child = self.child(n, i, j);
                self.collect(&child, range, window, out);
            }
        }
    }

    fn fill(&self, n: &SyncNode, out: &mut [i32]) {
        let geom = self.snap.geometry();
        if geom.outside(n.r0, n.c0) {
            return;
        }
        if n.is_leaf() {
            let v = n.range().1 as i32;
            let cols = geom.cols;
            for r in n.r0..(n.r0 + n.size).min(geom.rows) {
                out[r * cols + n.c0..r * cols + (n.c0 + n.size).min(cols)].fill(v);
            }
            return;
        }
        let k = geom.k;
        for i in 0..k {
            for j in 0..k {
                let child = self.child(n, i, j);
                self.fill(&child, out);
            }
        }
    }
}

fn check_pair(snap: &K2Raster, delta: &K2RasterDelta) {
    debug_assert_eq!(snap.geometry(), delta.geometry());
}

pub(crate) fn get_cells(snap: &K2Raster, delta: &K2RasterDelta, range: &ValueRange, window: &Window) -> Vec<Cell> {
    check_pair(snap, delta);
    let sync = Sync { snap, delta };
    let mut out = Vec::new();
    sync.collect(&sync.root(), range, window, &mut out);
    out.sort_unstable();
    out
}

pub(crate) fn decompress(snap: &K2Raster, delta: &K2RasterDelta) -> Raster {
    check_pair(snap, delta);
    let sync = Sync { snap, delta };
    let geom = snap.geometry();
    let mut values = vec![0i32; geom.rows * geom.cols];
    sync.fill(&sync.root(), &mut values);
    Raster::new(geom.rows, geom.cols, values).expect("dimensions validated at build")
}
