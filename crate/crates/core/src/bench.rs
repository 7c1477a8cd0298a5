//! Query workloads and timing.
//!
//! Query files hold one query per line; blank lines and lines starting with
//! `#` are skipped:
//!
//! ```text
//! cell t r c
//! cells t vb ve r1 r2 c1 c2
//! ```

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::DenseSeries;
use crate::raster::{Cell, Window};
use crate::tk2raster::{Frame, TK2Raster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Query {
    Cell { t: usize, r: usize, c: usize },
    Cells { t: usize, vb: i64, ve: i64, window: Window },
}

impl Query {
    pub fn kind(&self) -> QueryKind {
        match self {
            Query::Cell { .. } => QueryKind::Cell,
            Query::Cells { .. } => QueryKind::Cells,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Cell,
    Cells,
}

impl std::fmt::Display for QueryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            QueryKind::Cell => "get_cell",
            QueryKind::Cells => "get_cells",
        })
    }
}

/// Anything that answers both query kinds.
pub trait QueryTarget {
    fn get_cell(&self, r: usize, c: usize, t: usize) -> Result<i32>;
    fn get_cells(&self, vb: i64, ve: i64, window: Window, t: usize) -> Result<Vec<Cell>>;

    fn run(&self, q: &Query) -> Result<usize> {
        match *q {
            Query::Cell { t, r, c } => self.get_cell(r, c, t).map(|v| v as usize),
            Query::Cells { t, vb, ve, window } => self.get_cells(vb, ve, window, t).map(|v| v.len()),
        }
    }
}

impl QueryTarget for TK2Raster {
    fn get_cell(&self, r: usize, c: usize, t: usize) -> Result<i32> {
        self.get_cell_value(r, c, t)
    }

    fn get_cells(&self, vb: i64, ve: i64, window: Window, t: usize) -> Result<Vec<Cell>> {
        TK2Raster::get_cells(self, vb, ve, window, t)
    }
}

impl QueryTarget for DenseSeries {
    fn get_cell(&self, r: usize, c: usize, t: usize) -> Result<i32> {
        DenseSeries::get_cell(self, r, c, t)
    }

    fn get_cells(&self, vb: i64, ve: i64, window: Window, t: usize) -> Result<Vec<Cell>> {
        DenseSeries::get_cells(self, vb, ve, window, t)
    }
}

/// Shape of a random workload.
#[derive(Debug, Clone)]
pub struct QuerySpec {
    /// Queries of each kind.
    pub count: usize,
    pub seed: u64,
    /// Instants queries are drawn from.
    pub frames: Vec<usize>,
    pub rows: usize,
    pub cols: usize,
    /// Inclusive bounds for the start of value ranges.
    pub values: (i64, i64),
    /// Largest value range length; lengths are drawn from `1..=max_span`.
    pub max_span: i64,
    /// Smallest window side; clamped to the raster.
    pub min_window: usize,
}

impl QuerySpec {
    pub const DEFAULT_COUNT: usize = 1000;
    pub const DEFAULT_MAX_SPAN: i64 = 4;
    pub const DEFAULT_MIN_WINDOW: usize = 4;

    /// All instants of `s`, value bounds taken from its snapshots.
    pub fn for_structure(s: &TK2Raster, count: usize, seed: u64) -> Self {
        Self {
            count,
            seed,
            frames: (0..s.tau()).collect(),
            rows: s.rows(),
            cols: s.cols(),
            values: snapshot_value_bounds(s),
            max_span: Self::DEFAULT_MAX_SPAN,
            min_window: Self::DEFAULT_MIN_WINDOW,
        }
    }

    pub fn frames(mut self, frames: Vec<usize>) -> Self {
        self.frames = frames;
        self
    }
}

/// Smallest root minimum and largest root maximum over the snapshots.
pub fn snapshot_value_bounds(s: &TK2Raster) -> (i64, i64) {
    s.frames()
        .iter()
        .filter_map(|f| match f {
            Frame::Snapshot(k) => Some((k.root_min(), k.root_max())),
            Frame::Delta { .. } => None,
        })
        .fold((i64::MAX, i64::MIN), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)))
}

pub fn delta_frames(s: &TK2Raster) -> Vec<usize> {
    (0..s.tau()).filter(|&t| !s.frames()[t].is_snapshot()).collect()
}

/// `spec.count` cell queries followed by `spec.count` window queries.
pub fn random_queries(spec: &QuerySpec) -> Result<Vec<Query>> {
    if spec.frames.is_empty() {
        return Err(Error::InvalidArgument("no frames to query".into()));
    }
    if spec.rows == 0 || spec.cols == 0 || spec.values.0 > spec.values.1 || spec.max_span < 1 {
        return Err(Error::InvalidArgument(format!("bad query spec {spec:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(2 * spec.count);
    for _ in 0..spec.count {
        out.push(Query::Cell {
            t: spec.frames[rng.gen_range(0..spec.frames.len())],
            r: rng.gen_range(0..spec.rows),
            c: rng.gen_range(0..spec.cols),
        });
    }
    let side = |rng: &mut ChaCha8Rng, n: usize| -> (usize, usize) {
        let len = rng.gen_range(spec.min_window.clamp(1, n)..=n);
        let start = rng.gen_range(0..=n - len);
        (start, start + len - 1)
    };
    for _ in 0..spec.count {
        let t = spec.frames[rng.gen_range(0..spec.frames.len())];
        let (r1, r2) = side(&mut rng, spec.rows);
        let (c1, c2) = side(&mut rng, spec.cols);
        let vb = rng.gen_range(spec.values.0..=spec.values.1);
        let ve = vb + rng.gen_range(0..spec.max_span);
        out.push(Query::Cells {
            t,
            vb,
            ve,
            window: Window::new(r1, r2, c1, c2),
        });
    }
    Ok(out)
}

pub fn parse_queries(text: &str) -> Result<Vec<Query>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| Error::Format(format!("query line {}: {what}: {line:?}", lineno + 1));
        let mut fields = line.split_whitespace();
        let kind = fields.next().unwrap_or_default();
        let nums: Vec<i64> = fields
            .map(|f| f.parse::<i64>().map_err(|_| bad("not an integer")))
            .collect::<Result<_>>()?;
        let idx = |v: i64| usize::try_from(v).map_err(|_| bad("negative index"));
        let q = match (kind, nums.as_slice()) {
            ("cell", &[t, r, c]) => Query::Cell {
                t: idx(t)?,
                r: idx(r)?,
                c: idx(c)?,
            },
            ("cells", &[t, vb, ve, r1, r2, c1, c2]) => Query::Cells {
                t: idx(t)?,
                vb,
                ve,
                window: Window::new(idx(r1)?, idx(r2)?, idx(c1)?, idx(c2)?),
            },
            ("cell" | "cells", _) => return Err(bad("wrong number of fields")),
            _ => return Err(bad("unknown query type")),
        };
        out.push(q);
    }
    Ok(out)
}

pub fn format_queries(queries: &[Query]) -> String {
    let mut s = String::new();
    for q in queries {
        match *q {
            Query::Cell { t, r, c } => s.push_str(&format!("cell {t} {r} {c}\n")),
            Query::Cells { t, vb, ve, window: w } => {
                s.push_str(&format!("cells {t} {vb} {ve} {} {} {} {}\n", w.r1, w.r2, w.c1, w.c2))
            }
        }
    }
    s
}

/// Timing summary for one query kind, in microseconds per query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KindReport {
    pub kind: QueryKind,
    pub count: usize,
    pub mean_us: f64,
    pub p50_us: f64,
    pub p99_us: f64,
    /// Sum of result sizes over one pass, as a cheap consistency check.
    pub checksum: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub repetitions: usize,
    pub kinds: Vec<KindReport>,
}

impl BenchReport {
    pub fn kind(&self, kind: QueryKind) -> Option<&KindReport> {
        self.kinds.iter().find(|k| k.kind == kind)
    }
}

/// Runs every query `repetitions` times; the per-query time is the mean
/// over repetitions.
pub fn run_bench<T: QueryTarget + ?Sized>(target: &T, queries: &[Query], repetitions: usize) -> Result<BenchReport> {
    let repetitions = repetitions.max(1);
    for q in queries {
        target.run(q)?;
    }
    let mut kinds = Vec::new();
    for kind in [QueryKind::Cell, QueryKind::Cells] {
        let qs: Vec<&Query> = queries.iter().filter(|q| q.kind() == kind).collect();
        if qs.is_empty() {
            continue;
        }
        let mut per_query = vec![0f64; qs.len()];
        let mut checksum = 0u64;
        for rep in 0..repetitions {
            for (slot, q) in per_query.iter_mut().zip(&qs) {
                let start = Instant::now();
                let n = black_box(target.run(black_box(q))?);
                *slot += start.elapsed().as_secs_f64();
                if rep == 0 {
                    checksum = checksum.wrapping_add(n as u64);
                }
            }
        }
        let scale = 1e6 / repetitions as f64;
        let mut us: Vec<f64> = per_query.iter().map(|s| s * scale).collect();
        let mean_us = us.iter().sum::<f64>() / us.len() as f64;
        us.sort_by(f64::total_cmp);
        kinds.push(KindReport {
            kind,
            count: qs.len(),
            mean_us,
            p50_us: percentile(&us, 0.50),
            p99_us: percentile(&us, 0.99),
            checksum,
        });
    }
    Ok(BenchReport { repetitions, kinds })
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}
