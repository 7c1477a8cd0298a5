//! Synthetic slowly-changing raster series.
//!
//! Two spatially smooth endpoints are generated from a seed and the frames
//! in between follow the per-cell linear interpolant, rounded half away from
//! zero. A cell changes between consecutive frames only when its rounded
//! interpolant does, so more steps means a slower change rate. Everything is
//! integer arithmetic, so output is identical across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Resolution of the raw noise before rescaling.
const NOISE_LEVELS: i64 = 1 << 16;

/// Spatially autocorrelated raster with values in `[lo, hi]`.
///
/// `smoothness` is the radius of a box filter applied three times in each
/// direction; 0 yields independent uniform noise.
pub fn gen_random_smooth(rows: usize, cols: usize, lo: i32, hi: i32, smoothness: usize, seed: u64) -> Result<Raster> {
    if lo > hi {
        return Err(Error::InvalidArgument(format!("empty value range [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if smoothness == 0 {
        return Raster::from_fn(rows, cols, |_, _| rng.gen_range(lo..=hi));
    }
    let mut field: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(0..NOISE_LEVELS)).collect();
    for _ in 0..3 {
        box_blur(&mut field, rows, cols, smoothness, true);
        box_blur(&mut field, rows, cols, smoothness, false);
    }
    let (fmin, fmax) = field
        .iter()
        .fold((i64::MAX, i64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    let span = fmax - fmin;
    let out_span = i64::from(hi) - i64::from(lo);
    let values = field
        .iter()
        .map(|&v| {
            let scaled = if span == 0 {
                0
            } else {
                div_round_half_away((v - fmin) * out_span, span)
            };
            (i64::from(lo) + scaled) as i32
        })
        .collect();
    Raster::new(rows, cols, values)
}

/// One pass of a clamped-edge box filter along rows or columns.
fn box_blur(field: &mut [i64], rows: usize, cols: usize, radius: usize, along_rows: bool) {
    let (lines, len) = if along_rows { (rows, cols) } else { (cols, rows) };
    let idx = |line: usize, i: usize| if along_rows { line * cols + i } else { i * cols + line };
    let width = (2 * radius + 1) as i64;
    let mut buf = vec![0i64; len];
    for line in 0..lines {
        for (i, slot) in buf.iter_mut().enumerate() {
            let mut sum = 0;
            for d in 0..=2 * radius {
                let j = (i + d).saturating_sub(radius).min(len - 1);
                sum += field[idx(line, j)];
            }
            *slot = div_round_half_away(sum, width);
        }
        for (i, &v) in buf.iter().enumerate() {
            field[idx(line, i)] = v;
        }
    }
}

/// `num / den` rounded half away from zero; `den > 0`.
fn div_round_half_away(num: i64, den: i64) -> i64 {
    let q = num / den;
    let rem = num % den;
    if 2 * rem.abs() >= den {
        q + num.signum()
    } else {
        q
    }
}

/// Frame `i` of the interpolation from `m0` to `m1` over `steps` steps.
fn interpolate(m0: &Raster, m1: &Raster, steps: usize, i: usize) -> Raster {
    let (steps, i) = (steps as i64, i as i64);
    let values = m0
        .values()
        .iter()
        .zip(m1.values())
        .map(|(&a, &b)| {
            let (a, b) = (i64::from(a), i64::from(b));
            div_round_half_away(a * steps + (b - a) * i, steps) as i32
        })
        .collect();
    Raster::new(m0.rows(), m0.cols(), values).expect("shape of m0")
}

/// `steps + 1` frames moving linearly from `m0` (frame 0) to `m1` (last frame).
pub fn gen_interpolated(m0: &Raster, m1: &Raster, steps: usize) -> Result<Vec<Raster>> {
    gen_interpolated_prefix(m0, m1, steps, steps + 1)
}

/// The first `count` frames of [`gen_interpolated`].
pub fn gen_interpolated_prefix(m0: &Raster, m1: &Raster, steps: usize, count: usize) -> Result<Vec<Raster>> {
    m0.check_same_shape(m1)?;
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be >= 1".into()));
    }
    Ok((0..count.min(steps + 1))
        .map(|i| interpolate(m0, m1, steps, i))
        .collect())
}

/// Parameters of a generated dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub rows: usize,
    pub cols: usize,
    pub steps: usize,
    /// Keep only the first `take` frames.
    pub take: Option<usize>,
    pub lo: i32,
    pub hi: i32,
    pub smoothness: usize,
    pub seed: u64,
}

impl GenConfig {
    pub const DEFAULT_LO: i32 = 0;
    pub const DEFAULT_HI: i32 = 400;
    pub const DEFAULT_SMOOTHNESS: usize = 8;

    pub fn new(rows: usize, cols: usize, steps: usize, seed: u64) -> Self {
        Self {
            rows,
            cols,
            steps,
            take: None,
            lo: Self::DEFAULT_LO,
            hi: Self::DEFAULT_HI,
            smoothness: Self::DEFAULT_SMOOTHNESS,
            seed,
        }
    }

    pub fn take(mut self, take: usize) -> Self {
        self.take = Some(take);
        self
    }
}

/// Interpolated series between two smooth endpoints derived from the seed.
pub fn gen_series(cfg: &GenConfig) -> Result<Vec<Raster>> {
    let m0 = gen_random_smooth(cfg.rows, cfg.cols, cfg.lo, cfg.hi, cfg.smoothness, cfg.seed)?;
    let m1 = gen_random_smooth(
        cfg.rows,
        cfg.cols,
        cfg.lo,
        cfg.hi,
        cfg.smoothness,
        cfg.seed.wrapping_add(1),
    )?;
    gen_interpolated_prefix(&m0, &m1, cfg.steps, cfg.take.unwrap_or(usize::MAX))
}
