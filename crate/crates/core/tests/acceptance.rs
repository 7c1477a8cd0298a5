//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any FAIL.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use traster::bench::{random_queries, Query, QuerySpec, QueryTarget};
use traster::dataio::{self, gen_random_smooth, gen_series, GenConfig};
use traster::tk2raster::{DeltaNodeKind, K2RasterDelta};
use traster::{zigzag_decode, zigzag_encode, DacSequence, DenseSeries, RankBitVector, Raster, TK2Raster};

const AC1_SERIES: usize = 200;
const AC1_T_DELTAS: [usize; 5] = [1, 2, 4, 6, 10];
const AC1_MAX_SIDE: usize = 64;
const AC1_MAX_TAU: usize = 24;
const QUERIES_PER_CONFIG: usize = 1000;

const AC3_SIDE: usize = 256;
const AC3_TAKE: usize = 100;
const AC3_SEED: u64 = 20_17;
const AC3_SLOW_MAX_RATIO: f64 = 0.67;
const AC3_FAST_MAX_RATIO: f64 = 1.0;

const AC4_MAX_RATIO: f64 = 3.0;
const AC4_REPETITIONS: &str = "5";

const AC6_MAX_BITS: usize = 100_000;
const AC6_DAC_SEQUENCES: usize = 10_000;
const AC6_ZIGZAG_BOUND: i64 = 1_000_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Series families: slow interpolation, fast interpolation, i.i.d. noise
/// and a signed random walk.
fn test_series(i: usize) -> Vec<Raster> {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
    let rows = rng.gen_range(1..=AC1_MAX_SIDE);
    let cols = rng.gen_range(1..=AC1_MAX_SIDE);
    let tau = rng.gen_range(1..=AC1_MAX_TAU);
    let seed = rng.gen();
    match i % 4 {
        0 => {
            let mut cfg = GenConfig::new(rows, cols, rng.gen_range(200..=1000), seed).take(tau);
            cfg.hi = rng.gen_range(1..=400);
            cfg.smoothness = rng.gen_range(1..=8);
            gen_series(&cfg).unwrap()
        }
        1 => {
            let mut cfg = GenConfig::new(rows, cols, tau.max(2) - 1, seed);
            cfg.smoothness = rng.gen_range(0..=3);
            gen_series(&cfg).unwrap()
        }
        2 => (0..tau)
            .map(|t| gen_random_smooth(rows, cols, -3, 3, 0, seed.wrapping_add(t as u64)).unwrap())
            .collect(),
        _ => {
            let change = rng.gen_range(0.0..0.5);
            let mut cur = gen_random_smooth(rows, cols, -50, 50, 2, seed).unwrap();
            let mut out = vec![cur.clone()];
            for _ in 1..tau {
                cur = Raster::from_fn(rows, cols, |r, c| {
                    let v = cur.get(r, c).unwrap();
                    if rng.gen_bool(change) {
                        v + rng.gen_range(-2..=2)
                    } else {
                        v
                    }
                })
                .unwrap();
                out.push(cur.clone());
            }
            out
        }
    }
}

/// Wide and narrow value ranges over random windows of any size.
fn window_queries(o: &DenseSeries, seed: u64) -> Vec<Query> {
    let (lo, hi) = (0..o.tau())
        .flat_map(|t| (0..o.rows()).flat_map(move |r| (0..o.cols()).map(move |c| (r, c, t))))
        .map(|(r, c, t)| i64::from(o.get_cell(r, c, t).unwrap()))
        .fold((i64::MAX, i64::MIN), |(a, b), v| (a.min(v), b.max(v)));
    let spec = QuerySpec {
        count: QUERIES_PER_CONFIG,
        seed,
        frames: (0..o.tau()).collect(),
        rows: o.rows(),
        cols: o.cols(),
        values: (lo - 2, hi + 2),
        max_span: 4,
        min_window: 1,
    };
    let mut qs: Vec<Query> = random_queries(&spec)
        .unwrap()
        .into_iter()
        .filter(|q| matches!(q, Query::Cells { .. }))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for q in qs.iter_mut().skip(1).step_by(3) {
        if let Query::Cells { vb, ve, .. } = q {
            *ve = *vb + rng.gen_range(0..=(hi - lo).max(1));
        }
    }
    qs
}

fn same_answer(a: &impl QueryTarget, b: &impl QueryTarget, q: &Query) -> bool {
    match *q {
        Query::Cell { t, r, c } => a.get_cell(r, c, t).unwrap() == b.get_cell(r, c, t).unwrap(),
        Query::Cells { t, vb, ve, window } => {
            a.get_cells(vb, ve, window, t).unwrap() == b.get_cells(vb, ve, window, t).unwrap()
        }
    }
}

#[derive(Default)]
struct EquivalenceTally {
    configs: usize,
    cell_checks: usize,
    cell_failures: usize,
    window_checks: usize,
    window_failures: usize,
    decompress_failures: usize,
    reserialize_failures: usize,
    roundtrip_query_failures: usize,
    roundtrip_queries: usize,
}

impl EquivalenceTally {
    fn merge(&mut self, o: EquivalenceTally) {
        self.configs += o.configs;
        self.cell_checks += o.cell_checks;
        self.cell_failures += o.cell_failures;
        self.window_checks += o.window_checks;
        self.window_failures += o.window_failures;
        self.decompress_failures += o.decompress_failures;
        self.reserialize_failures += o.reserialize_failures;
        self.roundtrip_query_failures += o.roundtrip_query_failures;
        self.roundtrip_queries += o.roundtrip_queries;
    }
}

fn check_series(i: usize) -> EquivalenceTally {
    let series = test_series(i);
    let o = DenseSeries::from_series(&series).unwrap();
    let qs = window_queries(&o, i as u64);
    let mut tally = EquivalenceTally::default();
    for &t_delta in &AC1_T_DELTAS {
        let s = TK2Raster::build(&series, 2 + i % 3 * (i % 2), t_delta).unwrap();
        tally.configs += 1;
        for (t, frame) in series.iter().enumerate() {
            for r in 0..o.rows() {
                for c in 0..o.cols() {
                    tally.cell_checks += 1;
                    if s.get_cell_value(r, c, t).unwrap() != o.get_cell(r, c, t).unwrap() {
                        tally.cell_failures += 1;
                    }
                }
            }
            if s.decompress_frame(t).unwrap() != *frame {
                tally.decompress_failures += 1;
            }
        }
        for q in &qs {
            tally.window_checks += 1;
            if !same_answer(&s, &o, q) {
                tally.window_failures += 1;
            }
        }

        let bytes = dataio::serialize(&s);
        let back = dataio::deserialize(&bytes).unwrap();
        if dataio::serialize(&back) != bytes {
            tally.reserialize_failures += 1;
        }
        let spec = QuerySpec::for_structure(&s, QUERIES_PER_CONFIG / 2, i as u64 + 7);
        for q in random_queries(&spec).unwrap() {
            tally.roundtrip_queries += 1;
            if !same_answer(&s, &back, &q) {
                tally.roundtrip_query_failures += 1;
            }
        }
    }
    tally
}

fn run_equivalence() -> EquivalenceTally {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut total = EquivalenceTally::default();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    let mut t = EquivalenceTally::default();
                    for i in (w..AC1_SERIES).step_by(workers) {
                        t.merge(check_series(i));
                    }
                    t
                })
            })
            .collect();
        for h in handles {
            total.merge(h.join().unwrap());
        }
    });
    total
}

fn ac1(t: &EquivalenceTally) -> Outcome {
    outcome(
        t.cell_failures == 0 && t.window_failures == 0 && t.configs == AC1_SERIES * AC1_T_DELTAS.len(),
        format!(
            "{} series x t_delta {:?}: {} configs, {} cell checks ({} wrong), {} window queries ({} wrong)",
            AC1_SERIES, AC1_T_DELTAS, t.configs, t.cell_checks, t.cell_failures, t.window_checks, t.window_failures
        ),
    )
}

fn ac2(t: &EquivalenceTally) -> Outcome {
    outcome(
        t.decompress_failures == 0 && t.reserialize_failures == 0 && t.roundtrip_query_failures == 0,
        format!(
            "{} configs: {} frames differ after decompress, {} not byte-identical on re-serialization, {}/{} queries differ after roundtrip",
            t.configs, t.decompress_failures, t.reserialize_failures, t.roundtrip_query_failures, t.roundtrip_queries
        ),
    )
}

fn t1000_analog() -> Vec<Raster> {
    gen_series(&GenConfig::new(AC3_SIDE, AC3_SIDE, 1000, AC3_SEED).take(AC3_TAKE)).unwrap()
}

fn size_ratio(series: &[Raster], t_delta: usize) -> (usize, usize, f64) {
    let all = TK2Raster::build(series, 2, 1).unwrap().stats().total_bytes;
    let td = TK2Raster::build(series, 2, t_delta).unwrap().stats().total_bytes;
    (td, all, td as f64 / all as f64)
}

fn ac3(slow: &[Raster]) -> Outcome {
    let fast = gen_series(&GenConfig::new(AC3_SIDE, AC3_SIDE, 100, AC3_SEED).take(AC3_TAKE)).unwrap();
    let (s6, s1, rs) = size_ratio(slow, 6);
    let (f4, f1, rf) = size_ratio(&fast, 4);
    outcome(
        rs <= AC3_SLOW_MAX_RATIO && rf <= AC3_FAST_MAX_RATIO,
        format!(
            "1000 steps: t_delta=6 {s6} B / t_delta=1 {s1} B = {rs:.3} (<= {AC3_SLOW_MAX_RATIO}); \
             100 steps: t_delta=4 {f4} B / t_delta=1 {f1} B = {rf:.3} (<= {AC3_FAST_MAX_RATIO})"
        ),
    )
}

fn ac4(slow: &[Raster]) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let tk = dir.path().join("t6.tk2");
    let base = dir.path().join("t1.tk2");
    dataio::write_container(&tk, &TK2Raster::build(slow, 2, 6).unwrap()).unwrap();
    dataio::write_container(&base, &TK2Raster::build(slow, 2, 1).unwrap()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_traster"))
        .args(["bench", tk.to_str().unwrap(), "--baseline", base.to_str().unwrap()])
        .args([
            "--deltas-only",
            "--repetitions",
            AC4_REPETITIONS,
            "--seed",
            "11",
            "--json",
        ])
        .output()
        .unwrap();
    if !out.status.success() {
        return outcome(false, format!("bench failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let mean = |side: &str| {
        v[side]["kinds"]
            .as_array()
            .unwrap()
            .iter()
            .find(|k| k["kind"] == "cells")
            .map(|k| k["mean_us"].as_f64().unwrap())
            .unwrap()
    };
    let (d, s) = (mean("structure"), mean("baseline"));
    let ratio = d / s;
    outcome(
        ratio <= AC4_MAX_RATIO,
        format!("getCells on delta frames {d:.2} us vs all-snapshots {s:.2} us = {ratio:.2}x (<= {AC4_MAX_RATIO}x)"),
    )
}

/// (T bit, eqB bit, stored max gap) of level-1 node `i`.
fn level1(d: &K2RasterDelta, i: usize) -> (bool, bool, u64) {
    let t = d.topology();
    let bit = t.access(i).unwrap();
    let eq = !bit && d.eq_bitmap().access(t.rank0(i).unwrap()).unwrap();
    (bit, eq, d.max_gaps().access(i).unwrap())
}

fn ac5() -> Outcome {
    let snap = Raster::from_fn(8, 8, |r, c| ((r * 7 + c * 3) % 5) as i32).unwrap();
    let target = Raster::from_fn(8, 8, |r, c| {
        snap.get(r, c).unwrap() + if r < 4 && c < 4 { 0 } else { ((r + c) % 2) as i32 }
    })
    .unwrap();
    let d = K2RasterDelta::build(&snap, &target, 2).unwrap();
    let identical = d.root().kind == DeltaNodeKind::Internal && level1(&d, 0) == (false, true, zigzag_encode(0));

    let base = [vec![0, 9, 2, 8], vec![7, 1, 4, 3]];
    let over = [vec![1, 9, 2, 7], vec![7, 3, 4, 3]];
    let rows = |top: [[i32; 4]; 2], bottom: &[Vec<i32>; 2]| -> Raster {
        let mut v: Vec<Vec<i32>> = top.iter().map(|r| r.to_vec()).collect();
        v.extend(bottom.iter().cloned());
        Raster::from_rows(&v).unwrap()
    };
    let d = K2RasterDelta::build(
        &rows([[1, 2, 6, 6], [3, 4, 5, 5]], &base),
        &rows([[2, 2, 7, 7], [3, 5, 6, 6]], &over),
        2,
    )
    .unwrap();
    let shift = level1(&d, 1) == (false, true, zigzag_encode(1));

    let d = K2RasterDelta::build(
        &rows([[1, 2, 3, 2], [3, 4, 2, 3]], &base),
        &rows([[2, 2, 4, 4], [3, 5, 4, 4]], &over),
        2,
    )
    .unwrap();
    let uniform = level1(&d, 1) == (false, false, zigzag_encode(1));

    outcome(
        identical && shift && uniform,
        format!("identical quadrant {identical}, <6,6,5,5> -> <7,7,6,6> {shift}, uniform 4 over [2,3] {uniform}"),
    )
}

fn ac6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut lengths: Vec<usize> = (0..=130).collect();
    lengths.extend([511, 512, 513, 4096, 4097, 33_333, AC6_MAX_BITS]);
    let mut bv_checked = 0usize;
    let mut bv_ok = true;
    for &len in &lengths {
        for density in [0.0, 0.03, 0.5, 0.97, 1.0] {
            let bits: Vec<bool> = (0..len).map(|_| rng.gen_bool(density)).collect();
            let bv = RankBitVector::from_bits(bits.iter().copied());
            let mut ones = 0;
            for (i, &b) in bits.iter().enumerate() {
                bv_ok &= bv.rank1(i).unwrap() == ones && bv.rank0(i).unwrap() == i - ones;
                bv_ok &= bv.access(i).unwrap() == b;
                if b {
                    ones += 1;
                    bv_ok &= bv.select1(ones).unwrap() == i;
                }
            }
            bv_ok &= bv.rank1(len).unwrap() == ones && bv.select1(ones + 1).is_err();
            bv_checked += len;
        }
    }

    let mut dac_ok = true;
    for i in 0..AC6_DAC_SEQUENCES {
        let len = rng.gen_range(0..200);
        let maxbits = rng.gen_range(0..=64u32);
        let width = [1u8, 3, 4, 7, 8, 16, 64][i % 7];
        let values: Vec<u64> = (0..len)
            .map(|_| {
                if maxbits == 0 {
                    0
                } else {
                    rng.gen::<u64>() >> (64 - maxbits)
                }
            })
            .collect();
        let dac = DacSequence::build(&values, width).unwrap();
        dac_ok &= dac.len() == len;
        dac_ok &= values.iter().enumerate().all(|(j, &v)| dac.access(j).unwrap() == v);
        dac_ok &= dac.iter().eq(values.iter().copied());
        dac_ok &= dac.access(len).is_err();
    }

    let n = 2 * AC6_ZIGZAG_BOUND as usize + 1;
    let mut seen = vec![false; n];
    let mut zz_ok = true;
    for x in -AC6_ZIGZAG_BOUND..=AC6_ZIGZAG_BOUND {
        let u = zigzag_encode(x);
        zz_ok &= zigzag_decode(u) == x && u <= 2 * x.unsigned_abs() + 1;
        match seen.get_mut(u as usize) {
            Some(s) if !*s => *s = true,
            _ => zz_ok = false,
        }
    }
    zz_ok &= seen.iter().all(|&s| s);

    outcome(
        bv_ok && dac_ok && zz_ok,
        format!(
            "rank/select over {bv_checked} bits (max length {AC6_MAX_BITS}) {bv_ok}; \
             {AC6_DAC_SEQUENCES} DAC sequences {dac_ok}; zigzag bijection on [-{AC6_ZIGZAG_BOUND}, {AC6_ZIGZAG_BOUND}] {zz_ok}"
        ),
    )
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| a.starts_with("AC") || a.starts_with("ac"))
        .map(|a| a.to_uppercase())
        .collect();
    let wanted = |id: &str| filter.is_empty() || filter.iter().any(|f| f == id);

    let mut failed = false;
    let mut report = |id: &str, name: &str, run: &mut dyn FnMut() -> Outcome| {
        if !wanted(id) {
            return;
        }
        let start = Instant::now();
        let o = run();
        failed |= !o.pass;
        println!(
            "{id} {} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    };

    let mut tally = None;
    report("AC1", "oracle equivalence", &mut || {
        ac1(tally.get_or_insert_with(run_equivalence))
    });
    report("AC2", "roundtrip", &mut || {
        ac2(tally.get_or_insert_with(run_equivalence))
    });
    let slow = if wanted("AC3") || wanted("AC4") {
        Some(t1000_analog())
    } else {
        None
    };
    if let Some(s) = &slow {
        report("AC3", "space trend", &mut || ac3(s));
        report("AC4", "delta query overhead", &mut || ac4(s));
    }
    report("AC5", "construction cases", &mut ac5);
    report("AC6", "bitvector and integer codes", &mut ac6);

    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
