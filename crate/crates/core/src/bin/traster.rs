use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use traster::bench::{self, BenchReport, QueryKind, QuerySpec};
use traster::dataio::{self, Container, GenConfig};
use traster::tk2raster::DEFAULT_AUTO_THRESHOLD;
use traster::{DenseSeries, Error, Raster, Result, SnapshotPolicy, TK2Raster, Window};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "traster", version, about = "Compressed time-evolving integer rasters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic interpolated series as a grid file.
    Gen(GenArgs),
    /// Compress a grid file (or CSV frames) into a container.
    Build(BuildArgs),
    /// Print the value of one cell.
    GetCell(GetCellArgs),
    /// Print the cells of a window whose value lies in [vb, ve].
    GetCells(GetCellsArgs),
    /// Expand a container back into a grid file.
    Decompress(DecompressArgs),
    /// Print size statistics of a container.
    Stats(StatsArgs),
    /// Time random or file-supplied queries.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Interpolation steps; the series has steps + 1 frames.
    #[arg(long)]
    steps: usize,
    /// Keep only the first N frames.
    #[arg(long)]
    take: Option<usize>,
    #[arg(long, default_value_t = GenConfig::DEFAULT_LO, allow_negative_numbers = true)]
    lo: i32,
    #[arg(long, default_value_t = GenConfig::DEFAULT_HI, allow_negative_numbers = true)]
    hi: i32,
    #[arg(long, default_value_t = GenConfig::DEFAULT_SMOOTHNESS)]
    smoothness: usize,
    #[arg(long, env = "TRASTER_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct BuildArgs {
    /// A GRD1 grid file, or one CSV file per frame.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(short, long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 6)]
    t_delta: usize,
    /// Place snapshots adaptively instead of every t_delta instants.
    #[arg(long)]
    auto_snapshot: bool,
    #[arg(long, default_value_t = DEFAULT_AUTO_THRESHOLD, requires = "auto_snapshot")]
    threshold: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GetCellArgs {
    container: PathBuf,
    t: usize,
    r: usize,
    c: usize,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct GetCellsArgs {
    container: PathBuf,
    t: usize,
    vb: i64,
    ve: i64,
    r1: usize,
    r2: usize,
    c1: usize,
    c2: usize,
}

#[derive(Args)]
struct DecompressArgs {
    container: PathBuf,
    /// Grid file to write; a `.csv` path writes a single frame as CSV.
    #[arg(short, long)]
    output: PathBuf,
    /// Only this instant.
    #[arg(long)]
    frame: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    container: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    container: PathBuf,
    /// Query file; random queries are generated when absent.
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Random queries per type.
    #[arg(long, default_value_t = QuerySpec::DEFAULT_COUNT)]
    count: usize,
    #[arg(long, env = "TRASTER_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    /// Draw random queries from delta frames only.
    #[arg(long)]
    deltas_only: bool,
    /// Container to compare against; by default an all-snapshot build of
    /// the same data.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Also time the uncompressed array.
    #[arg(long)]
    dense: bool,
    /// Write the generated query set here.
    #[arg(long)]
    save_queries: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Build(a) => cmd_build(a),
        Command::GetCell(a) => cmd_get_cell(a),
        Command::GetCells(a) => cmd_get_cells(a),
        Command::Decompress(a) => cmd_decompress(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::Format(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let cfg = GenConfig {
        rows: a.rows,
        cols: a.cols,
        steps: a.steps,
        take: a.take,
        lo: a.lo,
        hi: a.hi,
        smoothness: a.smoothness,
        seed: a.seed,
    };
    let series = dataio::gen_series(&cfg)?;
    dataio::write_grid(&a.output, &series)?;
    println!(
        "wrote {} frames of {}x{} to {}",
        series.len(),
        a.rows,
        a.cols,
        a.output.display()
    );
    Ok(())
}

fn is_csv(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn read_series(inputs: &[PathBuf]) -> Result<Vec<Raster>> {
    match inputs {
        [one] if !is_csv(one) => dataio::read_grid(one),
        _ if inputs.iter().all(|p| is_csv(p)) => inputs.iter().map(dataio::read_csv_frame).collect(),
        _ => Err(Error::InvalidArgument(
            "pass either one grid file or only .csv frames".into(),
        )),
    }
}

#[derive(Serialize)]
struct BuildReport {
    k: usize,
    t_delta: usize,
    tau: usize,
    rows: usize,
    cols: usize,
    snapshots: usize,
    frame_bytes: Vec<usize>,
    total_bytes: usize,
    all_snapshots_bytes: usize,
    ratio: f64,
}

fn cmd_build(a: BuildArgs) -> Result<()> {
    let series = read_series(&a.inputs)?;
    let policy = if a.auto_snapshot {
        SnapshotPolicy::Auto { threshold: a.threshold }
    } else {
        SnapshotPolicy::Fixed(a.t_delta)
    };
    let s = TK2Raster::build_with(&series, a.k, policy)?;
    dataio::write_container(&a.output, &s)?;
    let stats = s.stats();
    let all_snapshots_bytes = if stats.snapshots == s.tau() {
        stats.total_bytes
    } else {
        TK2Raster::build(&series, a.k, 1)?.stats().total_bytes
    };
    let report = BuildReport {
        k: s.k(),
        t_delta: s.t_delta(),
        tau: s.tau(),
        rows: s.rows(),
        cols: s.cols(),
        snapshots: stats.snapshots,
        frame_bytes: stats.frames.iter().map(|f| f.bytes).collect(),
        total_bytes: stats.total_bytes,
        all_snapshots_bytes,
        ratio: stats.total_bytes as f64 / all_snapshots_bytes as f64,
    };
    if a.json {
        return print_json(&report);
    }
    for f in &stats.frames {
        println!(
            "frame {:>5} {:8} {:>10} bytes",
            f.index,
            if f.snapshot { "snapshot" } else { "delta" },
            f.bytes
        );
    }
    println!("header {} bytes", stats.header_bytes);
    println!("total {} bytes", report.total_bytes);
    println!("all-snapshots {} bytes", report.all_snapshots_bytes);
    println!("ratio {:.4}", report.ratio);
    Ok(())
}

fn cmd_get_cell(a: GetCellArgs) -> Result<()> {
    let s = dataio::read_container(&a.container)?;
    println!("{}", s.get_cell_value(a.r, a.c, a.t)?);
    Ok(())
}

fn cmd_get_cells(a: GetCellsArgs) -> Result<()> {
    let s = dataio::read_container(&a.container)?;
    let cells = s.get_cells(a.vb, a.ve, Window::new(a.r1, a.r2, a.c1, a.c2), a.t)?;
    let mut out = String::with_capacity(cells.len() * 8);
    for c in cells {
        out.push_str(&format!("{} {}\n", c.row, c.col));
    }
    print!("{out}");
    Ok(())
}

fn write_csv(path: &Path, m: &Raster) -> Result<()> {
    let mut out = String::new();
    for row in m.values().chunks(m.cols()) {
        let line: Vec<String> = row.iter().map(i32::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn cmd_decompress(a: DecompressArgs) -> Result<()> {
    let s = dataio::read_container(&a.container)?;
    let frames: Vec<Raster> = match a.frame {
        Some(t) => vec![s.decompress_frame(t)?],
        None => (0..s.tau()).map(|t| s.decompress_frame(t)).collect::<Result<_>>()?,
    };
    if is_csv(&a.output) {
        let [m] = frames.as_slice() else {
            return Err(Error::InvalidArgument(
                "CSV output holds one frame; pass --frame".into(),
            ));
        };
        write_csv(&a.output, m)
    } else {
        dataio::write_grid(&a.output, &frames)
    }
}

#[derive(Serialize)]
struct SingleStats {
    k: usize,
    rows: usize,
    cols: usize,
    #[serde(flatten)]
    stats: traster::K2RasterStats,
}

fn cmd_stats(a: StatsArgs) -> Result<()> {
    let bytes = std::fs::read(&a.container)?;
    match dataio::deserialize_any(&bytes)? {
        Container::Single(k) => {
            let st = k.stats();
            if a.json {
                return print_json(&SingleStats {
                    k: k.k(),
                    rows: k.rows(),
                    cols: k.cols(),
                    stats: st,
                });
            }
            println!("k2-raster {}x{} k={}", k.rows(), k.cols(), k.k());
            println!("nodes {}", st.node_count);
            println!("bits T={} Lmax={} Lmin={}", st.bits_t, st.bits_lmax, st.bits_lmin);
            println!("total {} bytes", st.total_bytes);
        }
        Container::Temporal(s) => {
            let st = s.stats();
            if a.json {
                return print_json(&st);
            }
            let td = match s.t_delta() {
                0 => "auto".to_string(),
                n => n.to_string(),
            };
            println!(
                "tk2-raster {}x{}x{} k={} t_delta={td}",
                s.rows(),
                s.cols(),
                s.tau(),
                s.k()
            );
            println!("snapshots {}", st.snapshots);
            for f in &st.frames {
                println!(
                    "frame {:>5} {:8} {:>10} bytes {:>9} nodes",
                    f.index,
                    if f.snapshot { "snapshot" } else { "delta" },
                    f.bytes,
                    f.nodes
                );
            }
            println!("header {} bytes", st.header_bytes);
            println!("total {} bytes", st.total_bytes);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchOutput {
    queries: usize,
    structure: BenchReport,
    baseline: BenchReport,
    dense: Option<BenchReport>,
    /// Structure mean over baseline mean, per query type.
    ratios: Vec<(QueryKind, f64)>,
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let s = dataio::read_container(&a.container)?;
    let queries = match &a.queries {
        Some(p) => bench::parse_queries(&std::fs::read_to_string(p)?)?,
        None => {
            let mut spec = QuerySpec::for_structure(&s, a.count, a.seed);
            if a.deltas_only {
                spec = spec.frames(bench::delta_frames(&s));
            }
            bench::random_queries(&spec)?
        }
    };
    if let Some(p) = &a.save_queries {
        std::fs::write(p, bench::format_queries(&queries))?;
    }
    let frames: Vec<Raster> = (0..s.tau()).map(|t| s.decompress_frame(t)).collect::<Result<_>>()?;
    let baseline = match &a.baseline {
        Some(p) => dataio::read_container(p)?,
        None => TK2Raster::build(&frames, s.k(), 1)?,
    };
    let structure = bench::run_bench(&s, &queries, a.repetitions)?;
    let base = bench::run_bench(&baseline, &queries, a.repetitions)?;
    let dense = if a.dense {
        Some(bench::run_bench(
            &DenseSeries::from_series(&frames)?,
            &queries,
            a.repetitions,
        )?)
    } else {
        None
    };
    let ratios = structure
        .kinds
        .iter()
        .filter_map(|k| base.kind(k.kind).map(|b| (k.kind, k.mean_us / b.mean_us)))
        .collect();
    let out = BenchOutput {
        queries: queries.len(),
        structure,
        baseline: base,
        dense,
        ratios,
    };
    if a.json {
        return print_json(&out);
    }
    println!(
        "{:<10} {:<10} {:>6} {:>10} {:>10} {:>10}",
        "target", "query", "count", "mean_us", "p50_us", "p99_us"
    );
    let mut rows = vec![("tk2", &out.structure), ("baseline", &out.baseline)];
    if let Some(d) = &out.dense {
        rows.push(("dense", d));
    }
    for (name, rep) in rows {
        for k in &rep.kinds {
            println!(
                "{:<10} {:<10} {:>6} {:>10.3} {:>10.3} {:>10.3}",
                name,
                k.kind.to_string(),
                k.count,
                k.mean_us,
                k.p50_us,
                k.p99_us
            );
        }
    }
    for (kind, r) in &out.ratios {
        println!("ratio {kind} {r:.3}");
    }
    Ok(())
}
