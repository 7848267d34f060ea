//! Command-line front end: `gen`, `solve`, `verify` and `bench`.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage, 3 configuration,
//! 4 I/O.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::bench::{self, BenchCase, BenchOptions};
use crate::element::{ElemKind, Element};
use crate::error::{Error, Result};
use crate::kernel::KernelTier;
use crate::matrix::{read_any, read_paths, write_paths, AnyMatrix, DistanceMatrix, GraphSpec, IntermediateMatrix};
use crate::reference::{fw_classic, path_cost, reconstruct_path};
use crate::scheduler::{solve, Affinity, Mode, SolveConfig, SyncKind, Topology};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "bfw", version, about = "Blocked Floyd-Warshall all-pairs shortest paths")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random dense graph.
    Gen(GenArgs),
    /// Close a distance matrix under shortest paths.
    Solve(SolveArgs),
    /// Check a closed matrix (and optional path matrix) against the classic algorithm.
    Verify(VerifyArgs),
    /// Run a benchmark sweep.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = GraphSpec::DEFAULT_NULL_FRACTION)]
    pub null_fraction: f64,
    #[arg(long, default_value_t = GraphSpec::DEFAULT_WEIGHT_MIN)]
    pub wmin: u32,
    #[arg(long, default_value_t = GraphSpec::DEFAULT_WEIGHT_MAX)]
    pub wmax: u32,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "f32")]
    pub elem: ElemKind,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long = "input", alias = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub bs: usize,
    /// Defaults to the number of logical CPUs.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value = "unrolled")]
    pub tier: KernelTier,
    #[arg(long, default_value = "barrier")]
    pub mode: Mode,
    #[arg(long, default_value = "semaphore")]
    pub sync: SyncKind,
    #[arg(long, default_value = "none")]
    pub affinity: Affinity,
    /// Also track intermediates and write them here.
    #[arg(long)]
    pub paths: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub original: PathBuf,
    #[arg(long)]
    pub closed: PathBuf,
    #[arg(long)]
    pub paths: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// TOML file with sweep axes; flags given explicitly override it.
    #[arg(long)]
    pub sweep: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub bs: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub threads: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub tiers: Option<Vec<KernelTier>>,
    /// Any of barrier, depdriven-semaphore, depdriven-condvar.
    #[arg(long, value_delimiter = ',')]
    pub schedules: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub elem: Option<Vec<ElemKind>>,
    #[arg(long, value_delimiter = ',')]
    pub affinity: Option<Vec<Affinity>>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub null_fraction: Option<f64>,
    #[arg(long)]
    pub wmin: Option<u32>,
    #[arg(long)]
    pub wmax: Option<u32>,
    #[arg(long)]
    pub verify_cap: Option<usize>,
    #[arg(long)]
    pub no_warmup: bool,
    #[arg(long)]
    pub paths: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Sweep axes, as read from a `--sweep` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub n: Option<Vec<usize>>,
    pub bs: Option<Vec<usize>>,
    pub threads: Option<Vec<usize>>,
    pub tiers: Option<Vec<KernelTier>>,
    pub schedules: Option<Vec<String>>,
    pub elem: Option<Vec<ElemKind>>,
    pub affinity: Option<Vec<Affinity>>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub null_fraction: Option<f64>,
    pub weight_min: Option<u32>,
    pub weight_max: Option<u32>,
    pub verify_cap: Option<usize>,
    pub track_paths: Option<bool>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Verification(_) | Error::CorruptPathMatrix { .. } | Error::InvalidPath { .. } => EXIT_MISMATCH,
        Error::InvalidSpec { .. }
        | Error::DimensionMismatch { .. }
        | Error::ElemKindMismatch { .. }
        | Error::VertexOutOfRange { .. }
        | Error::Domain(_) => EXIT_USAGE,
        Error::BlockSize { .. } | Error::Config(_) | Error::ThreadPool(_) => EXIT_CONFIG,
        Error::MalformedInput(_) | Error::TruncatedInput { .. } | Error::File { .. } | Error::Io(_) => EXIT_IO,
        Error::Bench { source, .. } => exit_code(source),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::BlockSize { n, bs } = e {
                eprintln!("hint: the tile size must divide the matrix order; divisors of {n} near {bs}: {:?}", near_divisors(n, bs));
            }
            exit_code(&e)
        }
    }
}

fn near_divisors(n: usize, bs: usize) -> Vec<usize> {
    let mut d: Vec<usize> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
    d.sort_by_key(|&d| d.abs_diff(bs));
    d.truncate(3);
    d.sort_unstable();
    d
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Bench(a) => cmd_bench(&a),
    }
}

pub fn cmd_gen(a: &GenArgs) -> Result<()> {
    let spec = GraphSpec {
        n: a.n,
        null_fraction: a.null_fraction,
        weight_min: a.wmin,
        weight_max: a.wmax,
        seed: a.seed,
    };
    let m = AnyMatrix::generate(&spec, a.elem)?;
    m.write(&a.out)?;
    println!(
        "wrote {} (n={}, elem={}, seed={}, weights {}..={}, infinite off-diagonal fraction {:.4})",
        a.out.display(),
        m.n(),
        m.elem_kind(),
        spec.seed,
        spec.weight_min,
        spec.weight_max,
        m.infinite_fraction()
    );
    Ok(())
}

fn solve_and_write<T: Element>(
    d: &DistanceMatrix<T>,
    cfg: &SolveConfig,
    out: &Path,
    paths: Option<&Path>,
) -> Result<()> {
    let start = Instant::now();
    let sol = solve(d, cfg)?;
    let secs = start.elapsed().as_secs_f64();
    crate::matrix::write_matrix(out, &sol.distances)?;
    if let (Some(path), Some(p)) = (paths, sol.paths.as_ref()) {
        write_paths(path, p)?;
    }
    let g = bench::gflops(d.n(), secs.max(f64::MIN_POSITIVE))?;
    println!(
        "solved n={} ({}) with {} in {:.6} s, {:.2} GFLOPS",
        d.n(),
        T::KIND,
        cfg.label(),
        secs,
        g
    );
    Ok(())
}

pub fn cmd_solve(a: &SolveArgs) -> Result<()> {
    let d = read_any(&a.input)?;
    let cfg = SolveConfig {
        bs: a.bs,
        threads: a.threads.unwrap_or_else(|| Topology::detect().logical_cpus),
        tier: a.tier,
        mode: a.mode,
        sync: a.sync,
        affinity: a.affinity,
        track_paths: a.paths.is_some(),
    };
    cfg.validate(d.n())?;
    match &d {
        AnyMatrix::F32(m) => solve_and_write(m, &cfg, &a.out, a.paths.as_deref()),
        AnyMatrix::F64(m) => solve_and_write(m, &cfg, &a.out, a.paths.as_deref()),
    }
}

fn integer_valued<T: Element>(d: &DistanceMatrix<T>) -> bool {
    d.as_slice()
        .iter()
        .all(|v| v.is_infinite() || v.to_f64().fract() == 0.0)
}

fn verify_typed<T: Element>(
    original: &DistanceMatrix<T>,
    closed: &DistanceMatrix<T>,
    paths: Option<&IntermediateMatrix>,
) -> Result<()> {
    let (want, _) = fw_classic(original);
    if let Some((i, j)) = closed.first_difference(&want) {
        return Err(Error::Verification(format!(
            "first mismatch at ({i}, {j}): closed has {}, expected {}",
            closed.get(i, j),
            want.get(i, j)
        )));
    }
    let Some(p) = paths else { return Ok(()) };
    let n = original.n();
    let exact = integer_valued(original);
    for i in 0..n {
        for j in 0..n {
            let target = closed.get(i, j);
            let path = reconstruct_path(p, closed, i, j)?;
            if target.is_infinite() {
                continue;
            }
            let cost = path_cost(original, &path)?;
            let ok = if exact {
                cost.to_bits_u64() == target.to_bits_u64()
            } else {
                let (c, t) = (cost.to_f64(), target.to_f64());
                (c - t).abs() <= 1e-6 * t.abs().max(1.0)
            };
            if !ok {
                return Err(Error::Verification(format!(
                    "path for ({i}, {j}) costs {cost}, closed distance is {target}"
                )));
            }
        }
    }
    Ok(())
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<()> {
    let original = read_any(&a.original)?;
    let closed = read_any(&a.closed)?;
    if original.n() != closed.n() {
        return Err(Error::DimensionMismatch {
            expected: original.n(),
            found: closed.n(),
        });
    }
    let paths = a.paths.as_ref().map(read_paths).transpose()?;
    if let Some(p) = &paths {
        if p.n() != original.n() {
            return Err(Error::DimensionMismatch {
                expected: original.n(),
                found: p.n(),
            });
        }
    }
    match (&original, &closed) {
        (AnyMatrix::F32(o), AnyMatrix::F32(c)) => verify_typed(o, c, paths.as_ref()),
        (AnyMatrix::F64(o), AnyMatrix::F64(c)) => verify_typed(o, c, paths.as_ref()),
        _ => Err(Error::ElemKindMismatch {
            expected: original.elem_kind().name(),
            found: closed.elem_kind().name(),
        }),
    }?;
    println!(
        "ok: {} matches the classic algorithm (n={}{})",
        a.closed.display(),
        original.n(),
        if paths.is_some() { ", paths consistent" } else { "" }
    );
    Ok(())
}

fn parse_schedule(s: &str) -> Result<(Mode, SyncKind)> {
    match s.trim().to_ascii_lowercase().as_str() {
        "barrier" => Ok((Mode::Barrier, SyncKind::Semaphore)),
        "depdriven-semaphore" | "depdriven-sem" => Ok((Mode::DepDriven, SyncKind::Semaphore)),
        "depdriven-condvar" | "depdriven-cond" => Ok((Mode::DepDriven, SyncKind::CondVar)),
        other => Err(Error::Domain(format!(
            "unknown schedule `{other}` (expected barrier, depdriven-semaphore or depdriven-condvar)"
        ))),
    }
}

/// The resolved sweep: cases plus graph and measurement settings.
#[derive(Debug)]
pub struct Sweep {
    pub cases: Vec<BenchCase>,
    pub graph: GraphSpec,
    pub opts: BenchOptions,
}

fn dedup<T: PartialEq>(v: Vec<T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(v.len());
    for x in v {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Resolves sweep axes: explicit flags, then the sweep file, then the
/// desk-scale defaults.
pub fn build_sweep(a: &BenchArgs) -> Result<Sweep> {
    let file: SweepFile = match &a.sweep {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::File {
                path: path.clone(),
                source,
            })?;
            toml::from_str(&text).map_err(|e| Error::Domain(format!("{}: {e}", path.display())))?
        }
        None => SweepFile::default(),
    };
    let topo = Topology::detect();
    let ns = a.n.clone().or(file.n).unwrap_or_else(|| vec![512, 1024, 2048]);
    let bss = a.bs.clone().or(file.bs).unwrap_or_else(|| vec![32, 64, 128]);
    let threads = dedup(
        a.threads
            .clone()
            .or(file.threads)
            .unwrap_or_else(|| vec![1, topo.physical_cores, topo.logical_cpus]),
    );
    let tiers = a.tiers.clone().or(file.tiers).unwrap_or_else(|| KernelTier::ALL.to_vec());
    let schedules = a
        .schedules
        .clone()
        .or(file.schedules)
        .unwrap_or_else(|| vec!["barrier".into(), "depdriven-semaphore".into(), "depdriven-condvar".into()]);
    let schedules = schedules
        .iter()
        .map(|s| parse_schedule(s))
        .collect::<Result<Vec<_>>>()?;
    let elems = a.elem.clone().or(file.elem).unwrap_or_else(|| ElemKind::ALL.to_vec());
    let affinities = a.affinity.clone().or(file.affinity).unwrap_or_else(|| vec![Affinity::None]);
    let track_paths = a.paths || file.track_paths.unwrap_or(false);

    let graph = GraphSpec {
        n: 0,
        null_fraction: a
            .null_fraction
            .or(file.null_fraction)
            .unwrap_or(GraphSpec::DEFAULT_NULL_FRACTION),
        weight_min: a.wmin.or(file.weight_min).unwrap_or(GraphSpec::DEFAULT_WEIGHT_MIN),
        weight_max: a.wmax.or(file.weight_max).unwrap_or(GraphSpec::DEFAULT_WEIGHT_MAX),
        seed: a.seed.or(file.seed).unwrap_or(42),
    };
    GraphSpec { n: 1, ..graph.clone() }.validate()?;
    let opts = BenchOptions {
        reps: a.reps.or(file.reps).unwrap_or(bench::DEFAULT_REPS),
        warmup: !a.no_warmup,
        verify_cap: a.verify_cap.or(file.verify_cap).unwrap_or(bench::DEFAULT_VERIFY_CAP),
    };

    let mut cases = Vec::new();
    for &n in &ns {
        for &elem_kind in &elems {
            for &t in &threads {
                for &bs in &bss {
                    if bs == 0 || n % bs != 0 {
                        log::warn!("skipping bs={bs} for n={n}: not a divisor");
                        continue;
                    }
                    for &(mode, sync) in &schedules {
                        for &tier in &tiers {
                            for &affinity in &affinities {
                                let solve = SolveConfig {
                                    bs,
                                    threads: t,
                                    tier,
                                    mode,
                                    sync,
                                    affinity,
                                    track_paths,
                                };
                                solve.validate(n)?;
                                cases.push(BenchCase { n, elem_kind, solve });
                            }
                        }
                    }
                }
            }
        }
    }
    if cases.is_empty() {
        return Err(Error::Config("sweep has no valid configuration".into()));
    }
    Ok(Sweep { cases, graph, opts })
}

pub fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let sweep = build_sweep(a)?;
    eprintln!(
        "running {} configurations, {} timed repetitions each",
        sweep.cases.len(),
        sweep.opts.reps
    );
    let records = bench::run_bench(&sweep.cases, &sweep.graph, &sweep.opts)?;
    print!("{}", bench::emit_table(&records));
    for (label, table) in bench::tier_ladders(&records) {
        println!("improvement ladder, {label}");
        print!("{}", table.render());
        println!();
    }
    if let Some(path) = &a.csv {
        bench::emit_csv(&records, path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
