//! Measurement protocol: warm-up, repeated timed solves, mean time, GFLOPS,
//! tier ladders and CSV/table output.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::element::{ElemKind, Element};
use crate::error::{Error, Result};
use crate::matrix::{generate_graph, DistanceMatrix, GraphSpec};
use crate::reference::fw_classic;
use crate::scheduler::{solve, Mode, SolveConfig, Topology};

pub const DEFAULT_REPS: usize = 8;
pub const DEFAULT_VERIFY_CAP: usize = 1024;

/// Throughput in GFLOPS, counting one add and one compare per relaxation:
/// `2 n^3 / (seconds * 1e9)`.
pub fn gflops(n: usize, seconds: f64) -> Result<f64> {
    if !(seconds > 0.0) || !seconds.is_finite() {
        return Err(Error::Domain(format!("elapsed time must be positive, got {seconds}")));
    }
    let n = n as f64;
    Ok(2.0 * n * n * n / (seconds * 1e9))
}

/// One configuration to measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCase {
    pub n: usize,
    pub elem_kind: ElemKind,
    pub solve: SolveConfig,
}

impl BenchCase {
    pub fn label(&self) -> String {
        format!("n={} elem={} {}", self.n, self.elem_kind, self.solve.label())
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub reps: usize,
    /// One untimed solve before the timed repetitions.
    pub warmup: bool,
    /// Largest `n` that is checked against the classic algorithm.
    pub verify_cap: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            reps: DEFAULT_REPS,
            warmup: true,
            verify_cap: DEFAULT_VERIFY_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HostInfo {
    pub hostname: String,
    pub physical_cores: usize,
    pub logical_cpus: usize,
}

impl HostInfo {
    pub fn detect() -> Self {
        let hostname = std::fs::read_to_string("/proc/sys/kernel/hostname")
            .or_else(|_| std::fs::read_to_string("/etc/hostname"))
            .map(|s| s.trim().to_string())
            .ok()
            .filter(|s| !s.is_empty())
            .or_else(|| std::env::var("HOSTNAME").ok())
            .unwrap_or_else(|| "unknown".to_string());
        let topo = Topology::detect();
        HostInfo {
            hostname,
            physical_cores: topo.physical_cores,
            logical_cpus: topo.logical_cpus,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub case: BenchCase,
    pub graph: GraphSpec,
    /// Wall-clock seconds of each timed solve.
    pub repetitions: Vec<f64>,
    pub mean_seconds: f64,
    pub gflops: f64,
    /// `None` when `n` exceeded the verification cap.
    pub verified: Option<bool>,
    /// For dependency-driven records: GFLOPS over the matching barrier record.
    pub barrier_ratio: Option<f64>,
    pub host: HostInfo,
}

fn time_case<T: Element>(
    d: &DistanceMatrix<T>,
    oracle: Option<&DistanceMatrix<T>>,
    cfg: &SolveConfig,
    opts: &BenchOptions,
) -> Result<(Vec<f64>, Option<bool>)> {
    if opts.warmup {
        solve(d, cfg)?;
    }
    let mut times = Vec::with_capacity(opts.reps);
    let mut last = None;
    for _ in 0..opts.reps {
        let start = Instant::now();
        let out = solve(d, cfg)?;
        times.push(start.elapsed().as_secs_f64());
        last = Some(out);
    }
    let verified = match (oracle, last) {
        (Some(want), Some(got)) => {
            if let Some((i, j)) = got.distances.first_difference(want) {
                return Err(Error::Verification(format!(
                    "cell ({i}, {j}) = {} but the classic algorithm gives {}",
                    got.distances.get(i, j),
                    want.get(i, j)
                )));
            }
            Some(true)
        }
        _ => None,
    };
    Ok((times, verified))
}

enum Instance {
    F32(DistanceMatrix<f32>, Option<DistanceMatrix<f32>>),
    F64(DistanceMatrix<f64>, Option<DistanceMatrix<f64>>),
}

fn instance<T: Element>(spec: &GraphSpec, cap: usize) -> Result<(DistanceMatrix<T>, Option<DistanceMatrix<T>>)> {
    let d = generate_graph::<T>(spec)?;
    let oracle = (spec.n <= cap).then(|| fw_classic(&d).0);
    Ok((d, oracle))
}

/// Measures every case in order. Each `(n, elem_kind)` instance is generated
/// once from `graph` (with `n` replaced) and shared by all cases using it.
pub fn run_bench(cases: &[BenchCase], graph: &GraphSpec, opts: &BenchOptions) -> Result<Vec<BenchRecord>> {
    if opts.reps == 0 {
        return Err(Error::Config("repetition count must be at least 1".into()));
    }
    let host = HostInfo::detect();
    let mut instances: HashMap<(usize, ElemKind), Instance> = HashMap::new();
    let mut records = Vec::with_capacity(cases.len());
    for case in cases {
        let annotate = |source: Error| Error::Bench {
            config: case.label(),
            source: Box::new(source),
        };
        let spec = GraphSpec {
            n: case.n,
            ..graph.clone()
        };
        if let std::collections::hash_map::Entry::Vacant(e) = instances.entry((case.n, case.elem_kind)) {
            let inst = match case.elem_kind {
                ElemKind::F32 => instance::<f32>(&spec, opts.verify_cap).map(|(d, o)| Instance::F32(d, o)),
                ElemKind::F64 => instance::<f64>(&spec, opts.verify_cap).map(|(d, o)| Instance::F64(d, o)),
            }
            .map_err(annotate)?;
            e.insert(inst);
        }
        let (times, verified) = match &instances[&(case.n, case.elem_kind)] {
            Instance::F32(d, o) => time_case(d, o.as_ref(), &case.solve, opts),
            Instance::F64(d, o) => time_case(d, o.as_ref(), &case.solve, opts),
        }
        .map_err(annotate)?;
        let mean_seconds = times.iter().sum::<f64>() / times.len() as f64;
        let gflops = gflops(case.n, mean_seconds).map_err(annotate)?;
        records.push(BenchRecord {
            case: case.clone(),
            graph: spec,
            repetitions: times,
            mean_seconds,
            gflops,
            verified,
            barrier_ratio: None,
            host: host.clone(),
        });
    }
    annotate_barrier_ratios(&mut records);
    Ok(records)
}

/// Fills `barrier_ratio` on dependency-driven records that have a barrier
/// twin with otherwise identical settings.
pub fn annotate_barrier_ratios(records: &mut [BenchRecord]) {
    let twin_key = |r: &BenchRecord| {
        let s = &r.case.solve;
        (r.case.n, r.case.elem_kind, s.bs, s.threads, s.tier, s.affinity, s.track_paths)
    };
    let barrier: HashMap<_, f64> = records
        .iter()
        .filter(|r| r.case.solve.mode == Mode::Barrier)
        .map(|r| (twin_key(r), r.gflops))
        .collect();
    for r in records.iter_mut().filter(|r| r.case.solve.mode == Mode::DepDriven) {
        r.barrier_ratio = barrier.get(&twin_key(r)).map(|b| r.gflops / b);
    }
}

/// One rung of an improvement ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderStep {
    pub label: String,
    pub gflops: Option<f64>,
    /// Over the previous rung; `None` if either rung is missing.
    pub step_ratio: Option<f64>,
    /// Over the first rung; `None` if either rung is missing.
    pub cumulative_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementTable {
    pub steps: Vec<LadderStep>,
}

impl ImprovementTable {
    /// True when every measured step ratio is at least one.
    pub fn is_monotonic(&self) -> bool {
        self.steps.iter().filter_map(|s| s.step_ratio).all(|r| r >= 1.0)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<28} {:>10} {:>8} {:>8}", "step", "GFLOPS", "x prev", "x first");
        let fmt = |v: Option<f64>, prec: usize| v.map_or_else(|| "-".to_string(), |v| format!("{v:.prec$}"));
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{:<28} {:>10} {:>8} {:>8}",
                s.label,
                fmt(s.gflops, 2),
                fmt(s.step_ratio, 2),
                fmt(s.cumulative_ratio, 2)
            );
        }
        let _ = writeln!(
            out,
            "monotonic: {}",
            if self.is_monotonic() { "yes" } else { "no" }
        );
        out
    }
}

/// Step and cumulative ratios along an ordered ladder. A missing rung shows
/// as a gap rather than being interpolated.
pub fn improvement_table(ladder: &[(String, Option<&BenchRecord>)]) -> ImprovementTable {
    let first = ladder.first().and_then(|(_, r)| r.map(|r| r.gflops));
    let mut prev: Option<f64> = None;
    let steps = ladder
        .iter()
        .enumerate()
        .map(|(idx, (label, rec))| {
            let g = rec.map(|r| r.gflops);
            let step = if idx == 0 {
                None
            } else {
                g.zip(prev).map(|(g, p)| g / p)
            };
            let cumulative = g.zip(first).map(|(g, f)| g / f);
            prev = g;
            LadderStep {
                label: label.clone(),
                gflops: g,
                step_ratio: step,
                cumulative_ratio: cumulative,
            }
        })
        .collect();
    ImprovementTable { steps }
}

/// Tier ladder for each `(n, elem, T, bs)` group: every tier under barrier
/// scheduling, then both dependency-driven flavors at the top tier.
pub fn tier_ladders(records: &[BenchRecord]) -> Vec<(String, ImprovementTable)> {
    use crate::kernel::KernelTier;
    use crate::scheduler::SyncKind;

    let mut groups: Vec<(usize, ElemKind, usize, usize)> = Vec::new();
    for r in records {
        let key = (r.case.n, r.case.elem_kind, r.case.solve.threads, r.case.solve.bs);
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    groups
        .into_iter()
        .map(|(n, elem, threads, bs)| {
            let find = |pred: &dyn Fn(&SolveConfig) -> bool| {
                records.iter().find(|r| {
                    r.case.n == n
                        && r.case.elem_kind == elem
                        && r.case.solve.threads == threads
                        && r.case.solve.bs == bs
                        && pred(&r.case.solve)
                })
            };
            let mut ladder: Vec<(String, Option<&BenchRecord>)> = KernelTier::ALL
                .iter()
                .map(|&t| (t.to_string(), find(&|s| s.mode == Mode::Barrier && s.tier == t)))
                .collect();
            for sync in SyncKind::ALL {
                ladder.push((
                    format!("depdriven-{sync}"),
                    find(&|s| s.mode == Mode::DepDriven && s.sync == sync && s.tier == KernelTier::Unrolled),
                ));
            }
            (
                format!("n={n} elem={elem} T={threads} bs={bs}"),
                improvement_table(&ladder),
            )
        })
        .collect()
}

#[derive(Serialize)]
struct CsvRow<'a> {
    n: usize,
    elem_kind: ElemKind,
    bs: usize,
    threads: usize,
    tier: &'a str,
    mode: &'a str,
    sync: &'a str,
    affinity: &'a str,
    track_paths: bool,
    null_fraction: f64,
    weight_min: u32,
    weight_max: u32,
    seed: u64,
    reps: usize,
    timings_s: String,
    mean_seconds: f64,
    gflops: f64,
    verified: &'a str,
    barrier_ratio: String,
    hostname: &'a str,
    physical_cores: usize,
    logical_cpus: usize,
}

/// Column names of the CSV output, in order.
pub const CSV_COLUMNS: [&str; 22] = [
    "n",
    "elem_kind",
    "bs",
    "threads",
    "tier",
    "mode",
    "sync",
    "affinity",
    "track_paths",
    "null_fraction",
    "weight_min",
    "weight_max",
    "seed",
    "reps",
    "timings_s",
    "mean_seconds",
    "gflops",
    "verified",
    "barrier_ratio",
    "hostname",
    "physical_cores",
    "logical_cpus",
];

pub fn write_csv<W: std::io::Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        let s = &r.case.solve;
        let row = CsvRow {
            n: r.case.n,
            elem_kind: r.case.elem_kind,
            bs: s.bs,
            threads: s.threads,
            tier: s.tier.name(),
            mode: s.mode.name(),
            sync: if s.mode == Mode::DepDriven { s.sync.name() } else { "-" },
            affinity: s.affinity.name(),
            track_paths: s.track_paths,
            null_fraction: r.graph.null_fraction,
            weight_min: r.graph.weight_min,
            weight_max: r.graph.weight_max,
            seed: r.graph.seed,
            reps: r.repetitions.len(),
            timings_s: r
                .repetitions
                .iter()
                .map(|t| format!("{t:.6}"))
                .collect::<Vec<_>>()
                .join(";"),
            mean_seconds: r.mean_seconds,
            gflops: r.gflops,
            verified: match r.verified {
                Some(true) => "yes",
                Some(false) => "no",
                None => "skipped",
            },
            barrier_ratio: r.barrier_ratio.map_or_else(String::new, |v| format!("{v:.4}")),
            hostname: &r.host.hostname,
            physical_cores: r.host.physical_cores,
            logical_cpus: r.host.logical_cpus,
        };
        w.serialize(row).map_err(|e| Error::Io(e.into()))?;
    }
    if records.is_empty() {
        w.write_record(CSV_COLUMNS).map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[BenchRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(records, std::io::BufWriter::new(file))
}

/// Plain-text GFLOPS table: one section per `(n, elem)`, one row per
/// `(T, bs)`, one column per tier/schedule variant. The best row of each
/// column within a section is starred.
pub fn emit_table(records: &[BenchRecord]) -> String {
    let variant = |s: &SolveConfig| {
        let mut v = format!("{}/{}", s.tier, s.schedule_label());
        if s.affinity != crate::scheduler::Affinity::None {
            let _ = write!(v, "/{}", s.affinity);
        }
        v
    };
    let mut sections: Vec<(usize, ElemKind)> = Vec::new();
    for r in records {
        if !sections.contains(&(r.case.n, r.case.elem_kind)) {
            sections.push((r.case.n, r.case.elem_kind));
        }
    }
    let mut out = String::new();
    for (n, elem) in sections {
        let recs: Vec<&BenchRecord> = records
            .iter()
            .filter(|r| r.case.n == n && r.case.elem_kind == elem)
            .collect();
        let mut cols: Vec<String> = Vec::new();
        let mut rows: Vec<(usize, usize)> = Vec::new();
        for r in &recs {
            let c = variant(&r.case.solve);
            if !cols.contains(&c) {
                cols.push(c);
            }
            let row = (r.case.solve.threads, r.case.solve.bs);
            if !rows.contains(&row) {
                rows.push(row);
            }
        }
        let cell = |row: (usize, usize), col: &str| {
            recs.iter()
                .find(|r| (r.case.solve.threads, r.case.solve.bs) == row && variant(&r.case.solve) == col)
                .map(|r| r.gflops)
        };
        let best: Vec<Option<(usize, usize)>> = cols
            .iter()
            .map(|c| {
                rows.iter()
                    .filter_map(|&row| cell(row, c).map(|g| (row, g)))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(row, _)| row)
            })
            .collect();
        let width = cols.iter().map(|c| c.len()).max().unwrap_or(8).max(10) + 2;
        let _ = writeln!(out, "GFLOPS, n={n}, elem={elem} (* = best T/bs per column)");
        let _ = write!(out, "{:>5} {:>5}", "T", "bs");
        for c in &cols {
            let _ = write!(out, " {c:>width$}");
        }
        let _ = writeln!(out);
        for &row in &rows {
            let _ = write!(out, "{:>5} {:>5}", row.0, row.1);
            for (ci, c) in cols.iter().enumerate() {
                let text = match cell(row, c) {
                    Some(g) if best[ci] == Some(row) => format!("*{g:.2}"),
                    Some(g) => format!("{g:.2}"),
                    None => "-".to_string(),
                };
                let _ = write!(out, " {text:>width$}");
            }
            let _ = writeln!(out);
        }
        let _ = writeln!(out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelTier;

    #[test]
    fn gflops_formula() {
        assert!((gflops(8192, 1.0).unwrap() - 1099.51).abs() < 0.01);
        assert!((gflops(1024, 2.147).unwrap() - 1.0).abs() < 1e-3);
        assert!(matches!(gflops(10, 0.0), Err(Error::Domain(_))));
        assert!(matches!(gflops(10, -1.0), Err(Error::Domain(_))));
        assert!(gflops(100, 1.0).unwrap() > gflops(100, 2.0).unwrap());
        let ratio = gflops(200, 1.0).unwrap() / gflops(100, 1.0).unwrap();
        assert!((ratio - 8.0).abs() < 1e-12);
    }

    fn fake(tier: KernelTier, g: f64) -> BenchRecord {
        BenchRecord {
            case: BenchCase {
                n: 64,
                elem_kind: ElemKind::F32,
                solve: SolveConfig::new(16, 1).with_tier(tier),
            },
            graph: GraphSpec::new(64, 0),
            repetitions: vec![1.0],
            mean_seconds: 1.0,
            gflops: g,
            verified: None,
            barrier_ratio: None,
            host: HostInfo::detect(),
        }
    }

    #[test]
    fn ladder_ratios() {
        let a = fake(KernelTier::Baseline, 100.0);
        let b = fake(KernelTier::Vectorized, 142.0);
        let t = improvement_table(&[("a".into(), Some(&a)), ("b".into(), Some(&b))]);
        assert!((t.steps[1].step_ratio.unwrap() - 1.42).abs() < 1e-12);
        assert!((t.steps[1].cumulative_ratio.unwrap() - 1.42).abs() < 1e-12);
        assert!(t.is_monotonic());

        let same = improvement_table(&[("a".into(), Some(&a)), ("b".into(), Some(&a)), ("c".into(), Some(&a))]);
        assert!(same.steps.iter().skip(1).all(|s| s.step_ratio == Some(1.0)));
    }

    #[test]
    fn ladder_gap_is_not_fabricated() {
        let a = fake(KernelTier::Baseline, 100.0);
        let c = fake(KernelTier::VectorizedAligned, 300.0);
        let t = improvement_table(&[("a".into(), Some(&a)), ("b".into(), None), ("c".into(), Some(&c))]);
        assert_eq!(t.steps[1].step_ratio, None);
        assert_eq!(t.steps[1].gflops, None);
        assert_eq!(t.steps[2].step_ratio, None);
        assert_eq!(t.steps[2].cumulative_ratio, Some(3.0));
        assert!(t.render().contains('-'));
    }

    #[test]
    fn table_marks_best() {
        let mut slow = fake(KernelTier::Unrolled, 10.0);
        slow.case.solve.bs = 32;
        let fast = fake(KernelTier::Unrolled, 20.0);
        let text = emit_table(&[slow, fast]);
        assert!(text.contains("*20.00"), "{text}");
        assert!(!text.contains("*10.00"));
    }

    #[test]
    fn zero_reps_rejected() {
        let opts = BenchOptions {
            reps: 0,
            ..BenchOptions::default()
        };
        assert!(run_bench(&[], &GraphSpec::new(16, 0), &opts).is_err());
    }
}
