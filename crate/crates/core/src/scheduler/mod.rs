//! Round/phase orchestration over a fixed set of worker threads.
//!
//! Round `k` of the blocked algorithm:
//!
//! 1. the pivot tile `(k, k)`, rows split across all workers, one
//!    barrier per intermediate step;
//! 2. the pivot tile-row `(k, *)` and
//! 3. the pivot tile-column `(*, k)`, both depending only on the pivot;
//! 4. every other tile `(i, j)`, depending on `(i, k)` and `(k, j)`.
//!
//! [`Mode::Barrier`] puts a full barrier between phases 2/3 and 4.
//! [`Mode::DepDriven`] loads phases 2/3 and then phase 4 into one FIFO task
//! queue, and each phase-4 task waits on its own [`DepState`] cell instead.
//! Because every phase-2/3 task is dequeued before any phase-4 task, a worker
//! blocked on a dependency never holds work that could satisfy it.

mod affinity;
mod deps;
mod trace;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Barrier, Condvar, Mutex, PoisonError};
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use affinity::{affinity_plan, pin_current_thread, Affinity, Topology};
pub use deps::{DepState, RoundAccounting, Semaphore, SyncKind, DEPS_PER_TILE};
pub use trace::{Event, EventKind, OrderViolation, SolveTrace, TraceOptions};

use crate::element::Element;
use crate::error::{Error, Result};
use crate::kernel::{relax_band, tile_relax, KernelTier, Operands};
use crate::matrix::{DistanceMatrix, IntermediateMatrix, TiledMatrix, NONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Full barrier after phase 1, after phases 2/3 and after phase 4.
    Barrier,
    /// Phase-4 tiles start as soon as their own two dependencies finish.
    DepDriven,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Barrier => "barrier",
            Mode::DepDriven => "depdriven",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "barrier" => Ok(Mode::Barrier),
            "depdriven" | "dep-driven" | "dep" => Ok(Mode::DepDriven),
            other => Err(format!("unknown mode `{other}` (expected barrier or depdriven)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub bs: usize,
    pub threads: usize,
    pub tier: KernelTier,
    pub mode: Mode,
    /// Only consulted in [`Mode::DepDriven`].
    pub sync: SyncKind,
    pub affinity: Affinity,
    pub track_paths: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            bs: 128,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            tier: KernelTier::Unrolled,
            mode: Mode::Barrier,
            sync: SyncKind::Semaphore,
            affinity: Affinity::None,
            track_paths: false,
        }
    }
}

impl SolveConfig {
    pub fn new(bs: usize, threads: usize) -> Self {
        SolveConfig {
            bs,
            threads,
            ..SolveConfig::default()
        }
    }

    pub fn with_tier(mut self, tier: KernelTier) -> Self {
        self.tier = tier;
        self
    }

    pub fn with_mode(mut self, mode: Mode, sync: SyncKind) -> Self {
        self.mode = mode;
        self.sync = sync;
        self
    }

    pub fn with_paths(mut self, track: bool) -> Self {
        self.track_paths = track;
        self
    }

    pub fn with_affinity(mut self, affinity: Affinity) -> Self {
        self.affinity = affinity;
        self
    }

    /// `barrier`, `depdriven-semaphore` or `depdriven-condvar`.
    pub fn schedule_label(&self) -> String {
        match self.mode {
            Mode::Barrier => "barrier".to_string(),
            Mode::DepDriven => format!("depdriven-{}", self.sync),
        }
    }

    pub fn label(&self) -> String {
        format!(
            "bs={} T={} tier={} sched={} affinity={} paths={}",
            self.bs,
            self.threads,
            self.tier,
            self.schedule_label(),
            self.affinity,
            self.track_paths
        )
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.threads == 0 {
            return Err(Error::Config("thread count must be at least 1".into()));
        }
        if self.bs == 0 || !n.is_multiple_of(self.bs) {
            return Err(Error::BlockSize { n, bs: self.bs });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Solution<T: Element> {
    pub distances: DistanceMatrix<T>,
    pub paths: Option<IntermediateMatrix>,
}

/// Closes `d` under min-plus with the blocked algorithm.
pub fn solve<T: Element>(d: &DistanceMatrix<T>, cfg: &SolveConfig) -> Result<Solution<T>> {
    solve_traced(d, cfg, &TraceOptions::default()).map(|(s, _)| s)
}

/// [`solve`] with optional event recording and delay injection.
pub fn solve_traced<T: Element>(
    d: &DistanceMatrix<T>,
    cfg: &SolveConfig,
    opts: &TraceOptions,
) -> Result<(Solution<T>, SolveTrace)> {
    let n = d.n();
    cfg.validate(n)?;
    if n == 0 {
        let paths = cfg.track_paths.then(|| IntermediateMatrix::new(0));
        return Ok((
            Solution {
                distances: d.clone(),
                paths,
            },
            SolveTrace::default(),
        ));
    }

    let bs = cfg.bs;
    let mut dist = TiledMatrix::to_tiled_aligned(d, bs, cfg.tier.alignment::<T>())?;
    let mut paths = if cfg.track_paths {
        let p = vec![NONE; n * n];
        Some(TiledMatrix::from_row_major(n, bs, cfg.tier.alignment::<u32>(), &p)?)
    } else {
        None
    };

    let r = n / bs;
    let plan = affinity_plan(cfg.affinity, cfg.threads, Topology::detect());
    let shared = Shared {
        cfg,
        opts,
        r,
        bs,
        dist: Grid::new(&mut dist),
        paths: paths.as_mut().map(Grid::new),
        barrier: Barrier::new(cfg.threads),
        edge_queue: (0..r).map(|_| AtomicUsize::new(0)).collect(),
        inner_queue: (0..r).map(|_| AtomicUsize::new(0)).collect(),
        deps: (cfg.mode == Mode::DepDriven).then(|| DepState::new(r, cfg.sync)),
        accounting: Mutex::new(Vec::with_capacity(r)),
        gate: Gate::default(),
        plan,
        t0: Instant::now(),
    };

    let outputs = run_workers(&shared)?;

    let mut trace = SolveTrace {
        rounds: shared
            .accounting
            .into_inner()
            .unwrap_or_else(PoisonError::into_inner),
        ..SolveTrace::default()
    };
    for out in outputs {
        trace.events.extend(out.events);
        trace.pinned.push(out.pinned);
    }
    trace.events.sort_by_key(|e| (e.t_ns, e.kind == EventKind::Start));

    let distances = dist.from_tiled();
    let paths = paths.map(|p| IntermediateMatrix::from_vec(n, p.to_row_major()).expect("square"));
    Ok((Solution { distances, paths }, trace))
}

/// Raw view of a tiled buffer shared by all workers.
///
/// Workers only ever hold `&mut` to tiles (or pivot rows) they own under the
/// phase and dependency protocol, and `&` to tiles no one is writing.
struct Grid<T> {
    base: *mut T,
    r: usize,
    bs: usize,
}

impl<T> Clone for Grid<T> {
    fn clone(&self) -> Self {
        *self
    }
}
impl<T> Copy for Grid<T> {}

// SAFETY: see the ownership protocol above.
unsafe impl<T: Send> Send for Grid<T> {}
unsafe impl<T: Send + Sync> Sync for Grid<T> {}

impl<T: Copy> Grid<T> {
    fn new(t: &mut TiledMatrix<T>) -> Self {
        Grid {
            r: t.r(),
            bs: t.bs(),
            base: t.as_mut_ptr(),
        }
    }

    #[inline]
    fn offset(&self, ti: usize, tj: usize) -> usize {
        (ti * self.r + tj) * self.bs * self.bs
    }

    /// SAFETY: no live `&mut` to this tile.
    unsafe fn tile<'a>(self, ti: usize, tj: usize) -> &'a [T] {
        std::slice::from_raw_parts(self.base.add(self.offset(ti, tj)), self.bs * self.bs)
    }

    /// SAFETY: caller owns the tile exclusively.
    unsafe fn tile_mut<'a>(self, ti: usize, tj: usize) -> &'a mut [T] {
        std::slice::from_raw_parts_mut(self.base.add(self.offset(ti, tj)), self.bs * self.bs)
    }

    /// SAFETY: caller owns rows `lo..hi` of the tile exclusively.
    unsafe fn rows_mut<'a>(self, ti: usize, tj: usize, lo: usize, hi: usize) -> &'a mut [T] {
        let base = self.base.add(self.offset(ti, tj) + lo * self.bs);
        std::slice::from_raw_parts_mut(base, (hi - lo) * self.bs)
    }

    /// SAFETY: nobody writes row `row` of the tile concurrently.
    unsafe fn copy_row(self, ti: usize, tj: usize, row: usize, out: &mut [T]) {
        let src = self.base.add(self.offset(ti, tj) + row * self.bs);
        std::ptr::copy_nonoverlapping(src, out.as_mut_ptr(), self.bs);
    }
}

#[derive(Default)]
struct Gate {
    state: Mutex<Option<bool>>,
    cv: Condvar,
}

impl Gate {
    fn open(&self, go: bool) {
        *self.state.lock().unwrap_or_else(PoisonError::into_inner) = Some(go);
        self.cv.notify_all();
    }

    fn wait(&self) -> bool {
        let guard = self.state.lock().unwrap_or_else(PoisonError::into_inner);
        let guard = self
            .cv
            .wait_while(guard, |s| s.is_none())
            .unwrap_or_else(PoisonError::into_inner);
        guard.unwrap_or(false)
    }
}

struct Shared<'a, T> {
    cfg: &'a SolveConfig,
    opts: &'a TraceOptions,
    r: usize,
    bs: usize,
    dist: Grid<T>,
    paths: Option<Grid<u32>>,
    barrier: Barrier,
    /// Per round: next phase-2/3 task (barrier mode) or next task of the
    /// combined queue (dependency-driven mode).
    edge_queue: Vec<AtomicUsize>,
    /// Per round: next phase-4 task, barrier mode only.
    inner_queue: Vec<AtomicUsize>,
    deps: Option<DepState>,
    accounting: Mutex<Vec<RoundAccounting>>,
    gate: Gate,
    plan: Option<Vec<usize>>,
    t0: Instant,
}

#[derive(Default)]
struct WorkerOut {
    events: Vec<Event>,
    pinned: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Task {
    PivotRow(usize),
    PivotCol(usize),
    Inner(usize, usize),
}

fn run_workers<T: Element>(shared: &Shared<'_, T>) -> Result<Vec<WorkerOut>> {
    thread::scope(|scope| {
        let mut handles = Vec::with_capacity(shared.cfg.threads);
        for w in 0..shared.cfg.threads {
            let spawned = thread::Builder::new()
                .name(format!("bfw-worker-{w}"))
                .spawn_scoped(scope, move || Worker::new(shared, w).run());
            match spawned {
                Ok(h) => handles.push(h),
                Err(e) => {
                    shared.gate.open(false);
                    for h in handles {
                        let _ = h.join();
                    }
                    return Err(Error::ThreadPool(e));
                }
            }
        }
        shared.gate.open(true);
        Ok(handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect())
    })
}

struct Worker<'s, 'a, T> {
    sh: &'s Shared<'a, T>,
    id: usize,
    events: Vec<Event>,
    rng: Option<ChaCha8Rng>,
    brow: Vec<T>,
    acol: Vec<T>,
}

impl<'s, 'a, T: Element> Worker<'s, 'a, T> {
    fn new(sh: &'s Shared<'a, T>, id: usize) -> Self {
        let rng = sh
            .opts
            .max_delay
            .map(|_| ChaCha8Rng::seed_from_u64(sh.opts.seed ^ (id as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        Worker {
            sh,
            id,
            events: Vec::new(),
            rng,
            brow: vec![T::ZERO; sh.bs],
            acol: vec![T::ZERO; sh.bs],
        }
    }

    fn run(mut self) -> WorkerOut {
        if !self.sh.gate.wait() {
            return WorkerOut::default();
        }
        let pinned = self.pin();
        for k in 0..self.sh.r {
            self.pivot_phase(k);
            self.sh.barrier.wait();
            match self.sh.cfg.mode {
                Mode::Barrier => self.barrier_round(k),
                Mode::DepDriven => self.depdriven_round(k),
            }
        }
        WorkerOut {
            events: self.events,
            pinned,
        }
    }

    fn pin(&self) -> Option<usize> {
        let cpu = self.sh.plan.as_ref()?.get(self.id).copied()?;
        if pin_current_thread(cpu) {
            Some(cpu)
        } else {
            log::warn!(
                "could not pin worker {} to cpu {cpu}; leaving placement to the OS",
                self.id
            );
            None
        }
    }

    fn record(&mut self, round: usize, phase: u8, block: (usize, usize), kind: EventKind) {
        if self.sh.opts.record_events {
            self.events.push(Event {
                thread: self.id,
                round,
                phase,
                block,
                kind,
                t_ns: self.sh.t0.elapsed().as_nanos() as u64,
            });
        }
    }

    fn inject_delay(&mut self) {
        if let (Some(rng), Some(max)) = (self.rng.as_mut(), self.sh.opts.max_delay) {
            let ns = rng.random_range(0..=max.as_nanos() as u64);
            thread::sleep(Duration::from_nanos(ns));
        }
    }

    /// Phase 1 with rows of the pivot tile split into contiguous bands.
    ///
    /// Each step copies pivot row `s` and relaxes the worker's own rows other
    /// than `s`. Row `s` itself can only change when the pivot's diagonal
    /// entry `s` is negative; in that case it is relaxed by its owner after
    /// a second barrier, once every worker has its copy.
    fn pivot_phase(&mut self, k: usize) {
        let sh = self.sh;
        let (bs, threads) = (sh.bs, sh.cfg.threads);
        let lo = self.id * bs / threads;
        let hi = (self.id + 1) * bs / threads;
        let active = lo < hi;
        if active {
            self.record(k, 1, (k, k), EventKind::Start);
            self.inject_delay();
        }
        for s in 0..bs {
            sh.barrier.wait();
            // SAFETY: row s is not written between the two barriers of this step.
            unsafe { sh.dist.copy_row(k, k, s, &mut self.brow) };
            let diag = self.brow[s];
            let kval = (k * bs + s) as u32;
            if active {
                for (a, b) in [(lo, hi.min(s)), (lo.max(s + 1), hi)] {
                    if a < b {
                        self.relax_pivot_rows(k, s, a, b, kval);
                    }
                }
            }
            if diag < T::ZERO {
                sh.barrier.wait();
                if (lo..hi).contains(&s) {
                    self.relax_pivot_rows(k, s, s, s + 1, kval);
                }
            }
        }
        if active {
            self.record(k, 1, (k, k), EventKind::End);
        }
    }

    fn relax_pivot_rows(&mut self, k: usize, step: usize, lo: usize, hi: usize, kval: u32) {
        let sh = self.sh;
        let bs = sh.bs;
        // SAFETY: rows lo..hi of the pivot belong to this worker during phase 1.
        let rows = unsafe { sh.dist.rows_mut(k, k, lo, hi) };
        let prows = sh.paths.map(|p| unsafe { p.rows_mut(k, k, lo, hi) });
        let m = hi - lo;
        for (r, a) in self.acol[..m].iter_mut().enumerate() {
            *a = rows[r * bs + step];
        }
        relax_band(sh.cfg.tier, bs, rows, &self.acol[..m], &self.brow, prows, kval);
    }

    fn barrier_round(&mut self, k: usize) {
        let sh = self.sh;
        let edges = 2 * (sh.r - 1);
        let inner = (sh.r - 1) * (sh.r - 1);
        loop {
            let idx = sh.edge_queue[k].fetch_add(1, Ordering::Relaxed);
            if idx >= edges {
                break;
            }
            self.run_task(k, edge_task(sh.r, k, idx));
        }
        sh.barrier.wait();
        loop {
            let idx = sh.inner_queue[k].fetch_add(1, Ordering::Relaxed);
            if idx >= inner {
                break;
            }
            self.run_task(k, inner_task(sh.r, k, idx));
        }
        sh.barrier.wait();
    }

    fn depdriven_round(&mut self, k: usize) {
        let sh = self.sh;
        let deps = sh.deps.as_ref().expect("dependency state in dep-driven mode");
        let edges = 2 * (sh.r - 1);
        let total = edges + (sh.r - 1) * (sh.r - 1);
        loop {
            let idx = sh.edge_queue[k].fetch_add(1, Ordering::Relaxed);
            if idx >= total {
                break;
            }
            if idx < edges {
                let task = edge_task(sh.r, k, idx);
                self.run_task(k, task);
                match task {
                    Task::PivotRow(j) => deps.complete_pivot_row_tile(k, j),
                    Task::PivotCol(i) => deps.complete_pivot_col_tile(i, k),
                    Task::Inner(..) => unreachable!(),
                }
            } else {
                let task = inner_task(sh.r, k, idx - edges);
                let Task::Inner(i, j) = task else { unreachable!() };
                for _ in 0..DEPS_PER_TILE {
                    deps.wait(i, j);
                }
                self.run_task(k, task);
            }
        }
        if sh.barrier.wait().is_leader() {
            let acct = deps.reset(k);
            debug_assert!(acct.is_balanced(sh.r), "unbalanced round: {acct:?}");
            sh.accounting
                .lock()
                .unwrap_or_else(PoisonError::into_inner)
                .push(acct);
        }
    }

    fn run_task(&mut self, k: usize, task: Task) {
        let sh = self.sh;
        let (phase, block) = match task {
            Task::PivotRow(j) => (2, (k, j)),
            Task::PivotCol(i) => (3, (i, k)),
            Task::Inner(i, j) => (4, (i, j)),
        };
        self.record(k, phase, block, EventKind::Start);
        self.inject_delay();
        let k_base = (k * sh.bs) as u32;
        // SAFETY: the phase/dependency protocol gives this task exclusive
        // ownership of `block`; the operand tiles are finished and read-only
        // for the rest of the round.
        unsafe {
            let c = sh.dist.tile_mut(block.0, block.1);
            let pc = sh.paths.map(|p| p.tile_mut(block.0, block.1));
            let ops = match task {
                Task::PivotRow(_) => Operands::PivotRow {
                    pivot: sh.dist.tile(k, k),
                },
                Task::PivotCol(_) => Operands::PivotCol {
                    pivot: sh.dist.tile(k, k),
                },
                Task::Inner(i, j) => Operands::Independent {
                    a: sh.dist.tile(i, k),
                    b: sh.dist.tile(k, j),
                },
            };
            tile_relax(sh.cfg.tier, sh.bs, c, ops, pc, k_base);
        }
        self.record(k, phase, block, EventKind::End);
    }
}

/// The `m`-th tile index other than the pivot `k`.
#[inline]
fn skip_pivot(k: usize, m: usize) -> usize {
    if m < k {
        m
    } else {
        m + 1
    }
}

/// Phase-2 and phase-3 tasks alternate: `(k, j0), (i0, k), (k, j1), ...`.
fn edge_task(_r: usize, k: usize, idx: usize) -> Task {
    let other = skip_pivot(k, idx / 2);
    if idx.is_multiple_of(2) {
        Task::PivotRow(other)
    } else {
        Task::PivotCol(other)
    }
}

/// Phase-4 tasks in row-major order of their tiles.
fn inner_task(r: usize, k: usize, idx: usize) -> Task {
    let m = r - 1;
    Task::Inner(skip_pivot(k, idx / m), skip_pivot(k, idx % m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{generate_graph, GraphSpec};
    use crate::reference::fw_classic;

    #[test]
    fn task_enumeration_covers_every_tile_once() {
        for r in 1..6 {
            for k in 0..r {
                let mut seen = vec![0u32; r * r];
                seen[k * r + k] += 1;
                for idx in 0..2 * (r - 1) {
                    match edge_task(r, k, idx) {
                        Task::PivotRow(j) => seen[k * r + j] += 1,
                        Task::PivotCol(i) => seen[i * r + k] += 1,
                        Task::Inner(..) => panic!(),
                    }
                }
                for idx in 0..(r - 1) * (r - 1) {
                    let Task::Inner(i, j) = inner_task(r, k, idx) else { panic!() };
                    assert!(i != k && j != k);
                    seen[i * r + j] += 1;
                }
                assert!(seen.iter().all(|&c| c == 1), "r={r} k={k}");
            }
        }
    }

    #[test]
    fn rejects_bad_config() {
        let d = DistanceMatrix::<f32>::edgeless(64);
        assert!(matches!(
            solve(&d, &SolveConfig::new(48, 1)),
            Err(Error::BlockSize { n: 64, bs: 48 })
        ));
        assert!(matches!(solve(&d, &SolveConfig::new(16, 0)), Err(Error::Config(_))));
    }

    #[test]
    fn single_round_matches_oracle() {
        let d = generate_graph::<f32>(&GraphSpec::new(32, 3)).unwrap();
        let (want, _) = fw_classic(&d);
        for mode in [Mode::Barrier, Mode::DepDriven] {
            for threads in [1, 3] {
                let cfg = SolveConfig::new(32, threads).with_mode(mode, SyncKind::CondVar);
                assert!(solve(&d, &cfg).unwrap().distances.bitwise_eq(&want));
            }
        }
    }

    #[test]
    fn more_threads_than_pivot_rows() {
        let d = generate_graph::<f64>(&GraphSpec::new(16, 9)).unwrap();
        let (want, _) = fw_classic(&d);
        let cfg = SolveConfig::new(8, 12).with_mode(Mode::DepDriven, SyncKind::Semaphore);
        assert!(solve(&d, &cfg).unwrap().distances.bitwise_eq(&want));
    }

    #[test]
    fn negative_edges_without_cycles() {
        // Negative pivot diagonals cannot occur without negative cycles, but
        // negative edges still exercise the sign-aware paths.
        let mut d = generate_graph::<f64>(&GraphSpec::new(32, 21)).unwrap();
        for i in 0..31 {
            d.set(i, i + 1, -1.0);
        }
        for i in 0..32 {
            for j in 0..i {
                d.set(i, j, f64::INFINITY);
            }
        }
        let (want, _) = fw_classic(&d);
        for threads in [1, 4] {
            let cfg = SolveConfig::new(8, threads).with_tier(KernelTier::Vectorized);
            assert!(solve(&d, &cfg).unwrap().distances.bitwise_eq(&want));
        }
    }

    #[test]
    fn negative_cycle_is_flagged_by_every_config() {
        let mut d = DistanceMatrix::<f64>::edgeless(16);
        d.set(3, 4, -1.0);
        d.set(4, 3, -1.0);
        for mode in [Mode::Barrier, Mode::DepDriven] {
            for threads in [1, 4] {
                let cfg = SolveConfig::new(8, threads).with_mode(mode, SyncKind::Semaphore);
                let out = solve(&d, &cfg).unwrap();
                assert!(crate::reference::has_negative_cycle(&out.distances));
            }
        }
    }

    #[test]
    fn accounting_recorded_per_round() {
        let d = generate_graph::<f32>(&GraphSpec::new(64, 1)).unwrap();
        for sync in SyncKind::ALL {
            let cfg = SolveConfig::new(16, 3).with_mode(Mode::DepDriven, sync);
            let (_, trace) = solve_traced(&d, &cfg, &TraceOptions::default()).unwrap();
            assert_eq!(trace.rounds.len(), 4);
            for acct in &trace.rounds {
                assert_eq!(acct.posts, 18);
                assert!(acct.is_balanced(4), "{acct:?}");
            }
        }
    }
}
