//! Per-tile dependency state for intra-round scheduling.
//!
//! Each phase-4 tile `(i, j)` of round `k` has exactly two dependencies: the
//! phase-2 tile `(k, j)` and the phase-3 tile `(i, k)`. Finishing a phase-2
//! tile posts to every cell of its tile-column except the pivot row; finishing
//! a phase-3 tile posts to every cell of its tile-row except the pivot column.
//! A phase-4 task performs two waits on its own cell before it runs.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex, MutexGuard, PoisonError};

use serde::{Deserialize, Serialize};

/// Dependencies of every phase-4 tile.
pub const DEPS_PER_TILE: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyncKind {
    /// One counting semaphore per tile, starting at zero each round.
    Semaphore,
    /// Per tile a mutex, a condition variable and a pending-dependency count.
    CondVar,
}

impl SyncKind {
    pub const ALL: [SyncKind; 2] = [SyncKind::Semaphore, SyncKind::CondVar];

    pub fn name(self) -> &'static str {
        match self {
            SyncKind::Semaphore => "semaphore",
            SyncKind::CondVar => "condvar",
        }
    }
}

impl std::fmt::Display for SyncKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SyncKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "semaphore" | "sem" => Ok(SyncKind::Semaphore),
            "condvar" | "cond" | "cv" => Ok(SyncKind::CondVar),
            other => Err(format!("unknown sync mechanism `{other}` (expected semaphore or condvar)")),
        }
    }
}

fn relock<G>(r: Result<G, PoisonError<G>>) -> G {
    r.unwrap_or_else(PoisonError::into_inner)
}

/// Counting semaphore over a mutex and condition variable.
#[derive(Debug, Default)]
pub struct Semaphore {
    count: Mutex<u32>,
    cv: Condvar,
}

impl Semaphore {
    pub fn new(initial: u32) -> Self {
        Semaphore {
            count: Mutex::new(initial),
            cv: Condvar::new(),
        }
    }

    /// Increments the count and wakes one waiter. Returns the new count.
    pub fn post(&self) -> u32 {
        let mut count = relock(self.count.lock());
        *count += 1;
        let now = *count;
        drop(count);
        self.cv.notify_one();
        now
    }

    /// Blocks while the count is zero, then decrements it.
    pub fn wait(&self) {
        let mut count = relock(self.cv.wait_while(relock(self.count.lock()), |c| *c == 0));
        *count -= 1;
    }

    pub fn value(&self) -> u32 {
        *relock(self.count.lock())
    }

    fn set(&self, v: u32) {
        *relock(self.count.lock()) = v;
    }
}

#[derive(Debug)]
struct PendingCell {
    pending: Mutex<i32>,
    cv: Condvar,
}

impl PendingCell {
    fn lock(&self) -> MutexGuard<'_, i32> {
        relock(self.pending.lock())
    }
}

#[derive(Debug)]
enum Cells {
    Semaphore(Vec<Semaphore>),
    CondVar(Vec<PendingCell>),
}

/// `r x r` grid of dependency cells plus post/wait tallies for the current
/// round.
#[derive(Debug)]
pub struct DepState {
    r: usize,
    cells: Cells,
    posts: AtomicU64,
    waits: AtomicU64,
    violations: AtomicU64,
}

/// Post/wait tallies and end-of-round residue for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundAccounting {
    pub round: usize,
    pub posts: u64,
    pub waits: u64,
    /// Cells whose semaphore count or pending count was not zero at round end.
    pub residual_cells: usize,
    /// Posts that would have driven a pending count below zero.
    pub violations: u64,
}

impl RoundAccounting {
    /// Posts and waits expected in a round with `r` tiles per side.
    pub fn expected_posts(r: usize) -> u64 {
        let m = r.saturating_sub(1) as u64;
        DEPS_PER_TILE as u64 * m * m
    }

    pub fn is_balanced(&self, r: usize) -> bool {
        let want = Self::expected_posts(r);
        self.posts == want && self.waits == want && self.residual_cells == 0 && self.violations == 0
    }
}

impl DepState {
    /// Fresh state, already reset for round 0.
    pub fn new(r: usize, kind: SyncKind) -> Self {
        let cells = match kind {
            SyncKind::Semaphore => Cells::Semaphore((0..r * r).map(|_| Semaphore::new(0)).collect()),
            SyncKind::CondVar => Cells::CondVar(
                (0..r * r)
                    .map(|_| PendingCell {
                        pending: Mutex::new(DEPS_PER_TILE as i32),
                        cv: Condvar::new(),
                    })
                    .collect(),
            ),
        };
        DepState {
            r,
            cells,
            posts: AtomicU64::new(0),
            waits: AtomicU64::new(0),
            violations: AtomicU64::new(0),
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn kind(&self) -> SyncKind {
        match self.cells {
            Cells::Semaphore(_) => SyncKind::Semaphore,
            Cells::CondVar(_) => SyncKind::CondVar,
        }
    }

    /// Signals that one dependency of tile `(i, j)` is done.
    pub fn post(&self, i: usize, j: usize) {
        let idx = i * self.r + j;
        match &self.cells {
            Cells::Semaphore(sems) => {
                let now = sems[idx].post();
                debug_assert!(now <= DEPS_PER_TILE, "semaphore ({i}, {j}) reached {now}");
            }
            Cells::CondVar(cells) => {
                let cell = &cells[idx];
                let mut f = cell.lock();
                if *f <= 0 {
                    self.violations.fetch_add(1, Ordering::Relaxed);
                    debug_assert!(false, "pending count of ({i}, {j}) would underflow");
                }
                *f -= 1;
                drop(f);
                cell.cv.notify_one();
            }
        }
        self.posts.fetch_add(1, Ordering::Relaxed);
    }

    /// Consumes one dependency of tile `(i, j)`, blocking until it is
    /// available.
    ///
    /// The semaphore flavor decrements its count. The condition-variable
    /// flavor blocks until the pending count reaches zero and never calls
    /// `wait` on the condition variable when it already is.
    pub fn wait(&self, i: usize, j: usize) {
        let idx = i * self.r + j;
        match &self.cells {
            Cells::Semaphore(sems) => sems[idx].wait(),
            Cells::CondVar(cells) => {
                let cell = &cells[idx];
                let mut f = cell.lock();
                while *f > 0 {
                    f = relock(cell.cv.wait(f));
                }
            }
        }
        self.waits.fetch_add(1, Ordering::Relaxed);
    }

    /// Posts for a finished phase-2 tile `(k, j)`: every `(i, j)`, `i != k`.
    pub fn complete_pivot_row_tile(&self, k: usize, j: usize) {
        for i in (0..self.r).filter(|&i| i != k) {
            self.post(i, j);
        }
    }

    /// Posts for a finished phase-3 tile `(i, k)`: every `(i, j)`, `j != k`.
    pub fn complete_pivot_col_tile(&self, i: usize, k: usize) {
        for j in (0..self.r).filter(|&j| j != k) {
            self.post(i, j);
        }
    }

    /// Semaphore counts, or pending counts for the condition-variable flavor,
    /// row-major.
    pub fn snapshot(&self) -> Vec<i64> {
        match &self.cells {
            Cells::Semaphore(sems) => sems.iter().map(|s| s.value() as i64).collect(),
            Cells::CondVar(cells) => cells.iter().map(|c| *c.lock() as i64).collect(),
        }
    }

    /// Tallies the finished round `round` (the pivot index), then zeroes
    /// semaphores or sets every pending count back to two.
    ///
    /// A cell is residual when a phase-4 tile did not drain to zero, or when a
    /// tile in the pivot row or column was touched at all.
    ///
    /// Must only be called while no other thread touches the state.
    pub fn reset(&self, round: usize) -> RoundAccounting {
        let r = self.r;
        let untouched = match self.kind() {
            SyncKind::Semaphore => 0,
            SyncKind::CondVar => DEPS_PER_TILE as i64,
        };
        let residual_cells = self
            .snapshot()
            .iter()
            .enumerate()
            .filter(|&(idx, &v)| {
                let (i, j) = (idx / r, idx % r);
                let expected = if i == round || j == round { untouched } else { 0 };
                v != expected
            })
            .count();
        let acct = RoundAccounting {
            round,
            posts: self.posts.swap(0, Ordering::Relaxed),
            waits: self.waits.swap(0, Ordering::Relaxed),
            residual_cells,
            violations: self.violations.swap(0, Ordering::Relaxed),
        };
        match &self.cells {
            Cells::Semaphore(sems) => sems.iter().for_each(|s| s.set(0)),
            Cells::CondVar(cells) => cells.iter().for_each(|c| *c.lock() = DEPS_PER_TILE as i32),
        }
        acct
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use std::thread;
    use std::time::Duration;

    #[test]
    fn semaphore_counts() {
        let s = Semaphore::new(0);
        assert_eq!(s.post(), 1);
        assert_eq!(s.post(), 2);
        s.wait();
        s.wait();
        assert_eq!(s.value(), 0);
    }

    #[test]
    fn semaphore_blocks_until_post() {
        let s = Arc::new(Semaphore::new(0));
        let waiter = {
            let s = Arc::clone(&s);
            thread::spawn(move || s.wait())
        };
        thread::sleep(Duration::from_millis(20));
        assert!(!waiter.is_finished());
        s.post();
        waiter.join().unwrap();
        assert_eq!(s.value(), 0);
    }

    #[test]
    fn phase2_completion_posts_column() {
        // R = 8, k = 4: finishing tile (4, 6) posts once to the 7 other cells
        // of tile-column 6.
        let deps = DepState::new(8, SyncKind::Semaphore);
        deps.complete_pivot_row_tile(4, 6);
        let snap = deps.snapshot();
        for i in 0..8 {
            for j in 0..8 {
                let want = i64::from(j == 6 && i != 4);
                assert_eq!(snap[i * 8 + j], want, "({i}, {j})");
            }
        }
        assert_eq!(snap.iter().sum::<i64>(), 7);
    }

    #[test]
    fn pending_counts_track_finished_dependencies() {
        // R = 8, k = 4, with some phase-2 and phase-3 tiles finished: a cell
        // reads 2 minus the number of its finished dependencies.
        let (r, k) = (8, 4);
        let deps = DepState::new(r, SyncKind::CondVar);
        let done_cols = [0usize, 2, 6];
        let done_rows = [1usize, 6];
        for &j in &done_cols {
            deps.complete_pivot_row_tile(k, j);
        }
        for &i in &done_rows {
            deps.complete_pivot_col_tile(i, k);
        }
        let snap = deps.snapshot();
        for i in (0..r).filter(|&i| i != k) {
            for j in (0..r).filter(|&j| j != k) {
                let done = done_cols.contains(&j) as i64 + done_rows.contains(&i) as i64;
                assert_eq!(snap[i * r + j], 2 - done, "({i}, {j})");
            }
        }
        // both dependencies done: waiting does not block
        deps.wait(1, 0);
        deps.wait(1, 0);
    }

    #[test]
    fn two_by_two_round_accounting() {
        for kind in SyncKind::ALL {
            let deps = DepState::new(2, kind);
            // round k = 0: phase 2 tile (0,1), phase 3 tile (1,0), phase 4 tile (1,1)
            deps.complete_pivot_row_tile(0, 1);
            deps.complete_pivot_col_tile(1, 0);
            deps.wait(1, 1);
            deps.wait(1, 1);
            let acct = deps.reset(0);
            assert_eq!(acct.posts, 2);
            assert_eq!(acct.waits, 2);
            assert!(acct.is_balanced(2), "{kind}: {acct:?}");
            let fresh = deps.snapshot();
            let want = if kind == SyncKind::Semaphore { 0 } else { 2 };
            assert!(fresh.iter().all(|&v| v == want));
        }
    }

    #[test]
    fn condvar_wait_wakes_on_last_post() {
        let deps = Arc::new(DepState::new(3, SyncKind::CondVar));
        let waiter = {
            let deps = Arc::clone(&deps);
            thread::spawn(move || {
                deps.wait(2, 2);
                deps.wait(2, 2);
            })
        };
        deps.post(2, 2);
        thread::sleep(Duration::from_millis(20));
        assert!(!waiter.is_finished());
        deps.post(2, 2);
        waiter.join().unwrap();
    }

    #[test]
    #[cfg(debug_assertions)]
    #[should_panic(expected = "underflow")]
    fn underflow_is_fatal_in_debug() {
        let deps = DepState::new(2, SyncKind::CondVar);
        deps.post(0, 0);
        deps.post(0, 0);
        deps.post(0, 0);
    }
}
