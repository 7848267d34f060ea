//! Instrumentation: per-tile event log and delay injection.

use std::collections::HashMap;
use std::time::Duration;

use serde::Serialize;

use super::deps::RoundAccounting;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    Start,
    End,
}

/// One tile (or, for phase 1, one worker's share of the pivot tile) starting
/// or finishing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Event {
    pub thread: usize,
    pub round: usize,
    pub phase: u8,
    pub block: (usize, usize),
    pub kind: EventKind,
    /// Nanoseconds since the solve started, from a monotonic clock.
    pub t_ns: u64,
}

#[derive(Debug, Clone, Default)]
pub struct TraceOptions {
    pub record_events: bool,
    /// Each tile task sleeps a uniformly random time in `[0, max_delay]`
    /// before relaxing.
    pub max_delay: Option<Duration>,
    pub seed: u64,
}

#[derive(Debug, Clone, Default)]
pub struct SolveTrace {
    /// Merged from per-worker buffers and sorted by time.
    pub events: Vec<Event>,
    /// One entry per round in dependency-driven mode; empty otherwise.
    pub rounds: Vec<RoundAccounting>,
    /// CPU each worker was pinned to, when pinning succeeded.
    pub pinned: Vec<Option<usize>>,
}

/// A phase-4 tile that started before one of its dependencies ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderViolation {
    pub round: usize,
    pub block: (usize, usize),
    pub dependency: (usize, usize),
}

impl SolveTrace {
    /// Every phase-4 start that precedes the end of its phase-2 tile
    /// `(k, j)` or phase-3 tile `(i, k)`.
    pub fn order_violations(&self) -> Vec<OrderViolation> {
        let ends: HashMap<(usize, u8, (usize, usize)), u64> = self
            .events
            .iter()
            .filter(|e| e.kind == EventKind::End)
            .map(|e| ((e.round, e.phase, e.block), e.t_ns))
            .collect();
        let mut out = Vec::new();
        for e in self.events.iter().filter(|e| e.phase == 4 && e.kind == EventKind::Start) {
            let (i, j) = e.block;
            let k = e.round;
            for (phase, dep) in [(2u8, (k, j)), (3u8, (i, k))] {
                match ends.get(&(k, phase, dep)) {
                    Some(&end) if end <= e.t_ns => {}
                    _ => out.push(OrderViolation {
                        round: k,
                        block: e.block,
                        dependency: dep,
                    }),
                }
            }
        }
        out
    }

    /// Rounds in which some phase-4 tile started before the last phase-2/3
    /// tile of that round ended.
    pub fn overlapping_rounds(&self) -> Vec<usize> {
        let rounds = self.events.iter().map(|e| e.round).max().map_or(0, |r| r + 1);
        (0..rounds)
            .filter(|&k| {
                let last_23 = self
                    .events
                    .iter()
                    .filter(|e| e.round == k && (e.phase == 2 || e.phase == 3) && e.kind == EventKind::End)
                    .map(|e| e.t_ns)
                    .max();
                let first_4 = self
                    .events
                    .iter()
                    .filter(|e| e.round == k && e.phase == 4 && e.kind == EventKind::Start)
                    .map(|e| e.t_ns)
                    .min();
                matches!((first_4, last_23), (Some(s), Some(e)) if s < e)
            })
            .collect()
    }
}
