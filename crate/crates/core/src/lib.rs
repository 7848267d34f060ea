//! Blocked Floyd-Warshall all-pairs shortest paths.
//!
//! The distance matrix is cut into `bs x bs` tiles and solved in `n / bs`
//! rounds of four dependency-ordered phases. Tiles are relaxed by one of
//! several [`KernelTier`]s and scheduled either with full barriers between
//! phases or with per-tile dependency counters that let a phase-4 tile start
//! as soon as its own two operand tiles are done.

pub mod bench;
pub mod cli;
pub mod element;
pub mod error;
pub mod kernel;
pub mod matrix;
pub mod reference;
pub mod scheduler;

pub use element::{ElemKind, Element};
pub use error::{Error, Result};
pub use kernel::{tile_relax, KernelTier, Operands};
pub use matrix::{
    generate_graph, read_any, read_matrix, read_paths, write_matrix, write_paths, AnyMatrix,
    DistanceMatrix, GraphSpec, IntermediateMatrix, TiledMatrix, NONE,
};
pub use reference::{fw_classic, has_negative_cycle, path_cost, reconstruct_path};
pub use scheduler::{
    solve, solve_traced, Affinity, Mode, Solution, SolveConfig, SyncKind, TraceOptions,
};
