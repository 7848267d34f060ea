//! Dense distance and intermediate-vertex matrices, the random graph
//! generator, the tiled layout and the on-disk format.

mod generate;
mod io;
mod tiled;

pub use generate::{generate_graph, GraphSpec};
pub use io::{read_any, read_matrix, read_paths, write_matrix, write_paths};
pub use tiled::{AlignedBuf, TiledMatrix, DEFAULT_ALIGN};

use crate::element::{ElemKind, Element};
use crate::error::{Error, Result};

/// Dense row-major `n x n` distance matrix.
#[derive(Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Element> DistanceMatrix<T> {
    /// Matrix with zero diagonal and every other cell infinite.
    pub fn edgeless(n: usize) -> Self {
        let mut data = vec![T::INFINITY; n * n];
        for i in 0..n {
            data[i * n + i] = T::ZERO;
        }
        DistanceMatrix { n, data }
    }

    pub fn from_vec(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::MalformedInput(format!(
                "{} elements cannot form a {n}x{n} matrix",
                data.len()
            )));
        }
        Ok(DistanceMatrix { n, data })
    }

    /// Builds a matrix from `f64` rows; `f64::INFINITY` marks absent edges.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::MalformedInput(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend(row.iter().map(|&v| T::from_f64(v)));
        }
        Ok(DistanceMatrix { n, data })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn elem_kind(&self) -> ElemKind {
        T::KIND
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Fraction of off-diagonal cells holding infinity.
    pub fn infinite_fraction(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let inf = (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && self.get(i, j).is_infinite())
            .count();
        inf as f64 / (self.n * (self.n - 1)) as f64
    }

    /// Bitwise comparison; returns the first differing cell.
    pub fn first_difference(&self, other: &Self) -> Option<(usize, usize)> {
        if self.n != other.n {
            return Some((0, 0));
        }
        self.data
            .iter()
            .zip(&other.data)
            .position(|(a, b)| a.to_bits_u64() != b.to_bits_u64())
            .map(|p| (p / self.n, p % self.n))
    }

    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.first_difference(other).is_none()
    }
}

impl<T: Element> std::fmt::Debug for DistanceMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "DistanceMatrix<{}> n={}", T::KIND, self.n)?;
        for i in 0..self.n.min(16) {
            writeln!(f, "  {:?}", &self.row(i)[..self.n.min(16)])?;
        }
        Ok(())
    }
}

/// A distance matrix of either element kind, as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMatrix {
    F32(DistanceMatrix<f32>),
    F64(DistanceMatrix<f64>),
}

impl AnyMatrix {
    pub fn n(&self) -> usize {
        match self {
            AnyMatrix::F32(m) => m.n(),
            AnyMatrix::F64(m) => m.n(),
        }
    }

    pub fn elem_kind(&self) -> ElemKind {
        match self {
            AnyMatrix::F32(_) => ElemKind::F32,
            AnyMatrix::F64(_) => ElemKind::F64,
        }
    }

    pub fn generate(spec: &GraphSpec, kind: ElemKind) -> Result<Self> {
        Ok(match kind {
            ElemKind::F32 => AnyMatrix::F32(generate_graph(spec)?),
            ElemKind::F64 => AnyMatrix::F64(generate_graph(spec)?),
        })
    }

    pub fn infinite_fraction(&self) -> f64 {
        match self {
            AnyMatrix::F32(m) => m.infinite_fraction(),
            AnyMatrix::F64(m) => m.infinite_fraction(),
        }
    }
}

impl From<DistanceMatrix<f32>> for AnyMatrix {
    fn from(m: DistanceMatrix<f32>) -> Self {
        AnyMatrix::F32(m)
    }
}

impl From<DistanceMatrix<f64>> for AnyMatrix {
    fn from(m: DistanceMatrix<f64>) -> Self {
        AnyMatrix::F64(m)
    }
}

/// Sentinel for "no intermediate vertex" (direct edge or unreachable).
pub const NONE: u32 = u32::MAX;

/// Last improving intermediate vertex for every cell.
#[derive(Clone, PartialEq, Eq)]
pub struct IntermediateMatrix {
    n: usize,
    data: Vec<u32>,
}

impl IntermediateMatrix {
    pub fn new(n: usize) -> Self {
        IntermediateMatrix {
            n,
            data: vec![NONE; n * n],
        }
    }

    pub fn from_vec(n: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::MalformedInput(format!(
                "{} entries cannot form a {n}x{n} path matrix",
                data.len()
            )));
        }
        Ok(IntermediateMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<usize> {
        match self.data[i * self.n + j] {
            NONE => None,
            k => Some(k as usize),
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: Option<usize>) {
        self.data[i * self.n + j] = k.map_or(NONE, |k| k as u32);
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [u32] {
        &mut self.data
    }
}

impl std::fmt::Debug for IntermediateMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IntermediateMatrix n={}", self.n)?;
        for i in 0..self.n.min(16) {
            let row: Vec<_> = (0..self.n.min(16)).map(|j| self.get(i, j)).collect();
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}
