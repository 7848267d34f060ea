//! The `bs x bs` min-plus tile relaxation and its optimization tiers.
//!
//! Every phase of the blocked algorithm is the same update,
//! `c[i][j] = min(c[i][j], a[i][k] + b[k][j])` for `k` ascending, applied to a
//! tile `c` with operand tiles `a` (same tile-row, pivot column) and `b`
//! (pivot row, same tile-column). The pivot phases alias `c` with one or both
//! operands, which is why `k` stays the outermost loop.
//!
//! All tiers compute `s = a[i][k] + b[k][j]` and keep `s` iff `s < c[i][j]`,
//! so they agree bit for bit on distances and on the intermediate tile.

mod check;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use check::{tile_relax_variant_check, Mismatch, OperandPattern, VariantCheck, VariantReport};

use crate::element::Element;

/// Ordered ladder of kernel transformations; each tier keeps everything the
/// previous one does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelTier {
    /// Scalar loop with an explicit compare-and-store branch.
    Baseline,
    /// Branch-free select over contiguous rows, left to the auto-vectorizer.
    Vectorized,
    /// Fixed-width chunks sized to one cache line, over 64-byte aligned tiles.
    VectorizedAligned,
    /// Chunks that found no improvement skip their stores; the improving path
    /// is marked cold.
    BranchHinted,
    /// Row pairs share each operand load, with the `j` loop fully unrolled
    /// for tile sizes 32, 64, 128 and 256.
    Unrolled,
}

impl KernelTier {
    pub const ALL: [KernelTier; 5] = [
        KernelTier::Baseline,
        KernelTier::Vectorized,
        KernelTier::VectorizedAligned,
        KernelTier::BranchHinted,
        KernelTier::Unrolled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelTier::Baseline => "baseline",
            KernelTier::Vectorized => "vectorized",
            KernelTier::VectorizedAligned => "vectorized-aligned",
            KernelTier::BranchHinted => "branch-hinted",
            KernelTier::Unrolled => "unrolled",
        }
    }

    /// Tile buffer alignment this tier runs on.
    pub fn alignment<T>(self) -> usize {
        if self >= KernelTier::VectorizedAligned {
            crate::matrix::DEFAULT_ALIGN
        } else {
            std::mem::align_of::<T>()
        }
    }
}

impl fmt::Display for KernelTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelTier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        KernelTier::ALL
            .into_iter()
            .find(|t| t.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                format!(
                    "unknown tier `{s}` (expected one of: {})",
                    KernelTier::ALL.map(|t| t.name()).join(", ")
                )
            })
    }
}

/// Which operands of a tile update are the tile itself.
#[derive(Debug, Clone, Copy)]
pub enum Operands<'a, T> {
    /// Phase 1: `c = a = b`.
    Pivot,
    /// Phase 2: `c = b`, `a` is the pivot tile.
    PivotRow { pivot: &'a [T] },
    /// Phase 3: `c = a`, `b` is the pivot tile.
    PivotCol { pivot: &'a [T] },
    /// Phase 4: `c`, `a` and `b` are distinct tiles.
    Independent { a: &'a [T], b: &'a [T] },
}

/// Relaxes tile `c` through the `bs` intermediates of the pivot block.
///
/// `pc`, when present, receives `k_base + k` wherever step `k` strictly
/// improved a cell.
pub fn tile_relax<T: Element>(
    tier: KernelTier,
    bs: usize,
    c: &mut [T],
    ops: Operands<'_, T>,
    mut pc: Option<&mut [u32]>,
    k_base: u32,
) {
    debug_assert_eq!(c.len(), bs * bs);
    if let Some(p) = pc.as_deref() {
        debug_assert_eq!(p.len(), bs * bs);
    }
    let mut brow = vec![T::ZERO; bs];
    let mut acol = vec![T::ZERO; bs];
    for k in 0..bs {
        match ops {
            Operands::Pivot | Operands::PivotRow { .. } => {
                brow.copy_from_slice(&c[k * bs..(k + 1) * bs]);
            }
            Operands::PivotCol { pivot: b } | Operands::Independent { b, .. } => {
                debug_assert_eq!(b.len(), bs * bs);
                brow.copy_from_slice(&b[k * bs..(k + 1) * bs]);
            }
        }
        match ops {
            Operands::Pivot | Operands::PivotCol { .. } => {
                for (i, a) in acol.iter_mut().enumerate() {
                    *a = c[i * bs + k];
                }
            }
            Operands::PivotRow { pivot: a } | Operands::Independent { a, .. } => {
                debug_assert_eq!(a.len(), bs * bs);
                for (i, v) in acol.iter_mut().enumerate() {
                    *v = a[i * bs + k];
                }
            }
        }
        relax_band(tier, bs, c, &acol, &brow, pc.as_deref_mut(), k_base + k as u32);
    }
}

/// One intermediate step over a band of consecutive rows: row `r` of `rows`
/// is relaxed with `acol[r] + brow[j]`.
pub(crate) fn relax_band<T: Element>(
    tier: KernelTier,
    bs: usize,
    rows: &mut [T],
    acol: &[T],
    brow: &[T],
    prows: Option<&mut [u32]>,
    kval: u32,
) {
    debug_assert_eq!(rows.len(), acol.len() * bs);
    debug_assert_eq!(brow.len(), bs);
    match tier {
        KernelTier::Baseline => baseline(bs, rows, acol, brow, prows, kval),
        KernelTier::Vectorized => vectorized(bs, rows, acol, brow, prows, kval),
        KernelTier::VectorizedAligned => match std::mem::size_of::<T>() {
            4 => chunked::<T, 16, false>(bs, rows, acol, brow, prows, kval),
            8 => chunked::<T, 8, false>(bs, rows, acol, brow, prows, kval),
            _ => chunked::<T, 4, false>(bs, rows, acol, brow, prows, kval),
        },
        KernelTier::BranchHinted => match std::mem::size_of::<T>() {
            4 => chunked::<T, 16, true>(bs, rows, acol, brow, prows, kval),
            8 => chunked::<T, 8, true>(bs, rows, acol, brow, prows, kval),
            _ => chunked::<T, 4, true>(bs, rows, acol, brow, prows, kval),
        },
        KernelTier::Unrolled => match std::mem::size_of::<T>() {
            4 => unrolled::<T, 16>(bs, rows, acol, brow, prows, kval),
            8 => unrolled::<T, 8>(bs, rows, acol, brow, prows, kval),
            _ => unrolled::<T, 4>(bs, rows, acol, brow, prows, kval),
        },
    }
}

fn baseline<T: Element>(
    bs: usize,
    rows: &mut [T],
    acol: &[T],
    brow: &[T],
    mut prows: Option<&mut [u32]>,
    kval: u32,
) {
    for (r, &aik) in acol.iter().enumerate() {
        for j in 0..bs {
            let s = aik + brow[j];
            if rows[r * bs + j] > s {
                rows[r * bs + j] = s;
                if let Some(p) = prows.as_deref_mut() {
                    p[r * bs + j] = kval;
                }
            }
        }
    }
}

fn vectorized<T: Element>(
    bs: usize,
    rows: &mut [T],
    acol: &[T],
    brow: &[T],
    prows: Option<&mut [u32]>,
    kval: u32,
) {
    match prows {
        None => {
            for (row, &aik) in rows.chunks_exact_mut(bs).zip(acol) {
                for (c, &b) in row.iter_mut().zip(brow) {
                    let s = aik + b;
                    *c = if s < *c { s } else { *c };
                }
            }
        }
        Some(prows) => {
            for ((row, prow), &aik) in rows.chunks_exact_mut(bs).zip(prows.chunks_exact_mut(bs)).zip(acol) {
                for ((c, p), &b) in row.iter_mut().zip(prow.iter_mut()).zip(brow) {
                    let s = aik + b;
                    let better = s < *c;
                    *p = if better { kval } else { *p };
                    *c = if better { s } else { *c };
                }
            }
        }
    }
}

#[inline(always)]
fn select_chunk<T: Element, const L: usize>(c: &mut [T; L], b: &[T; L], aik: T) {
    for l in 0..L {
        let s = aik + b[l];
        c[l] = if s < c[l] { s } else { c[l] };
    }
}

#[inline(always)]
fn select_chunk_paths<T: Element, const L: usize>(c: &mut [T; L], p: &mut [u32; L], b: &[T; L], aik: T, kval: u32) {
    for l in 0..L {
        let s = aik + b[l];
        let better = s < c[l];
        p[l] = if better { kval } else { p[l] };
        c[l] = if better { s } else { c[l] };
    }
}

#[inline(always)]
fn any_improves<T: Element, const L: usize>(c: &[T; L], b: &[T; L], aik: T) -> bool {
    let mut any = false;
    for l in 0..L {
        any |= aik + b[l] < c[l];
    }
    any
}

/// Relaxes one row chunk; with `HINT`, the stores happen only on the cold
/// path where some lane improved. The candidate chunk is built in registers
/// so the sums are computed once.
#[inline(always)]
fn chunk_step<T: Element, const L: usize, const HINT: bool>(
    c: &mut [T; L],
    p: Option<&mut [u32; L]>,
    b: &[T; L],
    aik: T,
    kval: u32,
) {
    if !HINT {
        match p {
            None => select_chunk(c, b, aik),
            Some(p) => select_chunk_paths(c, p, b, aik, kval),
        }
        return;
    }
    match p {
        None => {
            let mut next = *c;
            let mut any = false;
            for l in 0..L {
                let s = aik + b[l];
                let better = s < c[l];
                any |= better;
                next[l] = if better { s } else { c[l] };
            }
            if any {
                std::hint::cold_path();
                *c = next;
            }
        }
        Some(p) => {
            if any_improves(c, b, aik) {
                std::hint::cold_path();
                select_chunk_paths(c, p, b, aik, kval);
            }
        }
    }
}

#[inline(always)]
fn scalar_tail<T: Element>(c: &mut [T], p: Option<&mut [u32]>, b: &[T], aik: T, kval: u32) {
    match p {
        None => {
            for (c, &b) in c.iter_mut().zip(b) {
                let s = aik + b;
                *c = if s < *c { s } else { *c };
            }
        }
        Some(p) => {
            for ((c, p), &b) in c.iter_mut().zip(p.iter_mut()).zip(b) {
                let s = aik + b;
                let better = s < *c;
                *p = if better { kval } else { *p };
                *c = if better { s } else { *c };
            }
        }
    }
}

#[inline(always)]
fn row_chunked<T: Element, const L: usize, const HINT: bool>(
    row: &mut [T],
    mut prow: Option<&mut [u32]>,
    brow: &[T],
    aik: T,
    kval: u32,
) {
    let split = row.len() / L * L;
    let (body, tail) = row.split_at_mut(split);
    let (bbody, btail) = brow.split_at(split);
    match prow.as_deref_mut() {
        None => {
            for (c, b) in body.chunks_exact_mut(L).zip(bbody.chunks_exact(L)) {
                chunk_step::<T, L, HINT>(c.try_into().unwrap(), None, b.try_into().unwrap(), aik, kval);
            }
        }
        Some(prow) => {
            let (pbody, _) = prow.split_at_mut(split);
            for ((c, p), b) in body
                .chunks_exact_mut(L)
                .zip(pbody.chunks_exact_mut(L))
                .zip(bbody.chunks_exact(L))
            {
                chunk_step::<T, L, HINT>(
                    c.try_into().unwrap(),
                    Some(p.try_into().unwrap()),
                    b.try_into().unwrap(),
                    aik,
                    kval,
                );
            }
        }
    }
    if !tail.is_empty() {
        scalar_tail(tail, prow.map(|p| &mut p[split..]), btail, aik, kval);
    }
}

fn chunked<T: Element, const L: usize, const HINT: bool>(
    bs: usize,
    rows: &mut [T],
    acol: &[T],
    brow: &[T],
    prows: Option<&mut [u32]>,
    kval: u32,
) {
    match prows {
        None => {
            for (row, &aik) in rows.chunks_exact_mut(bs).zip(acol) {
                row_chunked::<T, L, HINT>(row, None, brow, aik, kval);
            }
        }
        Some(prows) => {
            for ((row, prow), &aik) in rows.chunks_exact_mut(bs).zip(prows.chunks_exact_mut(bs)).zip(acol) {
                row_chunked::<T, L, HINT>(row, Some(prow), brow, aik, kval);
            }
        }
    }
}

fn unrolled<T: Element, const L: usize>(
    bs: usize,
    rows: &mut [T],
    acol: &[T],
    brow: &[T],
    prows: Option<&mut [u32]>,
    kval: u32,
) {
    match bs {
        32 => unrolled_fixed::<T, L, 32>(rows, acol, brow, prows, kval),
        64 => unrolled_fixed::<T, L, 64>(rows, acol, brow, prows, kval),
        128 => unrolled_fixed::<T, L, 128>(rows, acol, brow, prows, kval),
        256 => unrolled_fixed::<T, L, 256>(rows, acol, brow, prows, kval),
        _ => unrolled_generic::<T, L>(bs, rows, acol, brow, prows, kval),
    }
}

/// Two rows per iteration with a compile-time row length, so the chunk loop
/// has a constant trip count and unrolls completely.
fn unrolled_fixed<T: Element, const L: usize, const BS: usize>(
    rows: &mut [T],
    acol: &[T],
    brow: &[T],
    prows: Option<&mut [u32]>,
    kval: u32,
) {
    let brow: &[T; BS] = brow.try_into().unwrap();
    let pairs = acol.len() / 2;
    let (body, tail) = rows.split_at_mut(pairs * 2 * BS);
    match prows {
        None => {
            for (pair, a) in body.chunks_exact_mut(2 * BS).zip(acol.chunks_exact(2)) {
                let (r0, r1) = pair.split_at_mut(BS);
                let r0: &mut [T; BS] = r0.try_into().unwrap();
                let r1: &mut [T; BS] = r1.try_into().unwrap();
                for q in 0..BS / L {
                    let b: &[T; L] = brow[q * L..(q + 1) * L].try_into().unwrap();
                    chunk_step::<T, L, true>((&mut r0[q * L..(q + 1) * L]).try_into().unwrap(), None, b, a[0], kval);
                    chunk_step::<T, L, true>((&mut r1[q * L..(q + 1) * L]).try_into().unwrap(), None, b, a[1], kval);
                }
            }
            if let Some(&aik) = acol.get(pairs * 2) {
                row_chunked::<T, L, true>(tail, None, brow, aik, kval);
            }
        }
        Some(prows) => {
            let (pbody, ptail) = prows.split_at_mut(pairs * 2 * BS);
            for ((pair, ppair), a) in body
                .chunks_exact_mut(2 * BS)
                .zip(pbody.chunks_exact_mut(2 * BS))
                .zip(acol.chunks_exact(2))
            {
                let (r0, r1) = pair.split_at_mut(BS);
                let (p0, p1) = ppair.split_at_mut(BS);
                for q in 0..BS / L {
                    let lanes = q * L..(q + 1) * L;
                    let b: &[T; L] = brow[lanes.clone()].try_into().unwrap();
                    chunk_step::<T, L, true>(
                        (&mut r0[lanes.clone()]).try_into().unwrap(),
                        Some((&mut p0[lanes.clone()]).try_into().unwrap()),
                        b,
                        a[0],
                        kval,
                    );
                    chunk_step::<T, L, true>(
                        (&mut r1[lanes.clone()]).try_into().unwrap(),
                        Some((&mut p1[lanes]).try_into().unwrap()),
                        b,
                        a[1],
                        kval,
                    );
                }
            }
            if let Some(&aik) = acol.get(pairs * 2) {
                row_chunked::<T, L, true>(tail, Some(ptail), brow, aik, kval);
            }
        }
    }
}

fn unrolled_generic<T: Element, const L: usize>(
    bs: usize,
    rows: &mut [T],
    acol: &[T],
    brow: &[T],
    prows: Option<&mut [u32]>,
    kval: u32,
) {
    let pairs = acol.len() / 2;
    let (body, tail) = rows.split_at_mut(pairs * 2 * bs);
    match prows {
        None => {
            for (pair, a) in body.chunks_exact_mut(2 * bs).zip(acol.chunks_exact(2)) {
                let (r0, r1) = pair.split_at_mut(bs);
                row_chunked::<T, L, true>(r0, None, brow, a[0], kval);
                row_chunked::<T, L, true>(r1, None, brow, a[1], kval);
            }
            if let Some(&aik) = acol.get(pairs * 2) {
                row_chunked::<T, L, true>(tail, None, brow, aik, kval);
            }
        }
        Some(prows) => {
            let (pbody, ptail) = prows.split_at_mut(pairs * 2 * bs);
            for ((pair, ppair), a) in body
                .chunks_exact_mut(2 * bs)
                .zip(pbody.chunks_exact_mut(2 * bs))
                .zip(acol.chunks_exact(2))
            {
                let (r0, r1) = pair.split_at_mut(bs);
                let (p0, p1) = ppair.split_at_mut(bs);
                row_chunked::<T, L, true>(r0, Some(p0), brow, a[0], kval);
                row_chunked::<T, L, true>(r1, Some(p1), brow, a[1], kval);
            }
            if let Some(&aik) = acol.get(pairs * 2) {
                row_chunked::<T, L, true>(tail, Some(ptail), brow, aik, kval);
            }
        }
    }
}
