use std::alloc::{self, Layout};
use std::fmt;
use std::ops::{Deref, DerefMut};
use std::ptr::NonNull;

use super::DistanceMatrix;
use crate::element::Element;
use crate::error::{Error, Result};

/// Default tile alignment in bytes (one cache line).
pub const DEFAULT_ALIGN: usize = 64;

/// Heap buffer of `Copy` elements whose first element sits on an `align`-byte
/// boundary.
pub struct AlignedBuf<T: Copy> {
    ptr: NonNull<T>,
    len: usize,
    align: usize,
}

// SAFETY: the buffer uniquely owns its allocation, like a Vec<T>.
unsafe impl<T: Copy + Send> Send for AlignedBuf<T> {}
unsafe impl<T: Copy + Sync> Sync for AlignedBuf<T> {}

impl<T: Copy> AlignedBuf<T> {
    /// `align` is raised to at least `align_of::<T>()` and must be a power of two.
    pub fn filled(len: usize, value: T, align: usize) -> Self {
        let align = align.max(std::mem::align_of::<T>());
        assert!(align.is_power_of_two(), "alignment must be a power of two");
        if len == 0 || std::mem::size_of::<T>() == 0 {
            return AlignedBuf {
                ptr: NonNull::dangling(),
                len,
                align,
            };
        }
        let layout = Self::layout(len, align);
        // SAFETY: layout has non-zero size.
        let raw = unsafe { alloc::alloc(layout) } as *mut T;
        let Some(ptr) = NonNull::new(raw) else {
            alloc::handle_alloc_error(layout);
        };
        for i in 0..len {
            // SAFETY: i < len, inside the fresh allocation.
            unsafe { ptr.as_ptr().add(i).write(value) };
        }
        AlignedBuf { ptr, len, align }
    }

    fn layout(len: usize, align: usize) -> Layout {
        Layout::from_size_align(len * std::mem::size_of::<T>(), align).expect("buffer layout")
    }

    pub fn align(&self) -> usize {
        self.align
    }

    pub fn as_mut_ptr(&mut self) -> *mut T {
        self.ptr.as_ptr()
    }
}

impl<T: Copy> Drop for AlignedBuf<T> {
    fn drop(&mut self) {
        if self.len != 0 && std::mem::size_of::<T>() != 0 {
            // SAFETY: allocated in `filled` with this exact layout.
            unsafe { alloc::dealloc(self.ptr.as_ptr() as *mut u8, Self::layout(self.len, self.align)) }
        }
    }
}

impl<T: Copy> Deref for AlignedBuf<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        // SAFETY: ptr is valid for len initialized elements.
        unsafe { std::slice::from_raw_parts(self.ptr.as_ptr(), self.len) }
    }
}

impl<T: Copy> DerefMut for AlignedBuf<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        // SAFETY: as above, and we hold &mut self.
        unsafe { std::slice::from_raw_parts_mut(self.ptr.as_ptr(), self.len) }
    }
}

impl<T: Copy> Clone for AlignedBuf<T> {
    fn clone(&self) -> Self {
        if self.len == 0 || std::mem::size_of::<T>() == 0 {
            return AlignedBuf {
                ptr: NonNull::dangling(),
                len: self.len,
                align: self.align,
            };
        }
        let layout = Self::layout(self.len, self.align);
        // SAFETY: non-zero layout; the copy initializes every element.
        unsafe {
            let raw = alloc::alloc(layout) as *mut T;
            let Some(ptr) = NonNull::new(raw) else {
                alloc::handle_alloc_error(layout);
            };
            std::ptr::copy_nonoverlapping(self.ptr.as_ptr(), ptr.as_ptr(), self.len);
            AlignedBuf {
                ptr,
                len: self.len,
                align: self.align,
            }
        }
    }
}

impl<T: Copy + fmt::Debug> fmt::Debug for AlignedBuf<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlignedBuf")
            .field("len", &self.len)
            .field("align", &self.align)
            .finish()
    }
}

/// Block-major layout: `r x r` tiles, each a contiguous row-major `bs x bs`
/// buffer. Tile `(ti, tj)` starts at element `(ti * r + tj) * bs * bs`.
#[derive(Clone, Debug)]
pub struct TiledMatrix<T: Copy> {
    n: usize,
    bs: usize,
    r: usize,
    buf: AlignedBuf<T>,
}

impl<T: Copy> TiledMatrix<T> {
    pub(crate) fn from_row_major(n: usize, bs: usize, align: usize, src: &[T]) -> Result<Self> {
        if bs == 0 || !n.is_multiple_of(bs) {
            return Err(Error::BlockSize { n, bs });
        }
        debug_assert_eq!(src.len(), n * n);
        let r = n / bs;
        let mut buf = match src.first() {
            Some(&v) => AlignedBuf::filled(n * n, v, align),
            None => return Err(Error::BlockSize { n, bs }),
        };
        for ti in 0..r {
            for tj in 0..r {
                let base = (ti * r + tj) * bs * bs;
                for i in 0..bs {
                    let row = (ti * bs + i) * n + tj * bs;
                    buf[base + i * bs..base + (i + 1) * bs].copy_from_slice(&src[row..row + bs]);
                }
            }
        }
        Ok(TiledMatrix { n, bs, r, buf })
    }

    pub(crate) fn to_row_major(&self) -> Vec<T> {
        let (n, bs, r) = (self.n, self.bs, self.r);
        let mut out = self.buf.to_vec();
        for ti in 0..r {
            for tj in 0..r {
                let base = (ti * r + tj) * bs * bs;
                for i in 0..bs {
                    let row = (ti * bs + i) * n + tj * bs;
                    out[row..row + bs].copy_from_slice(&self.buf[base + i * bs..base + (i + 1) * bs]);
                }
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bs(&self) -> usize {
        self.bs
    }

    /// Tiles per side.
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn align(&self) -> usize {
        self.buf.align()
    }

    #[inline]
    pub fn tile_offset(&self, ti: usize, tj: usize) -> usize {
        (ti * self.r + tj) * self.bs * self.bs
    }

    pub fn tile(&self, ti: usize, tj: usize) -> &[T] {
        let off = self.tile_offset(ti, tj);
        &self.buf[off..off + self.bs * self.bs]
    }

    pub fn tile_mut(&mut self, ti: usize, tj: usize) -> &mut [T] {
        let off = self.tile_offset(ti, tj);
        let len = self.bs * self.bs;
        &mut self.buf[off..off + len]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.buf
    }

    pub(crate) fn as_mut_ptr(&mut self) -> *mut T {
        self.buf.as_mut_ptr()
    }
}

impl<T: Element> TiledMatrix<T> {
    pub fn to_tiled(d: &DistanceMatrix<T>, bs: usize) -> Result<Self> {
        Self::to_tiled_aligned(d, bs, DEFAULT_ALIGN)
    }

    pub fn to_tiled_aligned(d: &DistanceMatrix<T>, bs: usize, align: usize) -> Result<Self> {
        Self::from_row_major(d.n(), bs, align, d.as_slice())
    }

    pub fn from_tiled(&self) -> DistanceMatrix<T> {
        DistanceMatrix::from_vec(self.n, self.to_row_major()).expect("square by construction")
    }

    /// Element `(i, j)` of the original row-major matrix.
    pub fn get(&self, i: usize, j: usize) -> T {
        let (ti, li) = (i / self.bs, i % self.bs);
        let (tj, lj) = (j / self.bs, j % self.bs);
        self.tile(ti, tj)[li * self.bs + lj]
    }
}
