//! Element types a distance matrix can hold.

use std::fmt::{self, Debug, Display};
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Floating point element of a distance matrix.
///
/// Infinity is the type's native IEEE positive infinity, so it absorbs under
/// addition and never wins a `min`.
pub trait Element:
    Copy + Send + Sync + PartialOrd + Add<Output = Self> + Debug + Display + Default + 'static
{
    const KIND: ElemKind;
    const INFINITY: Self;
    const ZERO: Self;
    const SIZE: usize;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn is_infinite(self) -> bool;
    fn to_bits_u64(self) -> u64;
    fn write_le(self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Self;
}

impl Element for f32 {
    const KIND: ElemKind = ElemKind::F32;
    const INFINITY: Self = f32::INFINITY;
    const ZERO: Self = 0.0;
    const SIZE: usize = 4;

    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
    #[inline]
    fn is_infinite(self) -> bool {
        f32::is_infinite(self)
    }
    #[inline]
    fn to_bits_u64(self) -> u64 {
        self.to_bits() as u64
    }
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4-byte element"))
    }
}

impl Element for f64 {
    const KIND: ElemKind = ElemKind::F64;
    const INFINITY: Self = f64::INFINITY;
    const ZERO: Self = 0.0;
    const SIZE: usize = 8;

    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn is_infinite(self) -> bool {
        f64::is_infinite(self)
    }
    #[inline]
    fn to_bits_u64(self) -> u64 {
        self.to_bits()
    }
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8-byte element"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElemKind {
    F32,
    F64,
}

impl ElemKind {
    pub const ALL: [ElemKind; 2] = [ElemKind::F32, ElemKind::F64];

    pub fn name(self) -> &'static str {
        match self {
            ElemKind::F32 => "f32",
            ElemKind::F64 => "f64",
        }
    }

    pub fn size(self) -> usize {
        match self {
            ElemKind::F32 => 4,
            ElemKind::F64 => 8,
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            ElemKind::F32 => 1,
            ElemKind::F64 => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(ElemKind::F32),
            2 => Some(ElemKind::F64),
            _ => None,
        }
    }
}

impl Display for ElemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ElemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "f32" | "float" => Ok(ElemKind::F32),
            "f64" | "double" => Ok(ElemKind::F64),
            other => Err(format!("unknown element kind `{other}` (expected f32 or f64)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn algebra<T: Element>() {
        let inf = T::INFINITY;
        let x = T::from_f64(3.0);
        // min(inf, x) = x
        let m = if inf < x { inf } else { x };
        assert_eq!(m, x);
        assert!((inf + x).is_infinite());
        assert!((inf + inf).is_infinite());
        assert!(inf + x > x);
        assert!(!(inf + inf > inf));
    }

    #[test]
    fn infinity_is_absorbing_and_maximal() {
        algebra::<f32>();
        algebra::<f64>();
    }

    #[test]
    fn kind_parses() {
        assert_eq!("f32".parse::<ElemKind>().unwrap(), ElemKind::F32);
        assert_eq!("double".parse::<ElemKind>().unwrap(), ElemKind::F64);
        assert!("i32".parse::<ElemKind>().is_err());
        for k in ElemKind::ALL {
            assert_eq!(ElemKind::from_tag(k.tag()), Some(k));
        }
    }
}
