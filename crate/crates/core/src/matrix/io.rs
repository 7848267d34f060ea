//! Native binary matrix format.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic: `FWDM` (distances), `FWPM` (paths) |
//! | 4      | 2    | version, currently 1                    |
//! | 6      | 1    | element tag: 1 = f32, 2 = f64, 3 = u32  |
//! | 7      | 1    | reserved, 0                             |
//! | 8      | 8    | n                                       |
//! | 16     | ...  | n*n row-major elements                  |
//!
//! Infinities are stored as IEEE infinities. Path entries use `u32::MAX` for
//! "no intermediate".

use std::fs;
use std::path::Path;

use super::{AnyMatrix, DistanceMatrix, IntermediateMatrix};
use crate::element::{ElemKind, Element};
use crate::error::{Error, Result};

const DIST_MAGIC: &[u8; 4] = b"FWDM";
const PATH_MAGIC: &[u8; 4] = b"FWPM";
const VERSION: u16 = 1;
const PATH_TAG: u8 = 3;
const HEADER_LEN: usize = 16;

fn header(magic: &[u8; 4], tag: u8, n: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(magic);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(tag);
    out.push(0);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out
}

struct Parsed<'a> {
    tag: u8,
    n: usize,
    payload: &'a [u8],
}

fn parse<'a>(bytes: &'a [u8], magic: &[u8; 4]) -> Result<Parsed<'a>> {
    if bytes.is_empty() {
        return Err(Error::MalformedInput("empty file".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::MalformedInput(format!(
            "header needs {HEADER_LEN} bytes, file has {}",
            bytes.len()
        )));
    }
    if &bytes[0..4] != magic {
        return Err(Error::MalformedInput(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&bytes[0..4]),
            String::from_utf8_lossy(magic)
        )));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::MalformedInput(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let n = usize::try_from(n).map_err(|_| Error::MalformedInput(format!("n={n} too large")))?;
    Ok(Parsed {
        tag: bytes[6],
        n,
        payload: &bytes[HEADER_LEN..],
    })
}

fn check_payload(n: usize, elem_size: usize, payload: &[u8]) -> Result<()> {
    let expected = n
        .checked_mul(n)
        .and_then(|c| c.checked_mul(elem_size))
        .ok_or_else(|| Error::MalformedInput(format!("n={n} overflows")))?;
    let found = payload.len();
    if found < expected {
        return Err(Error::TruncatedInput {
            expected: expected as u64,
            found: found as u64,
        });
    }
    if found > expected {
        return Err(Error::MalformedInput(format!(
            "{} trailing bytes after {n}x{n} payload",
            found - expected
        )));
    }
    Ok(())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

fn decode<T: Element>(n: usize, payload: &[u8]) -> Result<DistanceMatrix<T>> {
    check_payload(n, T::SIZE, payload)?;
    let data = payload.chunks_exact(T::SIZE).map(T::read_le).collect();
    DistanceMatrix::from_vec(n, data)
}

pub(crate) fn encode<T: Element>(d: &DistanceMatrix<T>) -> Vec<u8> {
    let mut out = header(DIST_MAGIC, T::KIND.tag(), d.n());
    out.reserve(d.as_slice().len() * T::SIZE);
    for &v in d.as_slice() {
        v.write_le(&mut out);
    }
    out
}

pub fn write_matrix<T: Element>(path: impl AsRef<Path>, d: &DistanceMatrix<T>) -> Result<()> {
    write_file(path.as_ref(), &encode(d))
}

/// Reads a matrix whose element kind must be `T`.
pub fn read_matrix<T: Element>(path: impl AsRef<Path>) -> Result<DistanceMatrix<T>> {
    let bytes = read_file(path.as_ref())?;
    let p = parse(&bytes, DIST_MAGIC)?;
    let kind = ElemKind::from_tag(p.tag)
        .ok_or_else(|| Error::MalformedInput(format!("unknown element tag {}", p.tag)))?;
    if kind != T::KIND {
        return Err(Error::ElemKindMismatch {
            expected: T::KIND.name(),
            found: kind.name(),
        });
    }
    decode(p.n, p.payload)
}

/// Reads a matrix of whichever element kind the header declares.
pub fn read_any(path: impl AsRef<Path>) -> Result<AnyMatrix> {
    let bytes = read_file(path.as_ref())?;
    let p = parse(&bytes, DIST_MAGIC)?;
    match ElemKind::from_tag(p.tag) {
        Some(ElemKind::F32) => decode(p.n, p.payload).map(AnyMatrix::F32),
        Some(ElemKind::F64) => decode(p.n, p.payload).map(AnyMatrix::F64),
        None => Err(Error::MalformedInput(format!("unknown element tag {}", p.tag))),
    }
}

impl AnyMatrix {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        match self {
            AnyMatrix::F32(m) => write_matrix(path, m),
            AnyMatrix::F64(m) => write_matrix(path, m),
        }
    }
}

pub fn write_paths(path: impl AsRef<Path>, p: &IntermediateMatrix) -> Result<()> {
    let mut out = header(PATH_MAGIC, PATH_TAG, p.n());
    out.reserve(p.as_slice().len() * 4);
    for &v in p.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    write_file(path.as_ref(), &out)
}

pub fn read_paths(path: impl AsRef<Path>) -> Result<IntermediateMatrix> {
    let bytes = read_file(path.as_ref())?;
    let p = parse(&bytes, PATH_MAGIC)?;
    if p.tag != PATH_TAG {
        return Err(Error::MalformedInput(format!("unknown path tag {}", p.tag)));
    }
    check_payload(p.n, 4, p.payload)?;
    let data = p
        .payload
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    IntermediateMatrix::from_vec(p.n, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{generate_graph, GraphSpec};

    #[test]
    fn round_trip_keeps_infinities() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let d = generate_graph::<f64>(&GraphSpec::new(8, 1)).unwrap();
        assert!(d.as_slice().iter().any(|v| v.is_infinite()));
        write_matrix(&path, &d).unwrap();
        let back: DistanceMatrix<f64> = read_matrix(&path).unwrap();
        assert!(back.bitwise_eq(&d));
        assert_eq!(read_any(&path).unwrap(), AnyMatrix::F64(d));
    }

    #[test]
    fn empty_file_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.bin");
        fs::write(&path, b"").unwrap();
        assert!(matches!(read_any(&path), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn short_payload_is_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.bin");
        let d = DistanceMatrix::<f32>::edgeless(4);
        let bytes = encode(&d);
        // header says n=4 but only 3 rows follow
        fs::write(&path, &bytes[..HEADER_LEN + 3 * 4 * 4]).unwrap();
        assert!(matches!(
            read_matrix::<f32>(&path),
            Err(Error::TruncatedInput { expected: 64, found: 48 })
        ));
    }

    #[test]
    fn kind_mismatch_and_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.bin");
        write_matrix(&path, &DistanceMatrix::<f32>::edgeless(2)).unwrap();
        assert!(matches!(
            read_matrix::<f64>(&path),
            Err(Error::ElemKindMismatch { expected: "f64", found: "f32" })
        ));
        assert!(matches!(read_paths(&path), Err(Error::MalformedInput(_))));
        let mut bytes = fs::read(&path).unwrap();
        bytes.push(0);
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_any(&path), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn paths_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.bin");
        let mut p = IntermediateMatrix::new(3);
        p.set(0, 2, Some(1));
        write_paths(&path, &p).unwrap();
        assert_eq!(read_paths(&path).unwrap(), p);
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_any("/nonexistent/definitely/not/here.bin").unwrap_err();
        assert!(matches!(err, Error::File { .. }));
        assert!(err.to_string().contains("here.bin"));
    }
}
