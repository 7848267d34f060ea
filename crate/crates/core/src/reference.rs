//! Classic Floyd-Warshall and path utilities. This is the ground truth every
//! blocked configuration is checked against, so it stays deliberately plain.

use crate::element::Element;
use crate::error::{Error, Result};
use crate::matrix::{DistanceMatrix, IntermediateMatrix};

/// Classic k-i-j Floyd-Warshall.
///
/// A cell is rewritten only on strict improvement, and the intermediate matrix
/// keeps the last `k` that improved it.
pub fn fw_classic<T: Element>(d: &DistanceMatrix<T>) -> (DistanceMatrix<T>, IntermediateMatrix) {
    let n = d.n();
    let mut out = d.clone();
    let mut p = IntermediateMatrix::new(n);
    let dist = out.as_mut_slice();
    let paths = p.as_mut_slice();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i * n + k] + dist[k * n + j];
                if dist[i * n + j] > via {
                    dist[i * n + j] = via;
                    paths[i * n + j] = k as u32;
                }
            }
        }
    }
    (out, p)
}

/// Expands the intermediate matrix into the vertex sequence `i, ..., j`.
///
/// Unreachable pairs give an empty list. An entry that would revisit a vertex
/// or point outside the graph yields [`Error::CorruptPathMatrix`].
pub fn reconstruct_path<T: Element>(
    p: &IntermediateMatrix,
    dstar: &DistanceMatrix<T>,
    i: usize,
    j: usize,
) -> Result<Vec<usize>> {
    let n = dstar.n();
    for v in [i, j] {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
    }
    if p.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.n(),
        });
    }
    if dstar.get(i, j).is_infinite() {
        return Ok(Vec::new());
    }
    if i == j {
        return Ok(vec![i]);
    }

    let corrupt = || Error::CorruptPathMatrix { i, j };
    let mut path = vec![i];
    let mut stack = vec![(i, j)];
    // A valid expansion of an L-vertex path pops exactly 2(L-1)-1 segments.
    let mut budget = 2 * n;
    while let Some((u, v)) = stack.pop() {
        budget = budget.checked_sub(1).ok_or_else(corrupt)?;
        match p.get(u, v) {
            None => {
                path.push(v);
                if path.len() > n {
                    return Err(corrupt());
                }
            }
            Some(k) => {
                if k >= n || k == u || k == v {
                    return Err(corrupt());
                }
                stack.push((k, v));
                stack.push((u, k));
            }
        }
    }
    Ok(path)
}

/// Sum of edge weights along `path` in the original matrix.
pub fn path_cost<T: Element>(d0: &DistanceMatrix<T>, path: &[usize]) -> Result<T> {
    let n = d0.n();
    if let Some(&v) = path.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange { vertex: v, n });
    }
    match path {
        [] => Ok(T::INFINITY),
        [_] => Ok(T::ZERO),
        _ => path.windows(2).try_fold(T::ZERO, |acc, hop| {
            let w = d0.get(hop[0], hop[1]);
            if w.is_infinite() {
                Err(Error::InvalidPath {
                    from: hop[0],
                    to: hop[1],
                })
            } else {
                Ok(acc + w)
            }
        }),
    }
}

/// True iff some vertex reaches itself at negative cost after closure.
pub fn has_negative_cycle<T: Element>(dstar: &DistanceMatrix<T>) -> bool {
    (0..dstar.n()).any(|i| dstar.get(i, i) < T::ZERO)
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn three() -> DistanceMatrix<f64> {
        DistanceMatrix::from_rows(&[
            vec![0.0, 5.0, 10.0],
            vec![INF, 0.0, 3.0],
            vec![INF, INF, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn edgeless_is_fixed_point() {
        let d = DistanceMatrix::<f32>::edgeless(6);
        let (out, p) = fw_classic(&d);
        assert!(out.bitwise_eq(&d));
        assert!(p.as_slice().iter().all(|&e| e == crate::matrix::NONE));
    }

    #[test]
    fn three_vertex_example() {
        let d = three();
        let (out, p) = fw_classic(&d);
        assert_eq!(out.get(0, 2), 8.0);
        assert_eq!(p.get(0, 2), Some(1));
        assert_eq!(p.get(0, 1), None);
        assert_eq!(reconstruct_path(&p, &out, 0, 2).unwrap(), vec![0, 1, 2]);
        assert_eq!(path_cost(&d, &[0, 1, 2]).unwrap(), 8.0);
        assert!(reconstruct_path(&p, &out, 2, 0).unwrap().is_empty());
        assert_eq!(reconstruct_path(&p, &out, 1, 1).unwrap(), vec![1]);
    }

    #[test]
    fn path_cost_edge_cases() {
        let d = three();
        assert_eq!(path_cost(&d, &[1]).unwrap(), 0.0);
        assert!(path_cost(&d, &[]).unwrap().is_infinite());
        assert!(matches!(
            path_cost(&d, &[2, 0]),
            Err(Error::InvalidPath { from: 2, to: 0 })
        ));
    }

    #[test]
    fn negative_cycle_detection() {
        let (out, _) = fw_classic(&three());
        assert!(!has_negative_cycle(&out));
        let (out, _) = fw_classic(&DistanceMatrix::<f64>::edgeless(4));
        assert!(!has_negative_cycle(&out));
        let two = DistanceMatrix::<f64>::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap();
        let (out, _) = fw_classic(&two);
        assert!(has_negative_cycle(&out));
    }

    #[test]
    fn corrupt_matrix_is_detected() {
        let (out, mut p) = fw_classic(&three());
        // 0 -> 2 via 1, and 0 -> 1 via 2: the expansion never terminates.
        p.set(0, 1, Some(2));
        p.set(1, 2, Some(0));
        assert!(matches!(
            reconstruct_path(&p, &out, 0, 2),
            Err(Error::CorruptPathMatrix { i: 0, j: 2 })
        ));
        let mut p = IntermediateMatrix::new(3);
        p.set(0, 2, Some(0));
        assert!(matches!(
            reconstruct_path(&p, &out, 0, 2),
            Err(Error::CorruptPathMatrix { .. })
        ));
    }
}
