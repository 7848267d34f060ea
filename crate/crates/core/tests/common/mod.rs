#![allow(dead_code)]

use blocked_fw::{DistanceMatrix, Element};

/// Single-source Bellman-Ford from every vertex. Assumes no negative cycle.
pub fn bellman_ford_all<T: Element>(d: &DistanceMatrix<T>) -> DistanceMatrix<T> {
    let n = d.n();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            let w = d.get(u, v);
            if u != v && !w.is_infinite() {
                edges.push((u, v, w));
            }
        }
    }
    let mut out = DistanceMatrix::edgeless(n);
    for s in 0..n {
        let mut dist = vec![T::INFINITY; n];
        dist[s] = T::ZERO;
        for _ in 0..n {
            let mut changed = false;
            for &(u, v, w) in &edges {
                if dist[u].is_infinite() {
                    continue;
                }
                let cand = dist[u] + w;
                if cand < dist[v] {
                    dist[v] = cand;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for (v, &x) in dist.iter().enumerate() {
            out.set(s, v, x);
        }
    }
    out
}

/// Divisors of `n` among the tile sizes used by the sweeps.
pub fn tile_sizes_for(n: usize) -> Vec<usize> {
    [8, 16, 32, 64, 128].into_iter().filter(|bs| n.is_multiple_of(*bs)).collect()
}
