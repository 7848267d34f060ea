mod common;

use blocked_fw::matrix::TiledMatrix;
use blocked_fw::{
    fw_classic, generate_graph, path_cost, reconstruct_path, solve, DistanceMatrix, Element, GraphSpec,
    KernelTier, SolveConfig,
};
use proptest::prelude::*;

fn graph<T: Element>(n: usize, null_fraction: f64, seed: u64) -> DistanceMatrix<T> {
    let spec = GraphSpec {
        null_fraction,
        ..GraphSpec::new(n, seed)
    };
    generate_graph(&spec).unwrap()
}

/// Random real (non-integer) weights, so sums round.
fn real_graph(n: usize, seed: u64) -> DistanceMatrix<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut d = DistanceMatrix::<f64>::edgeless(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(0.7) {
                d.set(i, j, rng.random_range(0.01..10.0));
            }
        }
    }
    d
}

#[test]
fn classic_matches_bellman_ford_with_negative_edges() {
    // forward edges only may be negative: a DAG has no cycles at all
    let n = 40;
    let mut d = graph::<f64>(n, 0.5, 3);
    for i in 0..n {
        for j in 0..i {
            d.set(i, j, f64::INFINITY);
        }
        if i + 1 < n {
            d.set(i, i + 1, -3.0);
        }
    }
    let (fw, _) = fw_classic(&d);
    assert!(fw.bitwise_eq(&common::bellman_ford_all(&d)));
}

#[test]
fn real_weights_agree_within_tolerance() {
    let d = real_graph(96, 8);
    let (want, _) = fw_classic(&d);
    for bs in [8, 16, 32, 96] {
        let sol = solve(&d, &SolveConfig::new(bs, 3).with_paths(true)).unwrap();
        let p = sol.paths.as_ref().unwrap();
        for i in 0..96 {
            for j in 0..96 {
                let (a, b) = (sol.distances.get(i, j), want.get(i, j));
                assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0), "bs={bs} ({i}, {j}) {a} vs {b}");
                let path = reconstruct_path(p, &sol.distances, i, j).unwrap();
                let cost = path_cost(&d, &path).unwrap();
                assert!((cost - a).abs() <= 1e-6 * a.abs().max(1.0), "path ({i}, {j})");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closure_satisfies_triangle_inequality(n in 1usize..24, nf in 0.0f64..0.9, seed in any::<u64>()) {
        let (dstar, _) = fw_classic(&graph::<f32>(n, nf, seed));
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    prop_assert!(dstar.get(i, j) <= dstar.get(i, k) + dstar.get(k, j));
                }
            }
        }
    }

    #[test]
    fn closure_is_idempotent(r in 1usize..5, bs in prop::sample::select(vec![8usize, 16]), seed in any::<u64>()) {
        let d = graph::<f64>(r * bs, 0.5, seed);
        let cfg = SolveConfig::new(bs, 2);
        let once = solve(&d, &cfg).unwrap().distances;
        let twice = solve(&once, &cfg).unwrap().distances;
        prop_assert!(once.bitwise_eq(&twice));
    }

    #[test]
    fn paths_realise_distances(n in 1usize..40, nf in 0.0f64..0.95, seed in any::<u64>()) {
        let d = graph::<f32>(n, nf, seed);
        let (dstar, p) = fw_classic(&d);
        for i in 0..n {
            for j in 0..n {
                let path = reconstruct_path(&p, &dstar, i, j).unwrap();
                if dstar.get(i, j).is_infinite() {
                    prop_assert!(path.is_empty());
                    continue;
                }
                prop_assert_eq!(path.first(), Some(&i));
                prop_assert_eq!(path.last(), Some(&j));
                prop_assert!(path.len() <= n);
                prop_assert_eq!(path_cost(&d, &path).unwrap().to_bits(), dstar.get(i, j).to_bits());
            }
        }
    }

    #[test]
    fn every_tier_and_tile_size_matches_classic(
        r in 1usize..4,
        bs in prop::sample::select(vec![8usize, 16, 32, 64, 128]),
        tier in prop::sample::select(KernelTier::ALL.to_vec()),
        wide in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let n = r * bs;
        if wide {
            let d = graph::<f64>(n, 0.4, seed);
            let got = solve(&d, &SolveConfig::new(bs, 2).with_tier(tier)).unwrap();
            prop_assert!(got.distances.bitwise_eq(&fw_classic(&d).0));
        } else {
            let d = graph::<f32>(n, 0.4, seed);
            let got = solve(&d, &SolveConfig::new(bs, 2).with_tier(tier)).unwrap();
            prop_assert!(got.distances.bitwise_eq(&fw_classic(&d).0));
        }
    }

    #[test]
    fn tiled_layout_is_a_bijection(r in 1usize..6, bs in 1usize..20, seed in any::<u64>()) {
        let n = r * bs;
        let d = graph::<f32>(n, 0.3, seed);
        let t = TiledMatrix::to_tiled(&d, bs).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(t.get(i, j).to_bits(), d.get(i, j).to_bits());
                let tile = t.tile(i / bs, j / bs);
                prop_assert_eq!(tile[(i % bs) * bs + j % bs].to_bits(), d.get(i, j).to_bits());
            }
        }
        prop_assert!(t.from_tiled().bitwise_eq(&d));
    }
}
