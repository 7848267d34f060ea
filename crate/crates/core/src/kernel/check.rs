//! Differential tester: every tier against `Baseline` on random tiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{tile_relax, KernelTier, Operands};
use crate::element::Element;
use crate::matrix::NONE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperandPattern {
    Pivot,
    PivotRow,
    PivotCol,
    Independent,
}

impl OperandPattern {
    pub const ALL: [OperandPattern; 4] = [
        OperandPattern::Pivot,
        OperandPattern::PivotRow,
        OperandPattern::PivotCol,
        OperandPattern::Independent,
    ];
}

#[derive(Debug, Clone)]
pub struct VariantCheck {
    pub tier: KernelTier,
    pub bs: usize,
    pub cases: usize,
    pub seed: u64,
    /// Probability a generated cell is infinite.
    pub inf_fraction: f64,
    /// Fill tiles with zeros instead of random weights.
    pub zero_tiles: bool,
    pub patterns: Vec<OperandPattern>,
}

impl VariantCheck {
    pub fn new(tier: KernelTier, bs: usize, cases: usize) -> Self {
        VariantCheck {
            tier,
            bs,
            cases,
            seed: 0x5eed,
            inf_fraction: 0.3,
            zero_tiles: false,
            patterns: OperandPattern::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub case: usize,
    pub pattern: OperandPattern,
    pub with_paths: bool,
    pub cell: (usize, usize),
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantReport {
    pub tier: KernelTier,
    pub cases_run: usize,
    pub mismatch: Option<Mismatch>,
}

impl VariantReport {
    pub fn is_clean(&self) -> bool {
        self.mismatch.is_none()
    }
}

fn random_tile<T: Element>(rng: &mut ChaCha8Rng, cfg: &VariantCheck) -> Vec<T> {
    (0..cfg.bs * cfg.bs)
        .map(|_| {
            if cfg.zero_tiles {
                T::ZERO
            } else if rng.random_bool(cfg.inf_fraction) {
                T::INFINITY
            } else {
                T::from_f64(rng.random_range(0u32..=100) as f64)
            }
        })
        .collect()
}

fn run<T: Element>(
    tier: KernelTier,
    bs: usize,
    pattern: OperandPattern,
    c: &[T],
    a: &[T],
    b: &[T],
    paths: bool,
    k_base: u32,
) -> (Vec<T>, Vec<u32>) {
    let mut c = c.to_vec();
    let mut p = vec![NONE; bs * bs];
    let ops = match pattern {
        OperandPattern::Pivot => Operands::Pivot,
        OperandPattern::PivotRow => Operands::PivotRow { pivot: a },
        OperandPattern::PivotCol => Operands::PivotCol { pivot: b },
        OperandPattern::Independent => Operands::Independent { a, b },
    };
    tile_relax(tier, bs, &mut c, ops, paths.then_some(&mut p[..]), k_base);
    (c, p)
}

/// Runs `cfg.tier` and `Baseline` on the same random tiles for every operand
/// pattern, with and without the intermediate tile, and reports the first
/// disagreement.
pub fn tile_relax_variant_check<T: Element>(cfg: &VariantCheck) -> VariantReport {
    let bs = cfg.bs;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cases_run = 0;
    for case in 0..cfg.cases {
        let c: Vec<T> = random_tile(&mut rng, cfg);
        let a: Vec<T> = random_tile(&mut rng, cfg);
        let b: Vec<T> = random_tile(&mut rng, cfg);
        let k_base = rng.random_range(0u32..1 << 20);
        for &pattern in &cfg.patterns {
            for paths in [false, true] {
                let want = run(KernelTier::Baseline, bs, pattern, &c, &a, &b, paths, k_base);
                let got = run(cfg.tier, bs, pattern, &c, &a, &b, paths, k_base);
                let dist_diff = want
                    .0
                    .iter()
                    .zip(&got.0)
                    .position(|(x, y)| x.to_bits_u64() != y.to_bits_u64());
                let path_diff = want.1.iter().zip(&got.1).position(|(x, y)| x != y);
                let found = dist_diff
                    .map(|p| (p, format!("distance {} != baseline {}", got.0[p], want.0[p])))
                    .or_else(|| path_diff.map(|p| (p, format!("path {} != baseline {}", got.1[p], want.1[p]))));
                if let Some((pos, detail)) = found {
                    return VariantReport {
                        tier: cfg.tier,
                        cases_run: case + 1,
                        mismatch: Some(Mismatch {
                            case,
                            pattern,
                            with_paths: paths,
                            cell: (pos / bs, pos % bs),
                            detail,
                        }),
                    };
                }
            }
        }
        cases_run = case + 1;
    }
    VariantReport {
        tier: cfg.tier,
        cases_run,
        mismatch: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unrolled_thousand_tiles() {
        let mut cfg = VariantCheck::new(KernelTier::Unrolled, 32, 1000);
        cfg.patterns = vec![OperandPattern::Independent];
        let report = tile_relax_variant_check::<f32>(&cfg);
        assert!(report.is_clean(), "{report:?}");
        assert_eq!(report.cases_run, 1000);
    }

    #[test]
    fn zero_tiles_are_clean() {
        for tier in KernelTier::ALL {
            let mut cfg = VariantCheck::new(tier, 16, 3);
            cfg.zero_tiles = true;
            assert!(tile_relax_variant_check::<f64>(&cfg).is_clean());
        }
    }

    #[test]
    fn aliased_pivot_tiles_are_clean() {
        for tier in KernelTier::ALL {
            let mut cfg = VariantCheck::new(tier, 32, 50);
            cfg.patterns = vec![OperandPattern::Pivot, OperandPattern::PivotRow, OperandPattern::PivotCol];
            assert!(tile_relax_variant_check::<f32>(&cfg).is_clean(), "{tier}");
        }
    }
}
