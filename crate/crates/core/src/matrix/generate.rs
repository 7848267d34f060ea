use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DistanceMatrix;
use crate::element::Element;
use crate::error::{Error, Result};

/// Parameters of a random dense graph.
///
/// Weights are drawn as integers, uniformly from `weight_min..=weight_max`, so
/// every path sum is exact in both element kinds for the sizes used here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    /// Probability that an ordered pair `(i, j)`, `i != j`, has no edge.
    pub null_fraction: f64,
    pub weight_min: u32,
    pub weight_max: u32,
    pub seed: u64,
}

impl GraphSpec {
    pub const DEFAULT_NULL_FRACTION: f64 = 0.30;
    pub const DEFAULT_WEIGHT_MIN: u32 = 1;
    pub const DEFAULT_WEIGHT_MAX: u32 = 100;

    pub fn new(n: usize, seed: u64) -> Self {
        GraphSpec {
            n,
            null_fraction: Self::DEFAULT_NULL_FRACTION,
            weight_min: Self::DEFAULT_WEIGHT_MIN,
            weight_max: Self::DEFAULT_WEIGHT_MAX,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec {
                field: "n",
                reason: "must be at least 1".into(),
            });
        }
        if !(0.0..=1.0).contains(&self.null_fraction) {
            return Err(Error::InvalidSpec {
                field: "null_fraction",
                reason: format!("{} is outside [0, 1]", self.null_fraction),
            });
        }
        if self.weight_min > self.weight_max {
            return Err(Error::InvalidSpec {
                field: "weight_min",
                reason: format!(
                    "weight_min {} exceeds weight_max {}",
                    self.weight_min, self.weight_max
                ),
            });
        }
        Ok(())
    }
}

/// Draws a random dense graph. The stream comes from ChaCha8 seeded with
/// `spec.seed`, visiting off-diagonal cells in row-major order; each cell
/// consumes one Bernoulli draw and, when it holds an edge, one weight draw.
pub fn generate_graph<T: Element>(spec: &GraphSpec) -> Result<DistanceMatrix<T>> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut m = DistanceMatrix::<T>::edgeless(n);
    let data = m.as_mut_slice();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if rng.random_bool(spec.null_fraction) {
                continue;
            }
            let w = rng.random_range(spec.weight_min..=spec.weight_max);
            data[i * n + j] = T::from_f64(w as f64);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_null() {
        let spec = GraphSpec {
            null_fraction: 1.0,
            ..GraphSpec::new(4, 99)
        };
        let m = generate_graph::<f32>(&spec).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    assert_eq!(m.get(i, j), 0.0);
                } else {
                    assert!(m.get(i, j).is_infinite());
                }
            }
        }
    }

    #[test]
    fn degenerate_weight_range() {
        let spec = GraphSpec {
            null_fraction: 0.0,
            weight_min: 1,
            weight_max: 1,
            ..GraphSpec::new(4, 7)
        };
        let m = generate_graph::<f64>(&spec).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.get(i, j), if i == j { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn null_fraction_concentrates() {
        let m = generate_graph::<f32>(&GraphSpec::new(1024, 42)).unwrap();
        let frac = m.infinite_fraction();
        assert!((frac - 0.30).abs() <= 0.02, "fraction {frac}");
    }

    #[test]
    fn deterministic_and_in_range() {
        let spec = GraphSpec::new(50, 5);
        let a = generate_graph::<f64>(&spec).unwrap();
        let b = generate_graph::<f64>(&spec).unwrap();
        assert!(a.bitwise_eq(&b));
        for &v in a.as_slice() {
            assert!(v.is_infinite() || (0.0..=100.0).contains(&v));
        }
        let c = generate_graph::<f64>(&GraphSpec::new(50, 6)).unwrap();
        assert!(!a.bitwise_eq(&c));
    }

    #[test]
    fn validation_names_field() {
        let bad = GraphSpec {
            null_fraction: 1.5,
            ..GraphSpec::new(4, 0)
        };
        match generate_graph::<f32>(&bad) {
            Err(Error::InvalidSpec { field, .. }) => assert_eq!(field, "null_fraction"),
            other => panic!("unexpected {other:?}"),
        }
        let bad = GraphSpec {
            weight_min: 5,
            weight_max: 2,
            ..GraphSpec::new(4, 0)
        };
        assert!(matches!(
            generate_graph::<f32>(&bad),
            Err(Error::InvalidSpec { field: "weight_min", .. })
        ));
        assert!(matches!(
            generate_graph::<f32>(&GraphSpec::new(0, 0)),
            Err(Error::InvalidSpec { field: "n", .. })
        ));
    }
}
