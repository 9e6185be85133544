//! Input generators shared by the benchmarks.

use ndarray::Array2;
use rand::{RngExt, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use treeprobe::ImpactMatrix;

/// Seeded random impact matrix with a zero diagonal.
pub fn random_matrix(n: usize, seed: u64) -> ImpactMatrix {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let values = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            0.0
        } else {
            rng.random_range(0.0..1.0)
        }
    });
    ImpactMatrix {
        sample_id: format!("bench-{n}"),
        layer: 0,
        words: (0..n).map(|i| format!("w{i}")).collect(),
        values,
    }
}

/// A sentence of `n` words drawn from a small vocabulary.
pub fn sentence(n: usize) -> Vec<String> {
    const WORDS: [&str; 8] = ["the", "food", "was", "great", "but", "service", "slow", "."];
    (0..n)
        .map(|i| WORDS[(i * 5 + 3) % WORDS.len()].to_owned())
        .collect()
}
