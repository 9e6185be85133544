//! Brute-force oracles and random fixtures shared by the integration tests.
//! Everything here is deliberately naive and independent of the library's
//! own algorithms.
#![allow(dead_code)]

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use treeprobe::corpus::AspectSpan;
use treeprobe::{DepTree, ImpactMatrix, TreeSource};

pub type Rng = Xoshiro256PlusPlus;

pub fn rng(seed: u64) -> Rng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Non-negative random matrix with a zero diagonal.
pub fn random_matrix(rng: &mut Rng, n: usize) -> ImpactMatrix {
    let values = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            0.0
        } else {
            rng.random_range(0.0..1.0)
        }
    });
    ImpactMatrix {
        sample_id: "rand".into(),
        layer: 0,
        words: (0..n).map(|i| format!("w{i}")).collect(),
        values,
    }
}

/// Uniformly shuffled attachment order; each word hangs off an earlier one.
pub fn random_heads(rng: &mut Rng, n: usize) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut heads = vec![None; n];
    for k in 1..n {
        heads[order[k]] = Some(order[rng.random_range(0..k)]);
    }
    heads
}

pub fn random_tree(rng: &mut Rng, n: usize) -> DepTree {
    DepTree::new(random_heads(rng, n), TreeSource::Induced).unwrap()
}

pub fn random_aspect(rng: &mut Rng, n: usize) -> AspectSpan {
    let start = rng.random_range(0..n);
    let end = rng.random_range(start + 1..=n.min(start + 3));
    AspectSpan::new(start, end)
}

/// True when following heads from every word reaches the single root.
fn is_tree(heads: &[Option<usize>]) -> bool {
    if heads.iter().filter(|h| h.is_none()).count() != 1 {
        return false;
    }
    (0..heads.len()).all(|start| {
        let mut node = start;
        for _ in 0..=heads.len() {
            match heads[node] {
                None => return true,
                Some(h) => node = h,
            }
        }
        false
    })
}

/// Every rooted spanning arborescence over `n` words, by exhaustive
/// enumeration of head assignments.
pub fn all_trees(n: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = Vec::new();
    let total = (n + 1).pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let heads: Vec<Option<usize>> = (0..n)
            .map(|_| {
                let digit = c % (n + 1);
                c /= n + 1;
                (digit < n).then_some(digit)
            })
            .collect();
        if heads.iter().enumerate().any(|(d, h)| *h == Some(d)) {
            continue;
        }
        if is_tree(&heads) {
            out.push(heads);
        }
    }
    out
}

/// Arcs `(h, d)` cross when exactly one endpoint of one lies strictly inside
/// the other. The root's arc spans from just before the sentence.
pub fn is_projective(heads: &[Option<usize>]) -> bool {
    let span = |d: usize| -> (isize, isize) {
        let h = heads[d].map_or(-1, |h| h as isize);
        let d = d as isize;
        (h.min(d), h.max(d))
    };
    let n = heads.len();
    for a in 0..n {
        for b in 0..n {
            let (l1, r1) = span(a);
            let (l2, r2) = span(b);
            if l1 < l2 && l2 < r1 && r1 < r2 {
                return false;
            }
        }
    }
    true
}

/// Tree weight when arc `h -> d` scores `m[d][h]`, summed in dependent order.
pub fn weight(m: &ImpactMatrix, heads: &[Option<usize>]) -> f64 {
    heads
        .iter()
        .enumerate()
        .filter_map(|(d, h)| h.map(|h| m.values[[d, h]]))
        .sum()
}

pub fn brute_max(
    m: &ImpactMatrix,
    trees: &[Vec<Option<usize>>],
    keep: impl Fn(&[Option<usize>]) -> bool,
) -> f64 {
    trees
        .iter()
        .filter(|t| keep(t))
        .map(|t| weight(m, t))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// All-pairs undirected distances.
pub fn floyd_warshall(heads: &[Option<usize>]) -> Vec<Vec<usize>> {
    let n = heads.len();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        if let Some(h) = heads[i] {
            d[i][h] = 1;
            d[h][i] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Mean over aspect words and lexicon positions of the path length,
/// computed from the all-pairs table.
pub fn manual_sample_asd(
    heads: &[Option<usize>],
    aspect: AspectSpan,
    opinions: &[usize],
) -> Option<f64> {
    if opinions.is_empty() {
        return None;
    }
    let d = floyd_warshall(heads);
    let mut total = 0.0;
    for w in aspect.range() {
        for &c in opinions {
            total += d[w][c] as f64;
        }
    }
    Some(total / (aspect.len() * opinions.len()) as f64)
}
