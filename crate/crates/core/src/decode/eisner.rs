//! Eisner's O(n^3) projective decoder with a single external root
//! attachment. Ties prefer the smaller split point and the smaller root
//! index.

use ndarray::Array2;

#[derive(Clone, Copy)]
enum Item {
    /// Complete span `[i, j]` headed at `i`.
    CompleteRight,
    /// Complete span `[i, j]` headed at `j`.
    CompleteLeft,
    /// Arc `i -> j` with everything between attached.
    IncompleteRight,
    /// Arc `j -> i` with everything between attached.
    IncompleteLeft,
}

struct Chart {
    n: usize,
    score: [Vec<f64>; 4],
    split: [Vec<usize>; 4],
}

impl Chart {
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    fn get(&self, item: Item, i: usize, j: usize) -> f64 {
        self.score[item as usize][self.idx(i, j)]
    }

    fn set(&mut self, item: Item, i: usize, j: usize, value: f64, k: usize) {
        let at = self.idx(i, j);
        self.score[item as usize][at] = value;
        self.split[item as usize][at] = k;
    }

    fn split(&self, item: Item, i: usize, j: usize) -> usize {
        self.split[item as usize][self.idx(i, j)]
    }
}

/// Heads of the best projective tree; the root word gets `None`.
pub fn projective_heads(scores: &Array2<f64>) -> Vec<Option<usize>> {
    let n = scores.nrows();
    assert_eq!(n, scores.ncols(), "score matrix must be square");
    assert!(n > 0, "empty score matrix");

    let cells = n * n;
    let mut chart = Chart {
        n,
        score: std::array::from_fn(|_| vec![f64::NEG_INFINITY; cells]),
        split: std::array::from_fn(|_| vec![0; cells]),
    };
    for i in 0..n {
        chart.set(Item::CompleteRight, i, i, 0.0, i);
        chart.set(Item::CompleteLeft, i, i, 0.0, i);
    }

    for width in 1..n {
        for i in 0..n - width {
            let j = i + width;

            let (mut best, mut best_k) = (f64::NEG_INFINITY, i);
            for k in i..j {
                let v =
                    chart.get(Item::CompleteRight, i, k) + chart.get(Item::CompleteLeft, k + 1, j);
                if v > best {
                    best = v;
                    best_k = k;
                }
            }
            chart.set(Item::IncompleteRight, i, j, best + scores[[i, j]], best_k);
            chart.set(Item::IncompleteLeft, i, j, best + scores[[j, i]], best_k);

            let (mut best, mut best_k) = (f64::NEG_INFINITY, i);
            for k in i..j {
                let v = chart.get(Item::CompleteLeft, i, k) + chart.get(Item::IncompleteLeft, k, j);
                if v > best {
                    best = v;
                    best_k = k;
                }
            }
            chart.set(Item::CompleteLeft, i, j, best, best_k);

            let (mut best, mut best_k) = (f64::NEG_INFINITY, j);
            for k in i + 1..=j {
                let v =
                    chart.get(Item::IncompleteRight, i, k) + chart.get(Item::CompleteRight, k, j);
                if v > best {
                    best = v;
                    best_k = k;
                }
            }
            chart.set(Item::CompleteRight, i, j, best, best_k);
        }
    }

    let (mut best, mut root) = (f64::NEG_INFINITY, 0);
    for r in 0..n {
        let v = chart.get(Item::CompleteLeft, 0, r) + chart.get(Item::CompleteRight, r, n - 1);
        if v > best {
            best = v;
            root = r;
        }
    }

    let mut heads = vec![None; n];
    backtrack(&chart, Item::CompleteLeft, 0, root, &mut heads);
    backtrack(&chart, Item::CompleteRight, root, n - 1, &mut heads);
    heads
}

fn backtrack(chart: &Chart, item: Item, i: usize, j: usize, heads: &mut [Option<usize>]) {
    if i == j {
        return;
    }
    let k = chart.split(item, i, j);
    match item {
        Item::CompleteRight => {
            backtrack(chart, Item::IncompleteRight, i, k, heads);
            backtrack(chart, Item::CompleteRight, k, j, heads);
        }
        Item::CompleteLeft => {
            backtrack(chart, Item::CompleteLeft, i, k, heads);
            backtrack(chart, Item::IncompleteLeft, k, j, heads);
        }
        Item::IncompleteRight => {
            heads[j] = Some(i);
            backtrack(chart, Item::CompleteRight, i, k, heads);
            backtrack(chart, Item::CompleteLeft, k + 1, j, heads);
        }
        Item::IncompleteLeft => {
            heads[i] = Some(j);
            backtrack(chart, Item::CompleteRight, i, k, heads);
            backtrack(chart, Item::CompleteLeft, k + 1, j, heads);
        }
    }
}
