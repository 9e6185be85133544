//! Maximum spanning arborescence (Chu-Liu/Edmonds) over a dense score
//! matrix. `scores[[h, d]]` is the weight of arc `h -> d`; entries equal to
//! `-inf` are treated as missing arcs.
//!
//! Greedy incoming arcs are picked with ties going to the lowest head index;
//! cycles are contracted and the contracted problem solved recursively,
//! with incoming arc scores adjusted by the cycle arc they replace.

use ndarray::Array2;

/// Heads of the maximum arborescence rooted at `root`; `result[root]` is
/// `None`. The score matrix must admit a spanning arborescence.
pub fn max_arborescence(scores: &Array2<f64>, root: usize) -> Vec<Option<usize>> {
    let n = scores.nrows();
    assert_eq!(n, scores.ncols(), "score matrix must be square");
    assert!(root < n, "root {root} out of range for {n} nodes");
    let mut s = scores.clone();
    for i in 0..n {
        s[[i, i]] = f64::NEG_INFINITY;
    }
    for h in 0..n {
        s[[h, root]] = f64::NEG_INFINITY;
    }
    let heads = solve(&s, root);
    heads
        .into_iter()
        .enumerate()
        .map(|(d, h)| if d == root { None } else { Some(h) })
        .collect()
}

fn greedy_heads(s: &Array2<f64>, root: usize) -> Vec<usize> {
    let n = s.nrows();
    (0..n)
        .map(|d| {
            if d == root {
                return root;
            }
            let mut best = usize::MAX;
            let mut best_score = f64::NEG_INFINITY;
            for h in 0..n {
                if h != d && s[[h, d]] > best_score {
                    best_score = s[[h, d]];
                    best = h;
                }
            }
            assert!(best != usize::MAX, "node {d} has no incoming arc");
            best
        })
        .collect()
}

fn find_cycle(heads: &[usize], root: usize) -> Option<Vec<usize>> {
    let n = heads.len();
    let mut state = vec![0u8; n];
    state[root] = 2;
    for start in 0..n {
        let mut path = Vec::new();
        let mut node = start;
        while state[node] == 0 {
            state[node] = 1;
            path.push(node);
            node = heads[node];
        }
        if state[node] == 1 {
            let pos = path.iter().position(|&p| p == node).expect("node on path");
            let mut cycle = path[pos..].to_vec();
            cycle.sort_unstable();
            return Some(cycle);
        }
        for p in path {
            state[p] = 2;
        }
    }
    None
}

/// Returns a head for every node (the root maps to itself).
fn solve(s: &Array2<f64>, root: usize) -> Vec<usize> {
    let n = s.nrows();
    let best = greedy_heads(s, root);
    let cycle = match find_cycle(&best, root) {
        None => return best,
        Some(c) => c,
    };

    let mut in_cycle = vec![false; n];
    for &v in &cycle {
        in_cycle[v] = true;
    }
    // Surviving nodes keep their relative order; the cycle becomes the last node.
    let outside: Vec<usize> = (0..n).filter(|&v| !in_cycle[v]).collect();
    let mut new_index = vec![usize::MAX; n];
    for (k, &v) in outside.iter().enumerate() {
        new_index[v] = k;
    }
    let c = outside.len();
    let m = c + 1;

    let mut sub = Array2::from_elem((m, m), f64::NEG_INFINITY);
    let mut enters = vec![usize::MAX; m];
    let mut leaves = vec![usize::MAX; m];
    for &u in &outside {
        for &v in &outside {
            sub[[new_index[u], new_index[v]]] = s[[u, v]];
        }
        for &v in &cycle {
            let into = s[[u, v]] - s[[best[v], v]];
            if into > sub[[new_index[u], c]] {
                sub[[new_index[u], c]] = into;
                enters[new_index[u]] = v;
            }
            let out = s[[v, u]];
            if out > sub[[c, new_index[u]]] {
                sub[[c, new_index[u]]] = out;
                leaves[new_index[u]] = v;
            }
        }
    }

    let sub_heads = solve(&sub, new_index[root]);

    let mut heads = best;
    for &u in &outside {
        if u == root {
            continue;
        }
        let h = sub_heads[new_index[u]];
        heads[u] = if h == c {
            leaves[new_index[u]]
        } else {
            outside[h]
        };
    }
    let entering_from = sub_heads[c];
    let entered = enters[entering_from];
    heads[entered] = outside[entering_from];
    heads
}
