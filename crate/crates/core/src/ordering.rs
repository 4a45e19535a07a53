//! Greedy minimum-degree ordering on an explicit elimination graph.

use crate::sparse::SparseMatrix;

/// Returns `perm` with `perm[new] = old`. Only the pattern of `m` is used;
/// lower or general storage both work since edges are symmetrized.
pub fn minimum_degree(m: &SparseMatrix) -> Vec<usize> {
    let n = m.ncols();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in m.triplets() {
        if i != j && i < n {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let mut alive = vec![true; n];
    let mut perm = Vec::with_capacity(n);
    let mut merged = Vec::new();
    for _ in 0..n {
        let v = (0..n).filter(|&v| alive[v]).min_by_key(|&v| (adj[v].len(), v)).expect("vertex left");
        alive[v] = false;
        perm.push(v);
        let nbrs = std::mem::take(&mut adj[v]);
        for &u in &nbrs {
            merged.clear();
            let (a, b) = (&adj[u], &nbrs);
            let (mut p, mut q) = (0, 0);
            while p < a.len() || q < b.len() {
                let next = match (a.get(p), b.get(q)) {
                    (Some(&x), Some(&y)) if x == y => {
                        p += 1;
                        q += 1;
                        x
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        p += 1;
                        x
                    }
                    (Some(&x), None) => {
                        p += 1;
                        x
                    }
                    (_, Some(&y)) => {
                        q += 1;
                        y
                    }
                    (None, None) => unreachable!(),
                };
                if next != u && next != v {
                    merged.push(next);
                }
            }
            adj[u].clone_from(&merged);
        }
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrow_matrix_eliminates_hub_last() {
        // hub at 0 connected to all others; eliminating it early would fill everything
        let mut t = vec![];
        for i in 0..6 {
            t.push((i, i, 4.0));
            if i > 0 {
                t.push((i, 0, 1.0));
            }
        }
        let m = SparseMatrix::symmetric_from_triplets(6, &t).unwrap();
        let p = minimum_degree(&m);
        assert!(p.iter().position(|&v| v == 0).unwrap() >= 4);
        let mut s = p.clone();
        s.sort();
        assert_eq!(s, (0..6).collect::<Vec<_>>());
    }
}
