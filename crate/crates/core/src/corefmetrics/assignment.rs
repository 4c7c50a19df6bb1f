//! Maximum-weight bipartite assignment (Kuhn–Munkres with potentials).

/// For a `rows × cols` weight matrix, returns `assign[i] = Some(j)` pairing
/// row `i` with column `j` so that the total weight is maximal. Every row
/// is matched when `rows ≤ cols`, every column otherwise.
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    if rows > cols {
        let t: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| weights[i][j]).collect()).collect();
        let back = max_weight_assignment(&t);
        let mut out = vec![None; rows];
        for (j, i) in back.into_iter().enumerate() {
            if let Some(i) = i {
                out[i] = Some(j);
            }
        }
        return out;
    }
    // minimize cost = -weight; 1-based arrays with a virtual column 0
    let (n, m) = (rows, cols);
    let cost = |i: usize, j: usize| -weights[i - 1][j - 1];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = Some(j - 1);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    fn total(w: &[Vec<f64>], a: &[Option<usize>]) -> f64 {
        a.iter().enumerate().filter_map(|(i, j)| j.map(|j| w[i][j])).sum()
    }

    fn brute(w: &[Vec<f64>]) -> f64 {
        fn go(w: &[Vec<f64>], i: usize, used: &mut Vec<bool>) -> f64 {
            if i == w.len() {
                return 0.0;
            }
            // a row may stay unmatched only when columns run out
            let mut best = if w.len() > w[0].len() { go(w, i + 1, used) } else { f64::NEG_INFINITY };
            for j in 0..w[0].len() {
                if !used[j] {
                    used[j] = true;
                    best = best.max(w[i][j] + go(w, i + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        go(w, 0, &mut vec![false; w[0].len()])
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = seeded(12);
        for _ in 0..300 {
            let r = rng.gen_range(1..6);
            let c = rng.gen_range(1..6);
            let w: Vec<Vec<f64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
            let a = max_weight_assignment(&w);
            assert!((total(&w, &a) - brute(&w)).abs() < 1e-12, "{w:?}");
            let mut cols: Vec<usize> = a.iter().flatten().copied().collect();
            let matched = cols.len();
            cols.sort_unstable();
            cols.dedup();
            assert_eq!((matched, cols.len()), (r.min(c), r.min(c)));
        }
    }

    #[test]
    fn empty() {
        assert!(max_weight_assignment(&[]).is_empty());
        assert_eq!(max_weight_assignment(&[vec![]]), vec![None]);
    }
}
