//! Optimal one-to-one assignment for comparing estimated and true frequencies.

/// Minimum-cost assignment of rows to columns for a rectangular cost matrix
/// with `rows <= cols`. Returns the column chosen for each row.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return vec![];
    }
    let m = cost[0].len();
    assert!(n <= m, "more rows than columns");
    // potentials and matching are 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=m {
        if owner[j] != 0 {
            out[owner[j] - 1] = j - 1;
        }
    }
    out
}

/// Assigns each true item a distinct estimate, minimizing the total distance.
/// Truths left over when there are fewer estimates get `None`.
pub fn match_indices<T>(truth: &[T], estimate: &[T], dist: impl Fn(&T, &T) -> f64) -> Vec<Option<usize>> {
    if estimate.is_empty() {
        return vec![None; truth.len()];
    }
    if truth.len() <= estimate.len() {
        let cost: Vec<Vec<f64>> = truth.iter().map(|t| estimate.iter().map(|e| dist(t, e)).collect()).collect();
        hungarian(&cost).into_iter().map(Some).collect()
    } else {
        let cost: Vec<Vec<f64>> = estimate.iter().map(|e| truth.iter().map(|t| dist(t, e)).collect()).collect();
        let mut out = vec![None; truth.len()];
        for (i, j) in hungarian(&cost).into_iter().enumerate() {
            out[j] = Some(i);
        }
        out
    }
}

/// Matched distances in the order of `truth`; unmatched truths get `f64::INFINITY`.
pub fn matched_errors<T>(truth: &[T], estimate: &[T], dist: impl Fn(&T, &T) -> f64) -> Vec<f64> {
    match_indices(truth, estimate, &dist)
        .into_iter()
        .zip(truth)
        .map(|(m, t)| m.map_or(f64::INFINITY, |j| dist(t, &estimate[j])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(cost: &[Vec<f64>]) -> f64 {
        fn go(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == cost.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..cost[0].len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[row][j] + go(cost, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        go(cost, 0, &mut vec![false; cost[0].len()])
    }

    #[test]
    fn matches_brute_force() {
        let mut seed = 7u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 1..6 {
            for extra in 0..2 {
                let cost: Vec<Vec<f64>> = (0..n).map(|_| (0..n + extra).map(|_| next()).collect()).collect();
                let assign = hungarian(&cost);
                let total: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
                assert!((total - brute(&cost)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn swapped_estimates() {
        let e = matched_errors(&[1.0, 5.0], &[5.1, 0.8], |a: &f64, b: &f64| (a - b).abs());
        assert!((e[0] - 0.2).abs() < 1e-12 && (e[1] - 0.1).abs() < 1e-12);
        let e = matched_errors(&[1.0, 5.0], &[4.0], |a: &f64, b: &f64| (a - b).abs());
        assert_eq!(e[0], f64::INFINITY);
        assert!((e[1] - 1.0).abs() < 1e-12);
    }
}
