//! Minimum-cost perfect assignment on a square matrix (Hungarian method,
//! shortest augmenting paths with potentials, O(n^3)).

/// Cost used for forbidden cells. Large enough to never be chosen when a
/// finite assignment exists, small enough not to overflow sums.
pub const FORBIDDEN: i64 = 1 << 40;

/// Returns `(total, assignment)` where `assignment[row] = col`.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0, Vec::new());
    }
    // 1-based arrays; column 0 is the virtual start.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=n {
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
            for j in 0..=n {
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
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
    }
    let total = (0..n).map(|i| cost[i][assignment[i]]).sum();
    (total, assignment)
}

/// Minimum cost of matching two lists where each item is either paired
/// (cost `sub(i, j)`) or left alone (cost `del(i)` / `ins(j)`).
pub fn min_cost_matching(
    n_left: usize,
    n_right: usize,
    sub: impl Fn(usize, usize) -> i64,
    del: impl Fn(usize) -> i64,
    ins: impl Fn(usize) -> i64,
) -> i64 {
    if n_left == 0 {
        return (0..n_right).map(ins).sum();
    }
    if n_right == 0 {
        return (0..n_left).map(del).sum();
    }
    let n = n_left + n_right;
    let mut cost = vec![vec![0i64; n]; n];
    for i in 0..n_left {
        for j in 0..n_right {
            cost[i][j] = sub(i, j);
        }
        for j in 0..n_left {
            cost[i][n_right + j] = if i == j { del(i) } else { FORBIDDEN };
        }
    }
    for i in 0..n_right {
        for j in 0..n_right {
            cost[n_left + i][j] = if i == j { ins(j) } else { FORBIDDEN };
        }
    }
    min_cost_assignment(&cost).0
}
