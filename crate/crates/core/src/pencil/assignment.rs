/// Maximum-weight perfect matching on a square weight matrix (Hungarian
/// method, O(n³)). Returns `assign` with row `i` matched to column
/// `assign[i]`.
pub(crate) fn max_weight_assignment(weights: &[Vec<f64>]) -> Vec<usize> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    // Minimise cost = -weight with the potentials formulation (1-based).
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = -weights[i0 - 1][j - 1] - u[i0] - v[j];
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
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// If `weights` is within `tol` of a permutation matrix, returns it.
pub(crate) fn near_permutation(weights: &[Vec<f64>], tol: f64) -> Option<Vec<usize>> {
    let n = weights.len();
    let mut assign = Vec::with_capacity(n);
    let mut taken = vec![false; n];
    for row in weights {
        let j = row.iter().position(|&w| w >= 1.0 - tol)?;
        if taken[j] {
            return None;
        }
        taken[j] = true;
        assign.push(j);
    }
    Some(assign)
}
