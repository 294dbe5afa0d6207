//! Reference oracle for tiny transportation instances: exhaustive
//! enumeration of the basic feasible solutions (spanning trees of the
//! bipartite support graph). Independent of the simplex implementation;
//! intended for test supports up to roughly 5x5.

use crate::costs::CostMatrix;
use crate::scalar::Scalar;

/// Minimum transport cost by enumerating every spanning-tree vertex of the
/// transportation polytope. Returns `None` when no feasible plan through
/// the finite entries exists.
pub fn min_cost<S: Scalar>(cost: &CostMatrix<S>, mu_w: &[S], nu_w: &[S]) -> Option<S> {
    let m = cost.rows();
    let n = cost.cols();
    assert!(m * n <= 36, "oracle is for tiny instances only");
    let arcs: Vec<usize> = (0..m * n)
        .filter(|&a| cost.get(a / n, a % n).is_finite())
        .collect();
    let basis_size = m + n - 1;
    if arcs.len() < basis_size {
        // Fewer finite arcs than a spanning tree needs; fall back to the
        // degenerate cases (a 1x1 instance has basis size 1).
        if basis_size == 1 && !arcs.is_empty() {
            let a = arcs[0];
            return cost.get(a / n, a % n).finite().map(|c| c * mu_w[0]);
        }
        return None;
    }

    let mut best: Option<S> = None;
    let mut subset: Vec<usize> = (0..basis_size).collect();
    loop {
        let chosen: Vec<usize> = subset.iter().map(|&k| arcs[k]).collect();
        if let Some(value) = tree_cost(cost, mu_w, nu_w, &chosen) {
            best = match best {
                None => Some(value),
                Some(b) => Some(if value < b { value } else { b }),
            };
        }
        // Next lexicographic combination.
        let mut i = basis_size;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] != i + arcs.len() - basis_size {
                break;
            }
        }
        subset[i] += 1;
        for k in i + 1..basis_size {
            subset[k] = subset[k - 1] + 1;
        }
    }
}

/// Solve the flows on a candidate basis by leaf elimination; `None` if the
/// arcs do not span or the solved flows go negative.
fn tree_cost<S: Scalar>(
    cost: &CostMatrix<S>,
    mu_w: &[S],
    nu_w: &[S],
    chosen: &[usize],
) -> Option<S> {
    let m = cost.rows();
    let n = cost.cols();
    let nodes = m + n;
    let mut degree = vec![0usize; nodes];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for &a in chosen {
        let u = a / n;
        let v = m + a % n;
        degree[u] += 1;
        degree[v] += 1;
        incident[u].push(a);
        incident[v].push(a);
    }
    // Supplies positive on rows, negative on columns.
    let mut balance: Vec<S> = mu_w
        .iter()
        .copied()
        .chain(nu_w.iter().map(|&w| -w))
        .collect();
    let mut used = vec![false; chosen.len()];
    let arc_index: std::collections::HashMap<usize, usize> =
        chosen.iter().enumerate().map(|(k, &a)| (a, k)).collect();
    let mut flows: Vec<S> = vec![S::zero(); chosen.len()];

    let mut leaves: Vec<usize> = (0..nodes).filter(|&v| degree[v] == 1).collect();
    let mut processed = 0;
    while let Some(v) = leaves.pop() {
        let Some(&a) = incident[v].iter().find(|&&a| !used[arc_index[&a]]) else {
            continue;
        };
        let k = arc_index[&a];
        used[k] = true;
        processed += 1;
        let u = a / n;
        let w = m + a % n;
        let other = if u == v { w } else { u };
        // Flow on a row->col arc equals the row balance (or minus the col
        // balance) at the leaf end.
        let f = if v < m { balance[v] } else { -balance[v] };
        flows[k] = f;
        balance[v] = S::zero();
        if v < m {
            balance[other] = balance[other] + f;
        } else {
            balance[other] = balance[other] - f;
        }
        degree[v] = 0;
        degree[other] -= 1;
        if degree[other] == 1 {
            leaves.push(other);
        }
    }
    if processed != chosen.len() {
        return None; // contains a cycle or does not span
    }
    // Residual balances must vanish (spanning check for isolated nodes).
    let tol = S::from_f64_lossy(1e-9);
    if balance.iter().any(|b| b.abs() > tol) {
        return None;
    }
    let neg_tol = S::from_f64_lossy(-1e-12);
    if flows.iter().any(|&f| f < neg_tol) {
        return None;
    }
    let mut total = S::zero();
    for (&a, &f) in chosen.iter().zip(&flows) {
        let c = cost.get(a / n, a % n).finite()?;
        let f = if f > S::zero() { f } else { S::zero() };
        total = total + f * c;
    }
    Some(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::ExtCost;

    fn matrix(rows: usize, cols: usize, vals: &[f64]) -> CostMatrix<f64> {
        CostMatrix::from_entries(
            vals.iter()
                .map(|&v| {
                    if v.is_finite() {
                        ExtCost::Finite(v)
                    } else {
                        ExtCost::Infinite
                    }
                })
                .collect(),
            rows,
            cols,
        )
    }

    #[test]
    fn identity_instance() {
        let c = matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let v = min_cost(&c, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn single_cell() {
        let c = matrix(1, 1, &[4.0]);
        assert_eq!(min_cost(&c, &[1.0], &[1.0]).unwrap(), 4.0);
    }

    #[test]
    fn infeasible_when_all_infinite() {
        let inf = f64::INFINITY;
        let c = matrix(2, 2, &[inf, inf, inf, inf]);
        assert_eq!(min_cost(&c, &[0.5, 0.5], &[0.5, 0.5]), None);
    }

    #[test]
    fn hand_checked_three_by_two() {
        // Optimal: route 0.2 at cost 1, 0.3 at cost 0, 0.5 at cost 2.
        let c = matrix(3, 2, &[1.0, 8.0, 0.0, 9.0, 7.0, 2.0]);
        let v = min_cost(&c, &[0.2, 0.3, 0.5], &[0.5, 0.5]).unwrap();
        assert!((v - (0.2 * 1.0 + 0.3 * 0.0 + 0.5 * 2.0)).abs() < 1e-12);
    }
}
