//! Log-domain Sinkhorn iterations with epsilon-scaling warm starts.
//!
//! Potentials update through log-sum-exp, so small regularization stays
//! numerically stable; infinite cost entries are excluded from the kernel
//! support entirely. After a column update the column marginals hold
//! exactly, which also makes the returned potentials dual-feasible:
//! every plan entry is at most a weight `<= 1`, hence
//! `f_i + g_j - c_ij = eps * log P_ij <= 0`.

use crate::costs::CostMatrix;
use crate::scalar::Scalar;

use super::{
    validate_inputs, DualSolution, SolveError, SolveOutcome, SolveReport, SolveStatus, Solution,
    TransportPlan,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornParams<S: Scalar> {
    pub epsilon: S,
    pub max_iter: usize,
    pub tol: S,
}

impl<S: Scalar> SinkhornParams<S> {
    pub fn new(epsilon: S) -> Self {
        Self {
            epsilon,
            max_iter: 20_000,
            tol: S::from_f64_lossy(1e-9),
        }
    }
}

/// Entropically regularized transport: marginal violation is driven below
/// `params.tol` or the iteration budget runs out (`status: MaxIter`).
pub fn solve_sinkhorn<S: Scalar>(
    cost: &CostMatrix<S>,
    mu_w: &[S],
    nu_w: &[S],
    params: &SinkhornParams<S>,
) -> Result<SolveOutcome<S>, SolveError> {
    validate_inputs(cost, mu_w, nu_w)?;
    if !(params.epsilon > S::zero()) || !params.epsilon.is_finite() {
        return Err(SolveError::BadEpsilon);
    }
    let m = cost.rows();
    let n = cost.cols();

    // A positive-mass row or column with no finite entry cannot be coupled.
    for (i, &w) in mu_w.iter().enumerate() {
        if w > S::zero() && (0..n).all(|j| cost.get(i, j).is_infinite()) {
            return Ok(SolveOutcome::Infeasible);
        }
    }
    for (j, &w) in nu_w.iter().enumerate() {
        if w > S::zero() && (0..m).all(|i| cost.get(i, j).is_infinite()) {
            return Ok(SolveOutcome::Infeasible);
        }
    }

    let log_mu: Vec<S> = mu_w
        .iter()
        .map(|&w| if w > S::zero() { w.ln() } else { S::neg_infinity() })
        .collect();
    let log_nu: Vec<S> = nu_w
        .iter()
        .map(|&w| if w > S::zero() { w.ln() } else { S::neg_infinity() })
        .collect();

    let mut f = vec![S::zero(); m];
    let mut g = vec![S::zero(); n];

    // Epsilon scaling: start at the cost scale and shrink toward the
    // target, warm-starting the potentials at every stage.
    let target = params.epsilon;
    let mut stages = Vec::new();
    let mut e = match cost.max_finite() {
        Some(c) if c > target => c,
        _ => target,
    };
    while e > target {
        stages.push(e);
        e = e / S::from_f64_lossy(4.0);
    }
    stages.push(target);

    let warm_budget = 200usize;
    let mut iterations = 0usize;
    let mut converged = false;

    let lse_row = |g: &[S], i: usize, eps: S| -> S {
        let mut mx = S::neg_infinity();
        for j in 0..n {
            if let Some(c) = cost.get(i, j).finite() {
                let v = (g[j] - c) / eps;
                if v > mx {
                    mx = v;
                }
            }
        }
        if !mx.is_finite() {
            return mx;
        }
        let mut sum = S::zero();
        for j in 0..n {
            if let Some(c) = cost.get(i, j).finite() {
                sum = sum + ((g[j] - c) / eps - mx).exp();
            }
        }
        mx + sum.ln()
    };
    let lse_col = |f: &[S], j: usize, eps: S| -> S {
        let mut mx = S::neg_infinity();
        for i in 0..m {
            if let Some(c) = cost.get(i, j).finite() {
                let v = (f[i] - c) / eps;
                if v > mx {
                    mx = v;
                }
            }
        }
        if !mx.is_finite() {
            return mx;
        }
        let mut sum = S::zero();
        for i in 0..m {
            if let Some(c) = cost.get(i, j).finite() {
                sum = sum + ((f[i] - c) / eps - mx).exp();
            }
        }
        mx + sum.ln()
    };

    let row_error = |f: &[S], g: &[S], eps: S| -> S {
        let mut worst = S::zero();
        for i in 0..m {
            let mut sum = S::zero();
            for j in 0..n {
                if let Some(c) = cost.get(i, j).finite() {
                    let lp = (f[i] + g[j] - c) / eps;
                    sum = sum + lp.exp();
                }
            }
            let dev = (sum - mu_w[i]).abs();
            if dev > worst {
                worst = dev;
            }
        }
        worst
    };

    'stages: for (s, &eps) in stages.iter().enumerate() {
        let last = s + 1 == stages.len();
        let budget = if last {
            params.max_iter.saturating_sub(iterations).max(1)
        } else {
            warm_budget
        };
        for _ in 0..budget {
            iterations += 1;
            for i in 0..m {
                f[i] = if log_mu[i].is_finite() {
                    eps * (log_mu[i] - lse_row(&g, i, eps))
                } else {
                    S::neg_infinity()
                };
            }
            for j in 0..n {
                g[j] = if log_nu[j].is_finite() {
                    eps * (log_nu[j] - lse_col(&f, j, eps))
                } else {
                    S::neg_infinity()
                };
            }
            if iterations % 5 == 0 || last {
                let err = row_error(&f, &g, eps);
                if err <= params.tol {
                    if last {
                        converged = true;
                        break 'stages;
                    }
                    break;
                }
            }
            if iterations >= params.max_iter {
                break 'stages;
            }
        }
    }

    let eps = target;
    let mut coupling = vec![S::zero(); m * n];
    let mut primal = S::zero();
    for i in 0..m {
        for j in 0..n {
            if let Some(c) = cost.get(i, j).finite() {
                let lp = (f[i] + g[j] - c) / eps;
                let p = lp.exp();
                coupling[i * n + j] = p;
                primal = primal + p * c;
            }
        }
    }
    let plan = TransportPlan::new(coupling, m, n, mu_w.to_vec(), nu_w.to_vec());
    let mut dual_obj = S::zero();
    for (v, &w) in f.iter().zip(mu_w) {
        if w > S::zero() {
            dual_obj = dual_obj + *v * w;
        }
    }
    for (v, &w) in g.iter().zip(nu_w) {
        if w > S::zero() {
            dual_obj = dual_obj + *v * w;
        }
    }

    let status = if converged {
        SolveStatus::Optimal
    } else {
        SolveStatus::MaxIter
    };
    Ok(SolveOutcome::Solved(Solution {
        plan,
        dual: DualSolution {
            phi: f,
            psi: g,
            objective: dual_obj,
        },
        report: SolveReport {
            primal,
            dual: dual_obj,
            gap: primal - dual_obj,
            iterations,
            status,
        },
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::ExtCost;
    use crate::solver::solve_exact;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

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
    fn one_by_one_converges_immediately() {
        let c = matrix(1, 1, &[2.0]);
        let sol = solve_sinkhorn(&c, &[1.0], &[1.0], &SinkhornParams::new(0.5))
            .unwrap()
            .expect_solved("1x1");
        assert!((sol.plan.get(0, 0) - 1.0).abs() < 1e-9);
        assert_eq!(sol.report.status, SolveStatus::Optimal);
        assert!((sol.report.primal - 2.0).abs() < 1e-8);
    }

    #[test]
    fn small_epsilon_approaches_exact_cost() {
        let c = matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let w = [0.5, 0.5];
        let exact = solve_exact(&c, &w, &w).unwrap().expect_solved("exact");
        let params = SinkhornParams::new(1e-3);
        let ent = solve_sinkhorn(&c, &w, &w, &params)
            .unwrap()
            .expect_solved("sinkhorn");
        assert!(
            (ent.report.primal - exact.report.primal).abs()
                <= 0.02 * (1.0 + exact.report.primal)
        );
        assert!(ent.plan.max_marginal_violation() <= 1e-8);
    }

    #[test]
    fn symmetric_instance_gives_symmetric_potentials() {
        // C symmetric and mu = nu: the two potentials agree up to a shift.
        let c = matrix(3, 3, &[0.0, 1.0, 4.0, 1.0, 0.0, 1.0, 4.0, 1.0, 0.0]);
        let w = [0.3, 0.4, 0.3];
        let params = SinkhornParams {
            epsilon: 0.1,
            max_iter: 300_000,
            tol: 1e-10,
        };
        let sol = solve_sinkhorn(&c, &w, &w, &params)
            .unwrap()
            .expect_solved("symmetric");
        let shift = sol.dual.phi[0] - sol.dual.psi[0];
        for (p, q) in sol.dual.phi.iter().zip(&sol.dual.psi) {
            assert!((p - q - shift).abs() < 1e-6, "phi {p} psi {q} shift {shift}");
        }
    }

    #[test]
    fn infinite_row_is_infeasible() {
        let inf = f64::INFINITY;
        let c = matrix(2, 2, &[inf, inf, 1.0, 1.0]);
        let out = solve_sinkhorn(&c, &[0.5, 0.5], &[0.5, 0.5], &SinkhornParams::new(0.1)).unwrap();
        assert!(out.is_infeasible());
    }

    #[test]
    fn forbidden_entries_carry_no_mass() {
        let inf = f64::INFINITY;
        let c = matrix(2, 2, &[inf, 1.0, 2.0, inf]);
        let sol = solve_sinkhorn(&c, &[0.5, 0.5], &[0.5, 0.5], &SinkhornParams::new(0.05))
            .unwrap()
            .expect_solved("masked");
        assert_eq!(sol.plan.get(0, 0), 0.0);
        assert_eq!(sol.plan.get(1, 1), 0.0);
        assert!((sol.report.primal - 1.5).abs() < 0.05);
    }

    #[test]
    fn potentials_stay_dual_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let m = rng.gen_range(2..=8);
            let n = rng.gen_range(2..=8);
            let entries: Vec<f64> = (0..m * n).map(|_| rng.gen_range(0.0..3.0)).collect();
            let c = matrix(m, n, &entries);
            let mu = vec![1.0 / m as f64; m];
            let nu = vec![1.0 / n as f64; n];
            let sol = solve_sinkhorn(&c, &mu, &nu, &SinkhornParams::new(0.01))
                .unwrap()
                .expect_solved("feasible");
            assert!(sol.dual.max_feasibility_violation(&c) <= 1e-9);
            // Weak duality against the exact optimum.
            let exact = solve_exact(&c, &mu, &nu).unwrap().expect_solved("exact");
            assert!(sol.dual.objective <= exact.report.primal + 1e-8);
        }
    }

    #[test]
    fn cost_nonincreasing_as_epsilon_decreases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = 6;
        let n = 6;
        let entries: Vec<f64> = (0..m * n).map(|_| rng.gen_range(0.1..4.0)).collect();
        let c = matrix(m, n, &entries);
        let mu = vec![1.0 / m as f64; m];
        let nu = vec![1.0 / n as f64; n];
        let max_c = c.max_finite().unwrap();
        let mut prev = f64::INFINITY;
        for factor in [1.0, 0.1, 0.01] {
            let params = SinkhornParams {
                epsilon: factor * max_c,
                max_iter: 50_000,
                tol: 1e-10,
            };
            let sol = solve_sinkhorn(&c, &mu, &nu, &params)
                .unwrap()
                .expect_solved("eps grid");
            assert!(
                sol.report.primal <= prev + 1e-6 * (1.0 + max_c),
                "cost increased as epsilon decreased: {} -> {}",
                prev,
                sol.report.primal
            );
            prev = sol.report.primal;
        }
    }
}
