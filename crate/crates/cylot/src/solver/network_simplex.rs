//! Primal network simplex specialized to the bipartite transportation
//! polytope.
//!
//! Two phases: phase 1 prices forbidden (infinite-cost) arcs at 1 and
//! everything else at 0, driving mass off the forbidden edges or proving
//! infeasibility; phase 2 optimizes the real costs with forbidden arcs
//! barred from entering and treated as zero-capacity when they sit in the
//! basis. Entering arcs come from a wraparound block search (most negative
//! reduced cost within a block); a run of degenerate pivots switches to
//! Bland's rule until progress resumes, which prevents cycling.

use crate::costs::CostMatrix;
use crate::scalar::Scalar;
use crate::tol;

use super::{DualSolution, SolveOutcome, SolveReport, SolveStatus, Solution, TransportPlan};

const NO_ARC: u32 = u32::MAX;

struct Simplex<'a, S: Scalar> {
    m: usize,
    n: usize,
    cost: &'a CostMatrix<S>,
    forbidden: Vec<bool>,
    flow: Vec<S>,
    in_tree: Vec<bool>,
    adj: Vec<Vec<u32>>,
    parent_arc: Vec<u32>,
    depth: Vec<u32>,
    pot: Vec<S>,
    bfs_buf: Vec<u32>,
    next_arc: usize,
    pivots: usize,
    phase_two: bool,
    pivot_tol: S,
}

impl<'a, S: Scalar> Simplex<'a, S> {
    fn new(cost: &'a CostMatrix<S>) -> Self {
        let m = cost.rows();
        let n = cost.cols();
        let arcs = m * n;
        let nodes = m + n;
        let forbidden = cost.entries().iter().map(|e| e.is_infinite()).collect();
        Self {
            m,
            n,
            cost,
            forbidden,
            flow: vec![S::zero(); arcs],
            in_tree: vec![false; arcs],
            adj: vec![Vec::new(); nodes],
            parent_arc: vec![NO_ARC; nodes],
            depth: vec![0; nodes],
            pot: vec![S::zero(); nodes],
            bfs_buf: Vec::with_capacity(nodes),
            next_arc: 0,
            pivots: 0,
            phase_two: false,
            pivot_tol: S::from_f64_lossy(tol::PIVOT),
        }
    }

    #[inline]
    fn arc_from(&self, a: usize) -> usize {
        a / self.n
    }

    #[inline]
    fn arc_to(&self, a: usize) -> usize {
        self.m + a % self.n
    }

    #[inline]
    fn arc_cost(&self, a: usize) -> S {
        if self.phase_two {
            // Forbidden arcs surviving in the basis are zero-flow
            // connectors between balanced components; any potential drop
            // across them is dual-feasible, so use zero.
            if self.forbidden[a] {
                S::zero()
            } else {
                self.cost.get(self.arc_from(a), a % self.n).to_scalar()
            }
        } else if self.forbidden[a] {
            S::one()
        } else {
            S::zero()
        }
    }

    /// Least-cost (matrix minimum) start: visit arcs in cost order and run
    /// the classic crossing-out allocation. Every allocation kills exactly
    /// one line, so the chosen cells form a spanning tree of m + n - 1
    /// arcs; forbidden arcs sort last and only enter when a line cannot be
    /// finished otherwise (phase 1 then clears them).
    fn least_cost_basis(&mut self, mu: &[S], nu: &[S]) {
        let m = self.m;
        let n = self.n;
        let mut order: Vec<u32> = (0..(m * n) as u32).collect();
        order.sort_by(|&a, &b| {
            let key = |arc: u32| {
                let arc = arc as usize;
                if self.forbidden[arc] {
                    S::infinity()
                } else {
                    self.cost.get(arc / n, arc % n).to_scalar()
                }
            };
            key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal)
        });

        let mut row_rem = mu.to_vec();
        let mut col_rem = nu.to_vec();
        let mut row_alive = vec![true; m];
        let mut col_alive = vec![true; n];
        let mut rows_left = m;
        let mut cols_left = n;
        let mut placed = 0usize;
        let target = m + n - 1;

        let mut allocate = |sx: &mut Self,
                            arc: usize,
                            row_rem: &mut [S],
                            col_rem: &mut [S],
                            row_alive: &mut [bool],
                            col_alive: &mut [bool],
                            rows_left: &mut usize,
                            cols_left: &mut usize| {
            let i = arc / n;
            let j = arc % n;
            let take = if row_rem[i] < col_rem[j] {
                row_rem[i]
            } else {
                col_rem[j]
            };
            let take = if take > S::zero() { take } else { S::zero() };
            sx.flow[arc] = take;
            sx.in_tree[arc] = true;
            sx.adj[i].push(arc as u32);
            sx.adj[m + j].push(arc as u32);
            row_rem[i] = row_rem[i] - take;
            col_rem[j] = col_rem[j] - take;
            // Kill exactly one line, keeping the other side finishable.
            let kill_row = if *rows_left == 1 {
                false
            } else if *cols_left == 1 {
                true
            } else {
                row_rem[i] <= col_rem[j]
            };
            if kill_row {
                row_alive[i] = false;
                *rows_left -= 1;
            } else {
                col_alive[j] = false;
                *cols_left -= 1;
            }
        };

        for &arc in &order {
            if placed == target {
                break;
            }
            let arc = arc as usize;
            if !row_alive[arc / n] || !col_alive[arc % n] {
                continue;
            }
            allocate(
                self,
                arc,
                &mut row_rem,
                &mut col_rem,
                &mut row_alive,
                &mut col_alive,
                &mut rows_left,
                &mut cols_left,
            );
            placed += 1;
        }
        // The cost-ordered pass can strand alive lines whose connecting
        // arcs were consumed earlier; finish northwest-style over whatever
        // is left.
        while placed < target {
            let i = row_alive.iter().position(|&a| a).expect("rows remain");
            let j = col_alive.iter().position(|&a| a).expect("cols remain");
            allocate(
                self,
                i * n + j,
                &mut row_rem,
                &mut col_rem,
                &mut row_alive,
                &mut col_alive,
                &mut rows_left,
                &mut cols_left,
            );
            placed += 1;
        }
    }

    /// Recompute parents, depths and potentials from the root by BFS over
    /// the current tree.
    fn rebuild_tree(&mut self) {
        let nodes = self.m + self.n;
        self.parent_arc.iter_mut().for_each(|p| *p = NO_ARC);
        self.depth.iter_mut().for_each(|d| *d = 0);
        let mut visited = vec![false; nodes];
        self.bfs_buf.clear();
        self.bfs_buf.push(0);
        visited[0] = true;
        self.pot[0] = S::zero();
        let mut head = 0;
        while head < self.bfs_buf.len() {
            let x = self.bfs_buf[head] as usize;
            head += 1;
            for idx in 0..self.adj[x].len() {
                let a = self.adj[x][idx] as usize;
                let from = self.arc_from(a);
                let to = self.arc_to(a);
                let y = if from == x { to } else { from };
                if visited[y] {
                    continue;
                }
                visited[y] = true;
                self.parent_arc[y] = a as u32;
                self.depth[y] = self.depth[x] + 1;
                // Tree arcs have zero reduced cost: c = pot[from] - pot[to].
                let c = self.arc_cost(a);
                self.pot[y] = if from == x {
                    self.pot[x] - c
                } else {
                    self.pot[x] + c
                };
                self.bfs_buf.push(y as u32);
            }
        }
        debug_assert!(visited.iter().all(|&v| v), "basis must span all nodes");
    }

    #[inline]
    fn reduced(&self, a: usize) -> S {
        self.arc_cost(a) - self.pot[self.arc_from(a)] + self.pot[self.arc_to(a)]
    }

    fn find_entering(&mut self, bland: bool) -> Option<usize> {
        let arcs = self.m * self.n;
        let threshold = -self.pivot_tol;
        if bland {
            for a in 0..arcs {
                if self.in_tree[a] || (self.phase_two && self.forbidden[a]) {
                    continue;
                }
                if self.reduced(a) < threshold {
                    return Some(a);
                }
            }
            return None;
        }
        let block = ((arcs as f64).sqrt() as usize).max(64);
        let mut best: Option<usize> = None;
        let mut best_red = threshold;
        let mut cursor = self.next_arc;
        let mut scanned = 0;
        while scanned < arcs {
            let a = cursor;
            cursor += 1;
            if cursor == arcs {
                cursor = 0;
            }
            scanned += 1;
            if !self.in_tree[a] && !(self.phase_two && self.forbidden[a]) {
                let r = self.reduced(a);
                if r < best_red {
                    best_red = r;
                    best = Some(a);
                }
            }
            if scanned % block == 0 && best.is_some() {
                break;
            }
        }
        self.next_arc = cursor;
        best
    }

    fn parent_node(&self, x: usize) -> usize {
        let a = self.parent_arc[x] as usize;
        let from = self.arc_from(a);
        if from == x {
            self.arc_to(a)
        } else {
            from
        }
    }

    /// One simplex pivot on the entering arc. Returns whether flow moved.
    fn pivot(&mut self, entering: usize) -> bool {
        self.pivots += 1;
        // Cycle = entering arc (u -> v) plus the tree path from v back to u.
        // Signs are relative to the direction of travel v -> lca -> u.
        let u = self.arc_from(entering);
        let v = self.arc_to(entering);
        // (arc, aligned-with-travel)
        let mut cycle: Vec<(usize, bool)> = Vec::new();
        let mut x = u;
        let mut y = v;
        while self.depth[x] > self.depth[y] {
            let a = self.parent_arc[x] as usize;
            // Traveled parent -> x on the u side.
            cycle.push((a, self.arc_from(a) != x));
            x = self.parent_node(x);
        }
        while self.depth[y] > self.depth[x] {
            let a = self.parent_arc[y] as usize;
            // Traveled y -> parent on the v side.
            cycle.push((a, self.arc_from(a) == y));
            y = self.parent_node(y);
        }
        while x != y {
            let a = self.parent_arc[x] as usize;
            cycle.push((a, self.arc_from(a) != x));
            x = self.parent_node(x);
            let b = self.parent_arc[y] as usize;
            cycle.push((b, self.arc_from(b) == y));
            y = self.parent_node(y);
        }

        // Leaving arc: tightest bound on the flow shift. Reverse arcs bound
        // by their flow; forbidden arcs in a phase-2 cycle bound by zero
        // residual capacity in either direction.
        let mut delta = S::infinity();
        let mut leaving: Option<usize> = None;
        let mut leaving_forbidden = false;
        for &(a, aligned) in &cycle {
            let cap = if self.phase_two && self.forbidden[a] {
                S::zero()
            } else if aligned {
                continue;
            } else {
                self.flow[a]
            };
            let better = cap < delta
                || (cap == delta
                    && match leaving {
                        None => true,
                        Some(l) => {
                            let fb = self.phase_two && self.forbidden[a];
                            (fb && !leaving_forbidden)
                                || (fb == leaving_forbidden && a < l)
                        }
                    });
            if better {
                delta = cap;
                leaving = Some(a);
                leaving_forbidden = self.phase_two && self.forbidden[a];
            }
        }
        let leaving = leaving.expect("transportation cycles always contain a reverse arc");

        if delta > S::zero() {
            self.flow[entering] = delta;
            for &(a, aligned) in &cycle {
                if aligned {
                    self.flow[a] = self.flow[a] + delta;
                } else {
                    let f = self.flow[a] - delta;
                    self.flow[a] = if f > S::zero() { f } else { S::zero() };
                }
            }
        }
        self.flow[leaving] = S::zero();

        self.in_tree[leaving] = false;
        for node in [self.arc_from(leaving), self.arc_to(leaving)] {
            self.adj[node].retain(|&a| a as usize != leaving);
        }
        self.in_tree[entering] = true;
        self.adj[u].push(entering as u32);
        self.adj[v].push(entering as u32);
        self.rebuild_tree();

        delta > S::zero()
    }

    /// Run the current phase to optimality. Returns false if the pivot cap
    /// was exhausted.
    fn run_phase(&mut self, max_pivots: usize) -> bool {
        let stall_limit = 2 * (self.m + self.n) + 16;
        let mut stalled = 0usize;
        let mut bland = false;
        loop {
            if self.pivots >= max_pivots {
                return false;
            }
            let Some(entering) = self.find_entering(bland) else {
                return true;
            };
            let moved = self.pivot(entering);
            if moved {
                stalled = 0;
                bland = false;
            } else {
                stalled += 1;
                if stalled > stall_limit {
                    bland = true;
                }
            }
        }
    }

    fn phase_one_objective(&self) -> S {
        let mut total = S::zero();
        for (a, &fb) in self.forbidden.iter().enumerate() {
            if fb {
                total = total + self.flow[a];
            }
        }
        total
    }
}

pub(super) fn solve<S: Scalar>(
    cost: &CostMatrix<S>,
    mu_w: &[S],
    nu_w: &[S],
) -> SolveOutcome<S> {
    let m = cost.rows();
    let n = cost.cols();
    let mut sx = Simplex::new(cost);
    let scale = cost.max_finite().unwrap_or_else(S::zero).abs();
    sx.pivot_tol = S::from_f64_lossy(tol::PIVOT) * (S::one() + scale);

    sx.least_cost_basis(mu_w, nu_w);
    sx.rebuild_tree();

    let max_pivots = (2_000 + 20 * m * n).min(500_000);
    let mut exhausted = false;

    if sx.forbidden.iter().any(|&f| f) {
        // Phase 1 at unit cost on forbidden arcs.
        sx.pivot_tol = S::from_f64_lossy(tol::PIVOT);
        if !sx.run_phase(max_pivots) {
            exhausted = true;
        }
        let infeasibility = sx.phase_one_objective();
        if infeasibility > S::from_f64_lossy(1e-12) {
            return SolveOutcome::Infeasible;
        }
        // Zero out numerical dust on forbidden basis arcs before phase 2.
        for a in 0..m * n {
            if sx.forbidden[a] {
                sx.flow[a] = S::zero();
            }
        }
    }

    sx.phase_two = true;
    sx.pivot_tol = S::from_f64_lossy(tol::PIVOT) * (S::one() + scale);
    sx.next_arc = 0;
    sx.rebuild_tree();
    if !exhausted && !sx.run_phase(max_pivots) {
        exhausted = true;
    }

    // Primal plan.
    let mut coupling = vec![S::zero(); m * n];
    let mut primal = S::zero();
    for a in 0..m * n {
        let f = sx.flow[a];
        coupling[a] = f;
        if let Some(c) = cost.get(a / n, a % n).finite() {
            primal = primal + f * c;
        }
    }
    let plan = TransportPlan::new(coupling, m, n, mu_w.to_vec(), nu_w.to_vec());

    // LP duals straight from the final basis potentials.
    let phi: Vec<S> = (0..m).map(|i| sx.pot[i]).collect();
    let psi: Vec<S> = (0..n).map(|j| -sx.pot[m + j]).collect();
    let mut dual_obj = S::zero();
    for (p, &w) in phi.iter().zip(mu_w) {
        dual_obj = dual_obj + *p * w;
    }
    for (q, &w) in psi.iter().zip(nu_w) {
        dual_obj = dual_obj + *q * w;
    }

    let status = if exhausted {
        SolveStatus::MaxIter
    } else {
        SolveStatus::Optimal
    };
    let report = SolveReport {
        primal,
        dual: dual_obj,
        gap: primal - dual_obj,
        iterations: sx.pivots,
        status,
    };
    SolveOutcome::Solved(Solution {
        plan,
        dual: DualSolution {
            phi,
            psi,
            objective: dual_obj,
        },
        report,
    })
}
