//! Dinic max-flow on the finite-entry bipartite graph, used to decide
//! whether any coupling with finite cost exists.

use crate::costs::CostMatrix;
use crate::scalar::Scalar;
use crate::tol;

struct Edge {
    to: usize,
    rev: usize,
    cap: f64,
}

struct Dinic {
    graph: Vec<Vec<Edge>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(nodes: usize) -> Self {
        Self {
            graph: (0..nodes).map(|_| Vec::new()).collect(),
            level: vec![-1; nodes],
            iter: vec![0; nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        let rev_from = self.graph[to].len();
        let rev_to = self.graph[from].len();
        self.graph[from].push(Edge {
            to,
            rev: rev_from,
            cap,
        });
        self.graph[to].push(Edge {
            to: from,
            rev: rev_to,
            cap: 0.0,
        });
    }

    fn bfs(&mut self, source: usize, sink: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = std::collections::VecDeque::new();
        self.level[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for e in &self.graph[v] {
                if e.cap > tol::FLOW_RESIDUAL && self.level[e.to] < 0 {
                    self.level[e.to] = self.level[v] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        self.level[sink] >= 0
    }

    fn dfs(&mut self, v: usize, sink: usize, pushed: f64) -> f64 {
        if v == sink {
            return pushed;
        }
        while self.iter[v] < self.graph[v].len() {
            let i = self.iter[v];
            let (to, cap) = {
                let e = &self.graph[v][i];
                (e.to, e.cap)
            };
            if cap > tol::FLOW_RESIDUAL && self.level[v] < self.level[to] {
                let d = self.dfs(to, sink, pushed.min(cap));
                if d > tol::FLOW_RESIDUAL {
                    let rev = self.graph[v][i].rev;
                    self.graph[v][i].cap -= d;
                    self.graph[to][rev].cap += d;
                    return d;
                }
            }
            self.iter[v] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, source: usize, sink: usize) -> f64 {
        let mut flow = 0.0;
        while self.bfs(source, sink) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(source, sink, f64::INFINITY);
                if f <= tol::FLOW_RESIDUAL {
                    break;
                }
                flow += f;
            }
        }
        flow
    }
}

/// Maximum mass routable from the row supplies to the column demands
/// through finite-cost entries.
pub(super) fn bipartite_max_flow<S: Scalar>(
    cost: &CostMatrix<S>,
    mu_w: &[S],
    nu_w: &[S],
) -> f64 {
    let m = cost.rows();
    let n = cost.cols();
    let source = 0;
    let sink = m + n + 1;
    let mut dinic = Dinic::new(m + n + 2);
    for (i, w) in mu_w.iter().enumerate() {
        dinic.add_edge(source, 1 + i, w.to_f64().unwrap_or(0.0));
    }
    for (j, w) in nu_w.iter().enumerate() {
        dinic.add_edge(1 + m + j, sink, w.to_f64().unwrap_or(0.0));
    }
    for i in 0..m {
        for j in 0..n {
            if cost.get(i, j).is_finite() {
                // Any capacity above the total mass is effectively infinite.
                dinic.add_edge(1 + i, 1 + m + j, 2.0);
            }
        }
    }
    dinic.max_flow(source, sink)
}
