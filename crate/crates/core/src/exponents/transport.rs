//! Exact minimum of a linear cost over the transportation polytope
//! U(p, q) = {couplings with row marginal p and column marginal q}.
//!
//! Successive shortest paths on the bipartite flow network. Middle arcs are
//! uncapacitated, so every augmentation saturates a source or sink arc and
//! the solver finishes in at most nx + ny augmentations. Initial potentials
//! come from one relaxation pass over the (acyclic) initial graph, after
//! which Dijkstra with reduced costs handles the negative cost entries.

/// Optimal plan, its cost, and the dual potentials certifying optimality.
#[derive(Clone, Debug)]
pub struct TransportSolution {
    pub cost: f64,
    /// Row-major nx × ny plan.
    pub plan: Vec<f64>,
    pub row_potential: Vec<f64>,
    pub col_potential: Vec<f64>,
}

impl TransportSolution {
    /// Reduced cost of cell (i, j); ≥ 0 everywhere and ≈ 0 on the support of
    /// any optimal plan.
    pub fn reduced_cost(&self, cost: &[f64], ny: usize, i: usize, j: usize) -> f64 {
        cost[i * ny + j] + self.row_potential[i] - self.col_potential[j]
    }
}

const SATURATION_EPS: f64 = 1e-15;

/// Minimizes Σ plan(i,j)·cost(i,j) over U(p, q). `p` and `q` must have equal
/// totals (they are probability vectors here). Zero-mass rows and columns are
/// handled naturally.
pub fn transport_min(cost: &[f64], nx: usize, ny: usize, p: &[f64], q: &[f64]) -> TransportSolution {
    debug_assert_eq!(cost.len(), nx * ny);
    debug_assert!((p.iter().sum::<f64>() - q.iter().sum::<f64>()).abs() < 1e-9);

    // Node layout: 0 = source, 1..=nx rows, nx+1..=nx+ny cols, last = sink.
    let n_nodes = nx + ny + 2;
    let source = 0usize;
    let sink = n_nodes - 1;

    struct Edge {
        to: usize,
        rev: usize,
        cap: f64,
        cost: f64,
    }
    let mut adj: Vec<Vec<Edge>> = (0..n_nodes).map(|_| Vec::new()).collect();
    let add_edge = |adj: &mut Vec<Vec<Edge>>, u: usize, v: usize, cap: f64, cost: f64| {
        let rev_u = adj[v].len();
        let rev_v = adj[u].len();
        adj[u].push(Edge { to: v, rev: rev_u, cap, cost });
        adj[v].push(Edge {
            to: u,
            rev: rev_v,
            cap: 0.0,
            cost: -cost,
        });
    };
    for i in 0..nx {
        add_edge(&mut adj, source, 1 + i, p[i], 0.0);
    }
    for i in 0..nx {
        for j in 0..ny {
            add_edge(&mut adj, 1 + i, 1 + nx + j, f64::INFINITY, cost[i * ny + j]);
        }
    }
    for j in 0..ny {
        add_edge(&mut adj, 1 + nx + j, sink, q[j], 0.0);
    }

    // Initial potentials: shortest distances in the (acyclic) initial graph.
    let mut potential = vec![0.0f64; n_nodes];
    for j in 0..ny {
        let mut best = f64::INFINITY;
        for i in 0..nx {
            best = best.min(cost[i * ny + j]);
        }
        potential[1 + nx + j] = best;
    }
    potential[sink] = (0..ny).map(|j| potential[1 + nx + j]).fold(f64::INFINITY, f64::min);

    let total: f64 = p.iter().sum();
    let mut shipped = 0.0f64;
    let mut dist = vec![0.0f64; n_nodes];
    let mut done = vec![false; n_nodes];
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n_nodes];

    while shipped < total - 1e-12 {
        // Dijkstra with reduced costs (dense scan; the graph is tiny).
        for v in 0..n_nodes {
            dist[v] = f64::INFINITY;
            done[v] = false;
            prev[v] = None;
        }
        dist[source] = 0.0;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..n_nodes {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u == sink {
                break;
            }
            for (ei, e) in adj[u].iter().enumerate() {
                if e.cap <= SATURATION_EPS {
                    continue;
                }
                // Reduced costs are nonnegative up to rounding.
                let rc = (e.cost + potential[u] - potential[e.to]).max(0.0);
                let nd = dist[u] + rc;
                if nd < dist[e.to] {
                    dist[e.to] = nd;
                    prev[e.to] = Some((u, ei));
                }
            }
        }
        if dist[sink].is_infinite() {
            // Totals matched, so this only happens from rounding dust.
            break;
        }
        // Cap at the sink distance so reduced costs stay nonnegative on arcs
        // out of nodes beyond the sink (or unreachable ones).
        let cap = dist[sink];
        for v in 0..n_nodes {
            potential[v] += dist[v].min(cap);
        }
        // Bottleneck along the augmenting path.
        let mut bottleneck = total - shipped;
        let mut v = sink;
        while let Some((u, ei)) = prev[v] {
            bottleneck = bottleneck.min(adj[u][ei].cap);
            v = u;
        }
        let mut v = sink;
        while let Some((u, ei)) = prev[v] {
            adj[u][ei].cap -= bottleneck;
            let rev = adj[u][ei].rev;
            adj[v][rev].cap += bottleneck;
            v = u;
        }
        shipped += bottleneck;
    }

    // Flow on the middle arcs is the residual capacity of their reverses.
    let mut plan = vec![0.0f64; nx * ny];
    let mut cost_total = 0.0;
    for i in 0..nx {
        for e in &adj[1 + i] {
            if e.to >= 1 + nx && e.to < 1 + nx + ny {
                let j = e.to - 1 - nx;
                let flow = adj[e.to][e.rev].cap;
                plan[i * ny + j] = flow;
                cost_total += flow * cost[i * ny + j];
            }
        }
    }
    TransportSolution {
        cost: cost_total,
        plan,
        row_potential: (0..nx).map(|i| potential[1 + i]).collect(),
        col_potential: (0..ny).map(|j| potential[1 + nx + j]).collect(),
    }
}
