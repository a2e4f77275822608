//! Primal network simplex for the balanced transportation problem.
//!
//! Follows the spanning-tree data layout of LEMON's `NetworkSimplex`
//! (parent / predecessor arc / thread / reverse thread / successor counts)
//! with block-search pricing, specialised to the complete bipartite graph:
//! real arc `e = i * n_targets + j` runs from source node `i` to target node
//! `n_sources + j` and has unbounded capacity. Each node also owns an
//! artificial arc to the root, which starts as the initial tree.

use crate::error::{Error, Result};

const UP: i8 = 1;
const DOWN: i8 = -1;
const LOWER: i8 = 1;
const TREE: i8 = 0;

#[derive(Debug)]
pub struct TransportSolution {
    /// Row-major `n_sources x n_targets` flows.
    pub flow: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
}

struct Solver<'a> {
    n1: usize,
    n2: usize,
    node_num: usize,
    arc_num: usize,
    cost: &'a [f64],
    art_cost: Vec<f64>,
    art_source: Vec<usize>,
    art_target: Vec<usize>,
    flow: Vec<f64>,
    state: Vec<i8>,
    pi: Vec<f64>,

    parent: Vec<usize>,
    pred: Vec<usize>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pred_dir: Vec<i8>,
    dirty_revs: Vec<usize>,

    block_size: usize,
    next_arc: usize,
    eps_cost: f64,

    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: f64,
}

const NONE: usize = usize::MAX;

impl<'a> Solver<'a> {
    fn source(&self, e: usize) -> usize {
        if e < self.arc_num {
            e / self.n2
        } else {
            self.art_source[e - self.arc_num]
        }
    }

    fn target(&self, e: usize) -> usize {
        if e < self.arc_num {
            self.n1 + e % self.n2
        } else {
            self.art_target[e - self.arc_num]
        }
    }

    fn arc_cost(&self, e: usize) -> f64 {
        if e < self.arc_num {
            self.cost[e]
        } else {
            self.art_cost[e - self.arc_num]
        }
    }

    fn new(supply: &[f64], demand: &[f64], cost: &'a [f64]) -> Self {
        let n1 = supply.len();
        let n2 = demand.len();
        let node_num = n1 + n2;
        let arc_num = n1 * n2;
        let root = node_num;
        let all_nodes = node_num + 1;

        let max_cost = cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let art = (max_cost + 1.0) * node_num as f64;

        let mut s = Solver {
            n1,
            n2,
            node_num,
            arc_num,
            cost,
            art_cost: vec![0.0; node_num],
            art_source: vec![0; node_num],
            art_target: vec![0; node_num],
            flow: vec![0.0; arc_num + node_num],
            state: vec![LOWER; arc_num + node_num],
            pi: vec![0.0; all_nodes],
            parent: vec![NONE; all_nodes],
            pred: vec![NONE; all_nodes],
            thread: vec![0; all_nodes],
            rev_thread: vec![0; all_nodes],
            succ_num: vec![0; all_nodes],
            last_succ: vec![0; all_nodes],
            pred_dir: vec![UP; all_nodes],
            dirty_revs: Vec::new(),
            block_size: ((arc_num as f64).sqrt().ceil() as usize).max(10),
            next_arc: 0,
            eps_cost: 1e-14 * (max_cost + 1.0),
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0.0,
        };

        for u in 0..node_num {
            let e = arc_num + u;
            let sup = if u < n1 { supply[u] } else { -demand[u - n1] };
            s.parent[u] = root;
            s.pred[u] = e;
            s.thread[u] = u + 1;
            s.rev_thread[u + 1] = u;
            s.succ_num[u] = 1;
            s.last_succ[u] = u;
            s.state[e] = TREE;
            if sup >= 0.0 {
                s.pred_dir[u] = UP;
                s.pi[u] = 0.0;
                s.art_source[u] = u;
                s.art_target[u] = root;
                s.flow[e] = sup;
                s.art_cost[u] = 0.0;
            } else {
                s.pred_dir[u] = DOWN;
                s.pi[u] = art;
                s.art_source[u] = root;
                s.art_target[u] = u;
                s.flow[e] = -sup;
                s.art_cost[u] = art;
            }
        }
        s.parent[root] = NONE;
        s.pred[root] = NONE;
        s.thread[root] = 0;
        s.rev_thread[0] = root;
        s.succ_num[root] = node_num + 1;
        s.last_succ[root] = root - 1;
        s
    }

    fn reduced(&self, e: usize) -> f64 {
        let (src, tgt) = (e / self.n2, self.n1 + e % self.n2);
        self.cost[e] + self.pi[src] - self.pi[tgt]
    }

    /// Block search over the real arcs; returns false at optimality.
    fn find_entering_arc(&mut self) -> bool {
        let mut min = -self.eps_cost;
        let mut found = false;
        let mut cnt = self.block_size;
        let m = self.arc_num;
        let mut e = self.next_arc;
        for _ in 0..m {
            if self.state[e] == LOWER {
                let c = self.reduced(e);
                if c < min {
                    min = c;
                    self.in_arc = e;
                    found = true;
                }
            }
            cnt -= 1;
            if cnt == 0 {
                if found {
                    self.next_arc = (e + 1) % m;
                    return true;
                }
                cnt = self.block_size;
            }
            e += 1;
            if e == m {
                e = 0;
            }
        }
        if found {
            self.next_arc = e;
        }
        found
    }

    fn find_join_node(&mut self) {
        let mut u = self.source(self.in_arc);
        let mut v = self.target(self.in_arc);
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    /// Ratio test around the cycle closed by the entering arc.
    fn find_leaving_arc(&mut self) -> bool {
        // The entering arc is always at its lower bound (no capacities).
        let first = self.source(self.in_arc);
        let second = self.target(self.in_arc);
        let mut delta = f64::INFINITY;
        let mut result = 0;
        let mut u = first;
        while u != self.join {
            if self.pred_dir[u] == UP {
                let d = self.flow[self.pred[u]];
                if d < delta {
                    delta = d;
                    self.u_out = u;
                    result = 1;
                }
            }
            u = self.parent[u];
        }
        u = second;
        while u != self.join {
            if self.pred_dir[u] == DOWN {
                let d = self.flow[self.pred[u]];
                if d <= delta {
                    delta = d;
                    self.u_out = u;
                    result = 2;
                }
            }
            u = self.parent[u];
        }
        if result == 0 {
            return false;
        }
        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        self.delta = delta;
        true
    }

    fn change_flow(&mut self) {
        let val = self.delta;
        if val > 0.0 {
            self.flow[self.in_arc] += val;
            let mut u = self.source(self.in_arc);
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] -= self.pred_dir[u] as f64 * val;
                u = self.parent[u];
            }
            u = self.target(self.in_arc);
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] += self.pred_dir[u] as f64 * val;
                u = self.parent[u];
            }
        }
        self.state[self.in_arc] = TREE;
        let out = self.pred[self.u_out];
        self.state[out] = LOWER;
        self.flow[out] = 0.0;
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let join = self.join;
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];
        let in_dir = if u_in == self.source(self.in_arc) {
            UP
        } else {
            DOWN
        };

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = self.in_arc;
            self.pred_dir[u_in] = in_dir;

            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };

            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }

            for i in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[i];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc += self.succ_num[u];
                tmp_sc -= self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = self.in_arc;
            self.pred_dir[u_in] = in_dir;
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in {
            join
        } else {
            NONE
        };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let u_in = self.u_in;
        let c = self.arc_cost(self.in_arc);
        let sigma = self.pi[self.v_in] - self.pi[u_in] - self.pred_dir[u_in] as f64 * c;
        let end = self.thread[self.last_succ[u_in]];
        let mut u = u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    fn run(&mut self) -> Result<usize> {
        let mut iterations = 0usize;
        // Generous bound; the pivot rule terminates long before on valid input.
        let limit = 200 * (self.node_num + 1) * (self.node_num + 1) + 10_000;
        while self.find_entering_arc() {
            self.find_join_node();
            if !self.find_leaving_arc() {
                return Err(Error::Solver("transport problem unbounded".into()));
            }
            self.change_flow();
            self.update_tree_structure();
            self.update_potential();
            iterations += 1;
            if iterations > limit {
                return Err(Error::Solver(format!(
                    "network simplex exceeded {limit} pivots ({} x {} problem)",
                    self.n1, self.n2
                )));
            }
        }
        Ok(iterations)
    }
}

/// Minimum-cost coupling of `supply` (length `n1`) and `demand` (length `n2`)
/// for the row-major cost matrix `cost`. Masses must be nonnegative with equal
/// totals (up to rounding; the demand is rescaled to the supply total).
pub fn solve_transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportSolution> {
    let (n1, n2) = (supply.len(), demand.len());
    if n1 == 0 || n2 == 0 {
        return Err(Error::invalid("transport problem needs nonempty marginals"));
    }
    if cost.len() != n1 * n2 {
        return Err(Error::structural(
            "cost matrix shape does not match marginals",
        ));
    }
    let total_s: f64 = supply.iter().sum();
    let total_d: f64 = demand.iter().sum();
    if (total_s - total_d).abs() > 1e-9 * total_s.max(total_d).max(1.0) {
        return Err(Error::invalid(format!(
            "unbalanced marginals: {total_s} vs {total_d}"
        )));
    }
    let scale = total_s / total_d;
    let demand: Vec<f64> = demand.iter().map(|d| d * scale).collect();

    let mut solver = Solver::new(supply, &demand, cost);
    let iterations = solver.run()?;

    let art_left: f64 = (0..solver.node_num)
        .filter(|&u| solver.art_cost[u] > 0.0)
        .map(|u| solver.flow[solver.arc_num + u])
        .sum();
    if art_left > 1e-9 * total_s.max(1.0) {
        return Err(Error::Solver(format!(
            "artificial arcs still carry {art_left:e} units of mass"
        )));
    }

    let mut flow = solver.flow;
    flow.truncate(n1 * n2);
    for f in &mut flow {
        if *f < 0.0 {
            *f = 0.0;
        }
    }
    let cost_value = flow.iter().zip(cost).map(|(f, c)| f * c).sum();
    Ok(TransportSolution {
        flow,
        cost: cost_value,
        iterations,
    })
}
