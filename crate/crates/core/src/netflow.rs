//! Flow solvers: min-cost circulation by negative-cycle cancelling, min-cost
//! flow by successive shortest paths, the h-cardinality maximum assignment,
//! and the small integer circulation problem behind arrow+copying
//! separation.
//!
//! Capacities are integers throughout, so all flows are integral without
//! rounding.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("assignment infeasible: h = {0} exceeds {1} available")]
    InfeasibleAssignment(usize, usize),
    #[error("no feasible flow for the given supplies")]
    InfeasibleFlow,
    #[error("subproblem too large: 2^{0} choice patterns exceed the enumeration cap 2^{1}")]
    EnumerationCap(usize, usize),
}

#[derive(Debug, Clone)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub cap: i64,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct Network {
    pub n_nodes: usize,
    pub arcs: Vec<Arc>,
}

#[derive(Debug, Clone)]
pub struct FlowSolution {
    /// Flow per arc, in input arc order.
    pub flow: Vec<i64>,
    pub cost: f64,
}

impl FlowSolution {
    /// Conservation and capacity feasibility (circulation form).
    pub fn is_feasible_circulation(&self, n: &Network) -> bool {
        if self.flow.len() != n.arcs.len() {
            return false;
        }
        let mut balance = vec![0i64; n.n_nodes];
        for (arc, &f) in n.arcs.iter().zip(self.flow.iter()) {
            if f < 0 || f > arc.cap {
                return false;
            }
            balance[arc.from] -= f;
            balance[arc.to] += f;
        }
        balance.iter().all(|&b| b == 0)
    }
}

const COST_EPS: f64 = 1e-12;

/// Residual edge bookkeeping: each arc contributes a forward and a backward
/// residual edge.
struct Residual {
    n_nodes: usize,
    /// (from, to, arc index, forward?)
    edges: Vec<(usize, usize, usize, bool)>,
}

impl Residual {
    fn new(n: &Network) -> Self {
        let mut edges = Vec::with_capacity(n.arcs.len() * 2);
        for (k, arc) in n.arcs.iter().enumerate() {
            edges.push((arc.from, arc.to, k, true));
            edges.push((arc.to, arc.from, k, false));
        }
        Residual {
            n_nodes: n.n_nodes,
            edges,
        }
    }

    fn capacity(&self, n: &Network, flow: &[i64], e: usize) -> i64 {
        let (_, _, k, fwd) = self.edges[e];
        if fwd {
            n.arcs[k].cap - flow[k]
        } else {
            flow[k]
        }
    }

    fn cost(&self, n: &Network, e: usize) -> f64 {
        let (_, _, k, fwd) = self.edges[e];
        if fwd {
            n.arcs[k].cost
        } else {
            -n.arcs[k].cost
        }
    }
}

/// Minimum-cost circulation by cancelling negative residual cycles found
/// with Bellman-Ford. The zero circulation is always feasible, so the
/// result never costs more than 0.
pub fn min_cost_circulation(n: &Network) -> FlowSolution {
    let mut flow = vec![0i64; n.arcs.len()];
    let res = Residual::new(n);
    loop {
        // Bellman-Ford from a virtual source connected to every node.
        let mut dist = vec![0.0f64; res.n_nodes];
        let mut pred: Vec<Option<usize>> = vec![None; res.n_nodes];
        let mut updated_node = None;
        for round in 0..res.n_nodes {
            updated_node = None;
            for (e, &(from, to, _, _)) in res.edges.iter().enumerate() {
                if res.capacity(n, &flow, e) <= 0 {
                    continue;
                }
                let cand = dist[from] + res.cost(n, e);
                if cand < dist[to] - COST_EPS {
                    dist[to] = cand;
                    pred[to] = Some(e);
                    updated_node = Some(to);
                }
            }
            if updated_node.is_none() {
                break;
            }
            let _ = round;
        }
        let Some(mut v) = updated_node else {
            return FlowSolution {
                cost: total_cost(n, &flow),
                flow,
            };
        };
        // Walk predecessors n times to land on the cycle, then extract it.
        for _ in 0..res.n_nodes {
            let e = pred[v].expect("updated node has a predecessor");
            v = res.edges[e].0;
        }
        let start = v;
        let mut cycle = Vec::new();
        loop {
            let e = pred[v].expect("cycle node has a predecessor");
            cycle.push(e);
            v = res.edges[e].0;
            if v == start {
                break;
            }
        }
        let bottleneck = cycle
            .iter()
            .map(|&e| res.capacity(n, &flow, e))
            .min()
            .unwrap();
        debug_assert!(bottleneck > 0);
        for &e in &cycle {
            let (_, _, k, fwd) = res.edges[e];
            if fwd {
                flow[k] += bottleneck;
            } else {
                flow[k] -= bottleneck;
            }
        }
    }
}

fn total_cost(n: &Network, flow: &[i64]) -> f64 {
    n.arcs
        .iter()
        .zip(flow.iter())
        .map(|(a, &f)| a.cost * f as f64)
        .sum()
}

/// Minimum-cost flow meeting node supplies (positive = source, negative =
/// demand) by successive shortest augmenting paths, one unit at a time.
/// Requires a network whose residual graphs stay free of negative cycles
/// (layered/bipartite constructions used in this crate qualify).
pub fn min_cost_flow(n: &Network, supply: &[i64]) -> Result<FlowSolution, FlowError> {
    assert_eq!(supply.len(), n.n_nodes);
    debug_assert_eq!(supply.iter().sum::<i64>(), 0);
    let res = Residual::new(n);
    let mut flow = vec![0i64; n.arcs.len()];
    let mut balance: Vec<i64> = supply.to_vec();
    loop {
        let Some(src) = balance.iter().position(|&b| b > 0) else {
            return Ok(FlowSolution {
                cost: total_cost(n, &flow),
                flow,
            });
        };
        // Bellman-Ford shortest path from src; deterministic tie-breaking by
        // first-found (fixed edge order, strict improvement only).
        let inf = f64::INFINITY;
        let mut dist = vec![inf; n.n_nodes];
        let mut pred: Vec<Option<usize>> = vec![None; n.n_nodes];
        dist[src] = 0.0;
        for _ in 0..n.n_nodes {
            let mut any = false;
            for (e, &(from, to, _, _)) in res.edges.iter().enumerate() {
                if res.capacity(n, &flow, e) <= 0 || dist[from] == inf {
                    continue;
                }
                let cand = dist[from] + res.cost(n, e);
                if cand < dist[to] - COST_EPS {
                    dist[to] = cand;
                    pred[to] = Some(e);
                    any = true;
                }
            }
            if !any {
                break;
            }
        }
        // Nearest reachable demand node (ties: lowest index).
        let mut target = None;
        for v in 0..n.n_nodes {
            if balance[v] < 0 && dist[v] < inf {
                if target.map_or(true, |t: usize| dist[v] < dist[t]) {
                    target = Some(v);
                }
            }
        }
        let Some(mut v) = target else {
            return Err(FlowError::InfeasibleFlow);
        };
        while v != src {
            let e = pred[v].expect("path edge");
            let (from, _, k, fwd) = res.edges[e];
            if fwd {
                flow[k] += 1;
            } else {
                flow[k] -= 1;
            }
            v = from;
        }
        balance[src] -= 1;
        let t = target.unwrap();
        balance[t] += 1;
    }
}

/// Maximum-total-cost assignment of slots 1..h to distinct subsets, solved
/// as a min-cost flow on the bipartite construction. `costs[s][k]` is the
/// gain of giving slot k to subset s; rows must have exactly h entries.
/// Returns slot -> subset, length h.
pub fn h_cardinality_assignment(costs: &[Vec<f64>], h: usize) -> Result<Vec<usize>, FlowError> {
    let n_subsets = costs.len();
    let n_slots = costs.first().map_or(0, |r| r.len());
    assert!(costs.iter().all(|r| r.len() == n_slots));
    assert_eq!(n_slots, h, "cost matrix must have one column per slot");
    if h > n_subsets {
        return Err(FlowError::InfeasibleAssignment(h, n_subsets));
    }
    // Nodes: subsets, slots, source, sink.
    let src = n_subsets + n_slots;
    let sink = src + 1;
    let mut arcs = Vec::new();
    for s in 0..n_subsets {
        arcs.push(Arc {
            from: src,
            to: s,
            cap: 1,
            cost: 0.0,
        });
    }
    for s in 0..n_subsets {
        for k in 0..n_slots {
            arcs.push(Arc {
                from: s,
                to: n_subsets + k,
                cap: 1,
                cost: -costs[s][k],
            });
        }
    }
    for k in 0..n_slots {
        arcs.push(Arc {
            from: n_subsets + k,
            to: sink,
            cap: 1,
            cost: 0.0,
        });
    }
    let n = Network {
        n_nodes: sink + 1,
        arcs,
    };
    let mut supply = vec![0i64; n.n_nodes];
    supply[src] = h as i64;
    supply[sink] = -(h as i64);
    let sol = min_cost_flow(&n, &supply)?;
    let mut slot_subset = vec![usize::MAX; n_slots];
    let mut idx = n_subsets;
    for s in 0..n_subsets {
        for k in 0..n_slots {
            if sol.flow[idx] == 1 {
                slot_subset[k] = s;
            }
            idx += 1;
        }
    }
    debug_assert!(slot_subset.iter().all(|&s| s != usize::MAX));
    Ok(slot_subset)
}

/// Inner subproblem of arrow+copying separation over one (I_1, I_2, j_1)
/// choice: binary b per remaining y node, binary r per I_1 node, products p,
/// and integral flows u over the s -> I_2 -> J -> s graph subject to unit
/// arc capacities, coverage of chosen j's, and the activation bounds.
#[derive(Debug, Clone)]
pub struct ArrowCopyProblem {
    /// Objective coefficient of u_si per i in I_2.
    pub cost_si: Vec<f64>,
    /// Objective coefficient of u_ij, indexed [i][j].
    pub cost_ij: Vec<Vec<f64>>,
    /// Objective coefficient of r_i per i in I_1.
    pub cost_r: Vec<f64>,
    /// Objective coefficient of p_ij, indexed [i in I_1][j].
    pub cost_p: Vec<Vec<f64>>,
    /// Objective coefficient of b_j per j.
    pub cost_b: Vec<f64>,
    /// Lower bound on the number of chosen j's (1 in the plain formulation).
    pub min_b: usize,
    /// Cap on |J| for the exhaustive choice enumeration.
    pub max_enum_bits: usize,
}

#[derive(Debug, Clone)]
pub struct IntegerMccpSolution {
    pub u_si: Vec<i64>,
    /// Flow on (i, j), indexed [i][j].
    pub u_ij: Vec<Vec<i64>>,
    pub u_js: Vec<i64>,
    pub b: Vec<bool>,
    pub r: Vec<bool>,
    pub p: Vec<Vec<bool>>,
    pub cost: f64,
}

impl IntegerMccpSolution {
    /// All side constraints: capacities, conservation, activation bounds,
    /// product consistency p_ij = r_i b_j, and the choice lower bounds.
    pub fn is_feasible(&self, prob: &ArrowCopyProblem) -> bool {
        let n_i2 = prob.cost_si.len();
        let n_j = prob.cost_b.len();
        let chosen = self.b.iter().filter(|&&b| b).count();
        if chosen < prob.min_b.max(1) {
            return false;
        }
        if self.r.iter().filter(|&&r| r).count() < 1 {
            return false;
        }
        for i in 0..n_i2 {
            if self.u_si[i] < 0 || self.u_si[i] > 1 {
                return false;
            }
            let row: i64 = self.u_ij[i].iter().sum();
            if row != self.u_si[i] {
                return false;
            }
            for j in 0..n_j {
                if self.u_ij[i][j] < 0 || self.u_ij[i][j] > 1 {
                    return false;
                }
            }
        }
        for j in 0..n_j {
            let col: i64 = (0..n_i2).map(|i| self.u_ij[i][j]).sum();
            if col != self.u_js[j] {
                return false;
            }
            let bj = self.b[j] as i64;
            if self.u_js[j] < bj || self.u_js[j] > n_i2 as i64 * bj {
                return false;
            }
        }
        for (i, row) in self.p.iter().enumerate() {
            for (j, &pij) in row.iter().enumerate() {
                if pij != (self.r[i] && self.b[j]) {
                    return false;
                }
            }
        }
        true
    }
}

/// Exact solve by enumerating the b choice patterns; for each pattern the
/// r side is separable and the u side is a covering min-cost flow solved by
/// an exact decomposition (free per-node gains plus a corrective
/// assignment).
pub fn solve_integer_mccp(prob: &ArrowCopyProblem) -> Result<IntegerMccpSolution, FlowError> {
    let n_j = prob.cost_b.len();
    let n_i1 = prob.cost_r.len();
    let n_i2 = prob.cost_si.len();
    if n_j > prob.max_enum_bits {
        return Err(FlowError::EnumerationCap(n_j, prob.max_enum_bits));
    }
    let min_b = prob.min_b.max(1);
    let mut best: Option<(f64, IntegerMccpSolution)> = None;
    for mask in 1u64..(1 << n_j) {
        let chosen: Vec<usize> = (0..n_j).filter(|j| (mask >> j) & 1 == 1).collect();
        if chosen.len() < min_b || chosen.len() > n_i2 {
            continue;
        }
        // r side: take every i with negative value; force the best single
        // one if none is negative.
        let mut r = vec![false; n_i1];
        let mut r_cost = 0.0;
        {
            let vals: Vec<f64> = (0..n_i1)
                .map(|i| {
                    prob.cost_r[i]
                        + chosen.iter().map(|&j| prob.cost_p[i][j]).sum::<f64>()
                })
                .collect();
            let mut any = false;
            for (i, &v) in vals.iter().enumerate() {
                if v < 0.0 {
                    r[i] = true;
                    r_cost += v;
                    any = true;
                }
            }
            if !any {
                let mut arg = 0;
                for (i, &v) in vals.iter().enumerate() {
                    if v < vals[arg] {
                        arg = i;
                    }
                }
                r[arg] = true;
                r_cost += vals[arg];
            }
        }
        // u side: pair cost of sending i's unit to chosen j.
        let pair = |i: usize, j: usize| prob.cost_si[i] + prob.cost_ij[i][j];
        // Free gain of each i (used when not needed for coverage).
        let free: Vec<(f64, Option<usize>)> = (0..n_i2)
            .map(|i| {
                let mut bestj = None;
                let mut bestv = 0.0;
                for &j in &chosen {
                    let v = pair(i, j);
                    if v < bestv {
                        bestv = v;
                        bestj = Some(j);
                    }
                }
                (bestv, bestj)
            })
            .collect();
        let free_total: f64 = free.iter().map(|&(v, _)| v).sum();
        // Corrective assignment: one responsible i per chosen j, injective,
        // minimizing the adjusted non-negative costs pair(i,j) - free_i
        // (the assignment solver maximizes, so negate).
        let adj: Vec<Vec<f64>> = (0..n_i2)
            .map(|i| chosen.iter().map(|&j| pair(i, j) - free[i].0).collect())
            .collect();
        let negated: Vec<Vec<f64>> = adj
            .iter()
            .map(|row| row.iter().map(|v| -v).collect())
            .collect();
        let assign = h_cardinality_assignment(&negated, chosen.len())?;
        let mut u_ij = vec![vec![0i64; n_j]; n_i2];
        let mut covered = vec![false; n_i2];
        let mut u_cost = free_total;
        for (slot, &i) in assign.iter().enumerate() {
            let j = chosen[slot];
            u_ij[i][j] = 1;
            covered[i] = true;
            u_cost += adj[i][slot];
        }
        for i in 0..n_i2 {
            if !covered[i] {
                if let (v, Some(j)) = free[i] {
                    if v < 0.0 {
                        u_ij[i][j] = 1;
                    }
                }
            }
        }
        let b_cost: f64 = chosen.iter().map(|&j| prob.cost_b[j]).sum();
        let total = r_cost + u_cost + b_cost;
        if best.as_ref().map_or(true, |(bv, _)| total < *bv - COST_EPS) {
            let b: Vec<bool> = (0..n_j).map(|j| (mask >> j) & 1 == 1).collect();
            let u_si: Vec<i64> = u_ij.iter().map(|row| row.iter().sum()).collect();
            let u_js: Vec<i64> = (0..n_j).map(|j| (0..n_i2).map(|i| u_ij[i][j]).sum()).collect();
            let p: Vec<Vec<bool>> = (0..n_i1)
                .map(|i| (0..n_j).map(|j| r[i] && b[j]).collect())
                .collect();
            let sol = IntegerMccpSolution {
                u_si,
                u_ij,
                u_js,
                b,
                r: r.clone(),
                p,
                cost: total,
            };
            debug_assert!(sol.is_feasible(prob));
            best = Some((total, sol));
        }
    }
    best.map(|(_, sol)| sol)
        .ok_or(FlowError::InfeasibleAssignment(min_b, n_i2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn nonnegative_costs_give_zero_circulation() {
        let n = Network {
            n_nodes: 3,
            arcs: vec![
                Arc { from: 0, to: 1, cap: 2, cost: 1.0 },
                Arc { from: 1, to: 2, cap: 2, cost: 0.5 },
                Arc { from: 2, to: 0, cap: 2, cost: 0.0 },
            ],
        };
        let sol = min_cost_circulation(&n);
        assert_eq!(sol.cost, 0.0);
        assert!(sol.flow.iter().all(|&f| f == 0));
    }

    #[test]
    fn three_node_negative_cycle() {
        let n = Network {
            n_nodes: 3,
            arcs: vec![
                Arc { from: 0, to: 1, cap: 1, cost: -2.0 },
                Arc { from: 1, to: 2, cap: 1, cost: 1.0 },
                Arc { from: 2, to: 0, cap: 1, cost: -1.0 },
            ],
        };
        let sol = min_cost_circulation(&n);
        assert!((sol.cost - (-2.0)).abs() < 1e-12);
        assert_eq!(sol.flow, vec![1, 1, 1]);
        assert!(sol.is_feasible_circulation(&n));
    }

    /// All integral circulations by arc-wise enumeration with conservation
    /// filtering.
    fn brute_force_circulation(n: &Network) -> f64 {
        fn recurse(n: &Network, k: usize, flow: &mut Vec<i64>, best: &mut f64) {
            if k == n.arcs.len() {
                let sol = FlowSolution {
                    flow: flow.clone(),
                    cost: 0.0,
                };
                if sol.is_feasible_circulation(n) {
                    let c = n
                        .arcs
                        .iter()
                        .zip(flow.iter())
                        .map(|(a, &f)| a.cost * f as f64)
                        .sum();
                    if c < *best {
                        *best = c;
                    }
                }
                return;
            }
            for f in 0..=n.arcs[k].cap {
                flow[k] = f;
                recurse(n, k + 1, flow, best);
            }
            flow[k] = 0;
        }
        let mut best = 0.0;
        recurse(n, 0, &mut vec![0; n.arcs.len()], &mut best);
        best
    }

    #[test]
    fn circulation_matches_brute_force_on_random_networks() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..60 {
            let n_nodes = 3 + rng.below(5);
            let n_arcs = 4 + rng.below(6);
            let arcs: Vec<Arc> = (0..n_arcs)
                .map(|_| {
                    let from = rng.below(n_nodes);
                    let mut to = rng.below(n_nodes);
                    if to == from {
                        to = (to + 1) % n_nodes;
                    }
                    Arc {
                        from,
                        to,
                        cap: 1 + rng.below(2) as i64,
                        cost: (rng.below(21) as f64) - 10.0,
                    }
                })
                .collect();
            let n = Network {
                n_nodes,
                arcs,
            };
            let sol = min_cost_circulation(&n);
            assert!(sol.is_feasible_circulation(&n));
            let brute = brute_force_circulation(&n);
            assert!(
                (sol.cost - brute).abs() < 1e-9,
                "got {} want {}",
                sol.cost,
                brute
            );
        }
    }

    #[test]
    fn assignment_single_slot_takes_row_max() {
        let costs = vec![vec![1.0], vec![5.0], vec![3.0]];
        let a = h_cardinality_assignment(&costs, 1).unwrap();
        assert_eq!(a, vec![1]);
    }

    #[test]
    fn assignment_matches_brute_force() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..60 {
            let n_subsets = 2 + rng.below(4);
            let h = 1 + rng.below(n_subsets.min(3));
            let costs: Vec<Vec<f64>> = (0..n_subsets)
                .map(|_| (0..h).map(|_| rng.uniform(-5.0, 5.0)).collect())
                .collect();
            let a = h_cardinality_assignment(&costs, h).unwrap();
            let got: f64 = a.iter().enumerate().map(|(k, &s)| costs[s][k]).sum();
            // Brute force over injective slot -> subset maps.
            fn brute(costs: &Vec<Vec<f64>>, k: usize, used: &mut Vec<bool>, h: usize) -> f64 {
                if k == h {
                    return 0.0;
                }
                let mut best = f64::NEG_INFINITY;
                for s in 0..costs.len() {
                    if !used[s] {
                        used[s] = true;
                        let v = costs[s][k] + brute(costs, k + 1, used, h);
                        best = best.max(v);
                        used[s] = false;
                    }
                }
                best
            }
            let want = brute(&costs, 0, &mut vec![false; n_subsets], h);
            assert!((got - want).abs() < 1e-9, "got {} want {}", got, want);
        }
    }

    #[test]
    fn assignment_equal_costs_lowest_index() {
        let costs = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]];
        let a = h_cardinality_assignment(&costs, 2).unwrap();
        assert_eq!(a, vec![0, 1]);
    }

    #[test]
    fn assignment_infeasible_h() {
        // One subset cannot fill two slots.
        let costs = vec![vec![1.0, 2.0]];
        assert!(h_cardinality_assignment(&costs, 2).is_err());
    }

    fn brute_force_mccp(prob: &ArrowCopyProblem) -> f64 {
        let n_j = prob.cost_b.len();
        let n_i1 = prob.cost_r.len();
        let n_i2 = prob.cost_si.len();
        let mut best = f64::INFINITY;
        for bmask in 1u64..(1 << n_j) {
            let chosen: Vec<usize> = (0..n_j).filter(|j| (bmask >> j) & 1 == 1).collect();
            if chosen.len() < prob.min_b.max(1) || chosen.len() > n_i2 {
                continue;
            }
            for rmask in 1u64..(1 << n_i1) {
                let mut base: f64 = chosen.iter().map(|&j| prob.cost_b[j]).sum();
                for i in 0..n_i1 {
                    if (rmask >> i) & 1 == 1 {
                        base += prob.cost_r[i];
                        for &j in &chosen {
                            base += prob.cost_p[i][j];
                        }
                    }
                }
                // Enumerate u: each i in I_2 idle or sending to one chosen j,
                // each chosen j covered.
                fn rec(
                    prob: &ArrowCopyProblem,
                    chosen: &[usize],
                    i: usize,
                    cover: &mut Vec<i64>,
                    acc: f64,
                    best: &mut f64,
                ) {
                    if i == prob.cost_si.len() {
                        if cover.iter().all(|&c| c >= 1) {
                            *best = best.min(acc);
                        }
                        return;
                    }
                    rec(prob, chosen, i + 1, cover, acc, best);
                    for (s, &j) in chosen.iter().enumerate() {
                        cover[s] += 1;
                        rec(
                            prob,
                            chosen,
                            i + 1,
                            cover,
                            acc + prob.cost_si[i] + prob.cost_ij[i][j],
                            best,
                        );
                        cover[s] -= 1;
                    }
                }
                let mut ubest = f64::INFINITY;
                rec(
                    prob,
                    &chosen,
                    0,
                    &mut vec![0; chosen.len()],
                    0.0,
                    &mut ubest,
                );
                if ubest < f64::INFINITY {
                    best = best.min(base + ubest);
                }
            }
        }
        best
    }

    #[test]
    fn integer_mccp_zero_costs() {
        let prob = ArrowCopyProblem {
            cost_si: vec![0.0; 3],
            cost_ij: vec![vec![0.0; 3]; 3],
            cost_r: vec![0.0; 2],
            cost_p: vec![vec![0.0; 3]; 2],
            cost_b: vec![0.0; 3],
            min_b: 1,
            max_enum_bits: 12,
        };
        let sol = solve_integer_mccp(&prob).unwrap();
        assert_eq!(sol.cost, 0.0);
        assert!(sol.is_feasible(&prob));
        assert_eq!(sol.b.iter().filter(|&&b| b).count(), 1);
        assert_eq!(sol.r.iter().filter(|&&r| r).count(), 1);
    }

    #[test]
    fn integer_mccp_matches_brute_force() {
        let mut rng = SplitMix64::new(2024);
        for trial in 0..40 {
            let n_j = 2 + rng.below(2);
            let n_i1 = 1 + rng.below(2);
            let n_i2 = 2 + rng.below(2);
            let prob = ArrowCopyProblem {
                cost_si: (0..n_i2).map(|_| rng.uniform(-1.0, 1.0)).collect(),
                cost_ij: (0..n_i2)
                    .map(|_| (0..n_j).map(|_| rng.uniform(-1.0, 1.0)).collect())
                    .collect(),
                cost_r: (0..n_i1).map(|_| rng.uniform(-1.0, 1.0)).collect(),
                cost_p: (0..n_i1)
                    .map(|_| (0..n_j).map(|_| rng.uniform(-1.0, 1.0)).collect())
                    .collect(),
                cost_b: (0..n_j).map(|_| rng.uniform(-1.0, 1.0)).collect(),
                min_b: 1 + rng.below(2),
                max_enum_bits: 12,
            };
            if prob.min_b.max(1) > n_i2.min(n_j) {
                continue;
            }
            let sol = solve_integer_mccp(&prob).unwrap();
            assert!(sol.is_feasible(&prob), "trial {}", trial);
            let want = brute_force_mccp(&prob);
            assert!(
                (sol.cost - want).abs() < 1e-9,
                "trial {}: got {} want {}",
                trial,
                sol.cost,
                want
            );
        }
    }
}
