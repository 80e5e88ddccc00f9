//! Separation routines for the inequality families and the iterative
//! cutting-plane loop over the McCormick relaxation.
//!
//! Each separator enumerates a small outer key space ((j1, j2) pairs for
//! cycles, (I1, I2, i1, j1) tuples for arrows) and solves a per-key
//! combinatorial subproblem exactly, so the reported maximum violation
//! matches exhaustive search over the family.

use std::collections::HashSet;

use thiserror::Error;

use crate::families;
use crate::instance::{Instance, LinearConstraint, Point, Var};
use crate::netflow::{self, ArrowCopyProblem};
use crate::oracle;
use crate::simplex::{self, LpProblem, LpStatus, SolveOptions};
use crate::transforms;

pub const VIOLATION_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SeparatorError {
    #[error("separator needs at least {0}")]
    TooSmall(String),
    #[error("flow subproblem failed: {0}")]
    Flow(#[from] netflow::FlowError),
    #[error("lp solve failed: {0:?}")]
    Lp(LpStatus),
    #[error("lp error: {0}")]
    LpBuild(#[from] simplex::LpError),
    #[error("round limit {0} reached with violated cuts remaining")]
    RoundLimit(usize),
}

/// A batch of violated cuts with their violations at the separated point and
/// the enumeration key that produced each.
#[derive(Debug, Clone, Default)]
pub struct CutBatch {
    pub cuts: Vec<LinearConstraint>,
    pub violations: Vec<f64>,
    pub family: String,
    pub keys: Vec<String>,
}

impl CutBatch {
    fn new(family: &str) -> Self {
        CutBatch {
            family: family.to_string(),
            ..Default::default()
        }
    }

    fn push(&mut self, inst: &Instance, p: &Point, cut: LinearConstraint, key: String) {
        let viol = cut.violation_at(inst, p);
        debug_assert!(
            viol > 0.0,
            "emitted cut must be violated at the separated point"
        );
        self.cuts.push(cut);
        self.violations.push(viol);
        self.keys.push(key);
    }

    pub fn max_violation(&self) -> f64 {
        self.violations.iter().fold(0.0, |a, &b| a.max(b))
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }
}

/// All RLT rows violated at p beyond the tolerance; in static mode all of
/// them regardless of violation.
pub fn separate_rlt(inst: &Instance, p: &Point, static_mode: bool, tol: f64) -> CutBatch {
    let mut batch = CutBatch::new("rlt");
    for c in families::rlt_inequalities(inst) {
        let viol = c.violation_at(inst, p);
        if static_mode || viol > tol {
            let key = c.tag.clone();
            batch.cuts.push(c);
            batch.violations.push(viol);
            batch.keys.push(key);
        }
    }
    batch
}

/// Greedy per-(j1, j2) cycle separation. With copying the positive-part
/// subsets are selected per subset (falling back to the best single node);
/// without, only singleton selections are allowed. With switchings the run
/// is repeated with all senses swapped, which captures every switching of
/// the family.
pub fn separate_cycle_copy(
    inst: &Instance,
    p: &Point,
    with_copying: bool,
    with_switchings: bool,
    tol: f64,
) -> Result<CutBatch, SeparatorError> {
    if inst.n_subsets() < 2 || inst.ny() < 2 {
        return Err(SeparatorError::TooSmall("2 subsets and 2 y nodes".into()));
    }
    let name = match (with_copying, with_switchings) {
        (true, true) => "cc+s",
        (true, false) => "cc",
        (false, true) => "c+s",
        (false, false) => "c",
    };
    let mut batch = CutBatch::new(name);
    for ja in 0..inst.ny() {
        for jb in 0..inst.ny() {
            if ja == jb {
                continue;
            }
            // Upper-bound orientation: emit when phi1 + phi2 > y_ja.
            cycle_pair(inst, p, ja, jb, with_copying, false, tol, &mut batch);
            if with_switchings {
                // Swapped senses: the lower-bound (switched) orientation.
                cycle_pair(inst, p, ja, jb, with_copying, true, tol, &mut batch);
            }
        }
    }
    Ok(batch)
}

#[allow(clippy::too_many_arguments)]
fn cycle_pair(
    inst: &Instance,
    p: &Point,
    ja: usize,
    jb: usize,
    with_copying: bool,
    swapped: bool,
    tol: f64,
    batch: &mut CutBatch,
) {
    // v1_i: contribution of i to the z-only role, v2_i: to the -x role.
    // In swapped mode both are minimized instead.
    let sign = if swapped { -1.0 } else { 1.0 };
    let mut best1: Vec<(f64, Vec<usize>)> = Vec::with_capacity(inst.n_subsets());
    let mut best2: Vec<(f64, Vec<usize>)> = Vec::with_capacity(inst.n_subsets());
    for subset in inst.subsets() {
        let v1: Vec<f64> = subset
            .iter()
            .map(|&i| sign * (p.z(inst, i, ja) - p.z(inst, i, jb)))
            .collect();
        let v2: Vec<f64> = subset
            .iter()
            .map(|&i| sign * (-p.x(inst, i) + p.z(inst, i, ja) + p.z(inst, i, jb)))
            .collect();
        best1.push(select(subset, &v1, with_copying));
        best2.push(select(subset, &v2, with_copying));
    }
    // Best pair of distinct subsets for the two roles.
    let mut choice: Option<(f64, usize, usize)> = None;
    for s1 in 0..inst.n_subsets() {
        for s2 in 0..inst.n_subsets() {
            if s1 == s2 {
                continue;
            }
            let total = best1[s1].0 + best2[s2].0;
            if choice.map_or(true, |(b, _, _)| total > b) {
                choice = Some((total, s1, s2));
            }
        }
    }
    let Some((total, s1, s2)) = choice else { return };
    let violation = if swapped {
        // f >= -1 orientation: violated when f < -1, i.e. -total - y < -1.
        -(-total - p.y(inst, ja)) - 1.0
    } else {
        total - p.y(inst, ja)
    };
    if violation <= tol {
        return;
    }
    // Family member: cycle (I_s1, j_b, I_s2, j_a) with the selections.
    let spec = families::CycleSpec {
        subsets: vec![s1, s2],
        ys: vec![jb, ja],
        selections: vec![best1[s1].1.clone(), best2[s2].1.clone()],
    };
    let base = families::cycle_copy_inequality(inst, &spec).expect("selection is well-formed");
    let cut = if swapped {
        transforms::switch(inst, &base, &[ja, jb]).expect("y nodes")
    } else {
        base
    };
    debug_assert!((cut.violation_at(inst, p) - violation).abs() < 1e-9);
    batch.push(
        inst,
        p,
        cut,
        format!("j{}-j{}{}", ja, jb, if swapped { "-s" } else { "" }),
    );
}

/// Positive-part subset (or best singleton fallback / forced singleton).
fn select(subset: &[usize], values: &[f64], allow_sets: bool) -> (f64, Vec<usize>) {
    if allow_sets {
        let chosen: Vec<usize> = subset
            .iter()
            .zip(values.iter())
            .filter(|&(_, &v)| v > 0.0)
            .map(|(&i, _)| i)
            .collect();
        if !chosen.is_empty() {
            let total = values.iter().filter(|&&v| v > 0.0).sum();
            return (total, chosen);
        }
    }
    let mut arg = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[arg] {
            arg = k;
        }
    }
    (values[arg], vec![subset[arg]])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrowVariant {
    Arrow1,
    Arrow2,
}

/// Minimum-cost matchings of every cardinality on a complete bipartite cost
/// matrix, by successive shortest augmenting paths; profile[k] is the best
/// total cost of a size-k matching together with its pairs.
fn matching_profile(costs: &[Vec<f64>]) -> Vec<(f64, Vec<(usize, usize)>)> {
    let n_left = costs.len();
    let n_right = costs.first().map_or(0, |r| r.len());
    let max_k = n_left.min(n_right);
    let mut profile = vec![(0.0, Vec::new())];
    // Flow network: source -> left -> right -> sink, unit capacities.
    let src = n_left + n_right;
    let sink = src + 1;
    let mut arcs = Vec::new();
    for i in 0..n_left {
        arcs.push(netflow::Arc {
            from: src,
            to: i,
            cap: 1,
            cost: 0.0,
        });
    }
    let mut pair_arc = vec![vec![0usize; n_right]; n_left];
    for i in 0..n_left {
        for j in 0..n_right {
            pair_arc[i][j] = arcs.len();
            arcs.push(netflow::Arc {
                from: i,
                to: n_left + j,
                cap: 1,
                cost: costs[i][j],
            });
        }
    }
    for j in 0..n_right {
        arcs.push(netflow::Arc {
            from: n_left + j,
            to: sink,
            cap: 1,
            cost: 0.0,
        });
    }
    let network = netflow::Network {
        n_nodes: sink + 1,
        arcs,
    };
    for k in 1..=max_k {
        let mut supply = vec![0i64; network.n_nodes];
        supply[src] = k as i64;
        supply[sink] = -(k as i64);
        let Ok(sol) = netflow::min_cost_flow(&network, &supply) else {
            break;
        };
        let mut pairs = Vec::with_capacity(k);
        for i in 0..n_left {
            for j in 0..n_right {
                if sol.flow[pair_arc[i][j]] == 1 {
                    pairs.push((i, j));
                }
            }
        }
        profile.push((sol.cost, pairs));
    }
    profile
}

/// Arrow separation for one enumeration key on transformed coordinates.
/// Pair costs cover the base families and, in switching mode, the per-j
/// choice between the plain and the switched branch of the split graph.
#[allow(clippy::too_many_arguments)]
fn arrow_key(
    inst: &Instance,
    p: &Point,
    variant: ArrowVariant,
    s1: usize,
    s2: usize,
    i1: usize,
    j1: usize,
    with_switch: bool,
    j1_switched: bool,
    tol: f64,
    batch: &mut CutBatch,
) {
    // Transformed coordinates: the point with y_j1 switched when requested.
    let zq = |i: usize, j: usize| {
        if j1_switched && j == j1 {
            p.x(inst, i) - p.z(inst, i, j)
        } else {
            p.z(inst, i, j)
        }
    };
    let yq = |j: usize| {
        if j1_switched && j == j1 {
            1.0 - p.y(inst, j)
        } else {
            p.y(inst, j)
        }
    };
    let others: &[usize] = &inst.subsets()[s2];
    let js: Vec<usize> = (0..inst.ny()).filter(|&j| j != j1).collect();
    // Pair cost of matching i (in I2) with j; in switching mode take the
    // cheaper of the plain and the j-switched branch.
    let cost = |i: usize, j: usize| -> (f64, bool) {
        let plain = match variant {
            ArrowVariant::Arrow1 => {
                p.x(inst, i1) - zq(i1, j) - zq(i, j1) + zq(i, j)
            }
            ArrowVariant::Arrow2 => yq(j) - zq(i1, j) + zq(i, j1) - zq(i, j),
        };
        if !with_switch {
            return (plain, false);
        }
        let switched = match variant {
            ArrowVariant::Arrow1 => {
                p.x(inst, i) - zq(i, j) + zq(i1, j) - zq(i, j1)
            }
            ArrowVariant::Arrow2 => {
                1.0 - yq(j) - p.x(inst, i1) + zq(i1, j) + zq(i, j1) - p.x(inst, i) + zq(i, j)
            }
        };
        if switched < plain {
            (switched, true)
        } else {
            (plain, false)
        }
    };
    let cost_matrix: Vec<Vec<f64>> = others
        .iter()
        .map(|&i| js.iter().map(|&j| cost(i, j).0).collect())
        .collect();
    let profile = matching_profile(&cost_matrix);
    // Family members need m >= 3, i.e. at least 2 matched pairs.
    let base_term = match variant {
        ArrowVariant::Arrow1 => yq(j1) - zq(i1, j1),
        ArrowVariant::Arrow2 => p.x(inst, i1) - zq(i1, j1),
    };
    let mut best: Option<(f64, &(f64, Vec<(usize, usize)>))> = None;
    for entry in profile.iter().skip(2) {
        let total = entry.0 + base_term;
        if best.as_ref().map_or(true, |&(b, _)| total < b) {
            best = Some((total, entry));
        }
    }
    let Some((total, entry)) = best else { return };
    if total >= -tol {
        return;
    }
    let mut sel_others = Vec::with_capacity(entry.1.len());
    let mut sel_js = Vec::with_capacity(entry.1.len());
    let mut switched_js = Vec::new();
    for &(li, rj) in &entry.1 {
        sel_others.push(others[li]);
        sel_js.push(js[rj]);
        if with_switch && cost(others[li], js[rj]).1 {
            switched_js.push(js[rj]);
        }
    }
    let mut ys = vec![j1];
    ys.extend(sel_js.iter().copied());
    let base = match variant {
        ArrowVariant::Arrow1 => families::arrow1_inequality(inst, i1, &sel_others, &ys),
        ArrowVariant::Arrow2 => families::arrow2_inequality(inst, i1, &sel_others, &ys),
    }
    .expect("selection is well-formed");
    let cut = if with_switch || j1_switched {
        let mut hat = switched_js;
        if j1_switched {
            hat.push(j1);
        }
        transforms::switch(inst, &base, &hat).expect("y nodes")
    } else {
        base
    };
    debug_assert!(
        (cut.violation_at(inst, p) - (-total)).abs() < 1e-9,
        "violation mismatch: cut {} vs subproblem {}",
        cut.violation_at(inst, p),
        -total
    );
    batch.push(
        inst,
        p,
        cut,
        format!(
            "I{}-I{}-i{}-j{}{}",
            s1,
            s2,
            i1,
            j1,
            if j1_switched { "-s" } else { "" }
        ),
    );
}

/// Most violated arrow inequality per (I1, I2, i1, j1) via the min-cost
/// matching subproblem; matchings below 2 pairs are not family members and
/// are skipped.
pub fn separate_arrow(
    inst: &Instance,
    p: &Point,
    variant: ArrowVariant,
    tol: f64,
) -> Result<CutBatch, SeparatorError> {
    arrow_driver(inst, p, variant, false, tol)
}

/// Arrow separation over all switchings: the per-j split-graph choice plus
/// the doubled outer loop over the j1 switch.
pub fn separate_arrow_switch(
    inst: &Instance,
    p: &Point,
    variant: ArrowVariant,
    tol: f64,
) -> Result<CutBatch, SeparatorError> {
    arrow_driver(inst, p, variant, true, tol)
}

fn arrow_driver(
    inst: &Instance,
    p: &Point,
    variant: ArrowVariant,
    with_switch: bool,
    tol: f64,
) -> Result<CutBatch, SeparatorError> {
    if inst.n_subsets() < 2 || inst.ny() < 3 {
        return Err(SeparatorError::TooSmall("2 subsets and 3 y nodes".into()));
    }
    let name = match (variant, with_switch) {
        (ArrowVariant::Arrow1, false) => "a1",
        (ArrowVariant::Arrow1, true) => "a1s",
        (ArrowVariant::Arrow2, false) => "a2",
        (ArrowVariant::Arrow2, true) => "a2s",
    };
    let mut batch = CutBatch::new(name);
    for s1 in 0..inst.n_subsets() {
        for s2 in 0..inst.n_subsets() {
            if s1 == s2 || inst.subsets()[s2].len() < 2 {
                continue;
            }
            for &i1 in &inst.subsets()[s1] {
                for j1 in 0..inst.ny() {
                    arrow_key(
                        inst, p, variant, s1, s2, i1, j1, with_switch, false, tol, &mut batch,
                    );
                    if with_switch {
                        arrow_key(
                            inst, p, variant, s1, s2, i1, j1, with_switch, true, tol, &mut batch,
                        );
                    }
                }
            }
        }
    }
    Ok(batch)
}

/// Arrow+copying separation: per (I1, I2, j1) the integer circulation
/// subproblem chooses the y nodes, the S_1 replica set and the disjoint
/// S_2..S_m groups jointly.
pub fn separate_arrow_copy(
    inst: &Instance,
    p: &Point,
    variant: ArrowVariant,
    tol: f64,
    max_enum_bits: usize,
) -> Result<CutBatch, SeparatorError> {
    if inst.n_subsets() < 2 || inst.ny() < 3 {
        return Err(SeparatorError::TooSmall("2 subsets and 3 y nodes".into()));
    }
    let name = match variant {
        ArrowVariant::Arrow1 => "a1c",
        ArrowVariant::Arrow2 => "a2c",
    };
    let mut batch = CutBatch::new(name);
    for s1 in 0..inst.n_subsets() {
        for s2 in 0..inst.n_subsets() {
            if s1 == s2 || inst.subsets()[s2].len() < 2 {
                continue;
            }
            for j1 in 0..inst.ny() {
                arrow_copy_key(inst, p, variant, s1, s2, j1, tol, max_enum_bits, &mut batch)?;
            }
        }
    }
    Ok(batch)
}

#[allow(clippy::too_many_arguments)]
fn arrow_copy_key(
    inst: &Instance,
    p: &Point,
    variant: ArrowVariant,
    s1: usize,
    s2: usize,
    j1: usize,
    tol: f64,
    max_enum_bits: usize,
    batch: &mut CutBatch,
) -> Result<(), SeparatorError> {
    let i1s = &inst.subsets()[s1];
    let i2s = &inst.subsets()[s2];
    let js: Vec<usize> = (0..inst.ny()).filter(|&j| j != j1).collect();
    let prob = match variant {
        ArrowVariant::Arrow1 => ArrowCopyProblem {
            cost_si: i2s.iter().map(|&i| -p.z(inst, i, j1)).collect(),
            cost_ij: i2s
                .iter()
                .map(|&i| js.iter().map(|&j| p.z(inst, i, j)).collect())
                .collect(),
            cost_r: i1s.iter().map(|&i| -p.z(inst, i, j1)).collect(),
            cost_p: i1s
                .iter()
                .map(|&i| {
                    js.iter()
                        .map(|&j| p.x(inst, i) - p.z(inst, i, j))
                        .collect()
                })
                .collect(),
            cost_b: vec![0.0; js.len()],
            min_b: 2,
            max_enum_bits,
        },
        ArrowVariant::Arrow2 => ArrowCopyProblem {
            cost_si: i2s.iter().map(|&i| p.z(inst, i, j1)).collect(),
            cost_ij: i2s
                .iter()
                .map(|&i| js.iter().map(|&j| -p.z(inst, i, j)).collect())
                .collect(),
            cost_r: i1s
                .iter()
                .map(|&i| p.x(inst, i) - p.z(inst, i, j1))
                .collect(),
            cost_p: i1s
                .iter()
                .map(|&i| js.iter().map(|&j| -p.z(inst, i, j)).collect())
                .collect(),
            cost_b: js.iter().map(|&j| p.y(inst, j)).collect(),
            min_b: 2,
            max_enum_bits,
        },
    };
    if i2s.len() < 2 {
        return Ok(());
    }
    let sol = match netflow::solve_integer_mccp(&prob) {
        Ok(sol) => sol,
        Err(netflow::FlowError::InfeasibleAssignment(_, _)) => return Ok(()),
        Err(e) => return Err(e.into()),
    };
    let value = match variant {
        ArrowVariant::Arrow1 => sol.cost + p.y(inst, j1),
        ArrowVariant::Arrow2 => sol.cost,
    };
    if value >= -tol {
        return Ok(());
    }
    let sel_s1: Vec<usize> = i1s
        .iter()
        .zip(sol.r.iter())
        .filter(|&(_, &r)| r)
        .map(|(&i, _)| i)
        .collect();
    let chosen_js: Vec<usize> = js
        .iter()
        .zip(sol.b.iter())
        .filter(|&(_, &b)| b)
        .map(|(&j, _)| j)
        .collect();
    let mut groups: Vec<Vec<usize>> = Vec::with_capacity(chosen_js.len());
    for (cj, &j) in js.iter().enumerate() {
        if !chosen_js.contains(&j) {
            continue;
        }
        let group: Vec<usize> = i2s
            .iter()
            .enumerate()
            .filter(|&(ii, _)| sol.u_ij[ii][cj] == 1)
            .map(|(_, &i)| i)
            .collect();
        groups.push(group);
    }
    let mut ys = vec![j1];
    ys.extend(chosen_js.iter().copied());
    let cut = match variant {
        ArrowVariant::Arrow1 => families::arrow1_copy_inequality(inst, &sel_s1, &groups, &ys),
        ArrowVariant::Arrow2 => families::arrow2_copy_inequality(inst, &sel_s1, &groups, &ys),
    }
    .expect("subproblem solution is well-formed");
    debug_assert!(
        (cut.violation_at(inst, p) - (-value)).abs() < 1e-9,
        "violation mismatch: cut {} vs subproblem {}",
        cut.violation_at(inst, p),
        -value
    );
    batch.push(inst, p, cut, format!("I{}-I{}-j{}", s1, s2, j1));
    Ok(())
}

/// Coefficient rule of a 0-lifted family with bounded y-support, for the
/// assignment-based separation template.
#[derive(Debug, Clone, Copy)]
pub enum LiftedFamily {
    Bell,
    /// The 4-cycle family in template form (m = h = 2).
    Cycle,
}

impl LiftedFamily {
    fn h(&self, m: usize) -> usize {
        match self {
            LiftedFamily::Bell | LiftedFamily::Cycle => m,
        }
    }

    fn x_coeff(&self, m: usize, slot: usize) -> f64 {
        match self {
            LiftedFamily::Bell => -((m - slot - 1) as f64),
            LiftedFamily::Cycle => {
                if slot == 0 {
                    0.0
                } else {
                    -1.0
                }
            }
        }
    }

    fn z_coeff(&self, m: usize, slot: usize, yp: usize) -> f64 {
        match self {
            LiftedFamily::Bell => {
                let p = slot + 1;
                let k = yp + 1;
                if p + k < m + 2 {
                    1.0
                } else if p + k == m + 2 && p >= 2 && k >= 2 {
                    -1.0
                } else {
                    0.0
                }
            }
            LiftedFamily::Cycle => match (slot, yp) {
                (0, 0) => -1.0,
                (0, 1) => 1.0,
                (1, _) => 1.0,
                _ => 0.0,
            },
        }
    }

    fn y_coeff(&self, _m: usize, yp: usize) -> f64 {
        match self {
            LiftedFamily::Bell => {
                if yp == 0 {
                    -1.0
                } else {
                    0.0
                }
            }
            LiftedFamily::Cycle => {
                if yp == 1 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn rhs(&self) -> f64 {
        0.0
    }
}

/// Assignment-template separation for 0-lifted families whose coefficients
/// are fixed by the (i_1..i_h, j_1..j_m) selection. With copying the per-slot
/// contribution is the sum of the subset's positive contributions instead of
/// the best single node.
pub fn separate_lifted_family(
    inst: &Instance,
    p: &Point,
    family: LiftedFamily,
    m: usize,
    with_copying: bool,
    tol: f64,
) -> Result<CutBatch, SeparatorError> {
    let h = family.h(m);
    if m > inst.ny() || h > inst.n_subsets() {
        return Err(SeparatorError::TooSmall(format!(
            "{} y nodes and {} subsets",
            m, h
        )));
    }
    let mut batch = CutBatch::new("lifted");
    let mut ys = Vec::with_capacity(m);
    lifted_recurse(inst, p, family, m, h, with_copying, tol, &mut ys, &mut batch)?;
    Ok(batch)
}

#[allow(clippy::too_many_arguments)]
fn lifted_recurse(
    inst: &Instance,
    p: &Point,
    family: LiftedFamily,
    m: usize,
    h: usize,
    with_copying: bool,
    tol: f64,
    ys: &mut Vec<usize>,
    batch: &mut CutBatch,
) -> Result<(), SeparatorError> {
    if ys.len() < m {
        for j in 0..inst.ny() {
            if ys.contains(&j) {
                continue;
            }
            ys.push(j);
            lifted_recurse(inst, p, family, m, h, with_copying, tol, ys, batch)?;
            ys.pop();
        }
        return Ok(());
    }
    // Slot costs c^I_k with the chosen selection per (subset, slot).
    let node_contrib = |i: usize, k: usize| -> f64 {
        let mut v = family.x_coeff(m, k) * p.x(inst, i);
        for (yp, &j) in ys.iter().enumerate() {
            let coeff = family.z_coeff(m, k, yp);
            if coeff != 0.0 {
                v += coeff * p.z(inst, i, j);
            }
        }
        v
    };
    let mut costs = vec![vec![0.0; h]; inst.n_subsets()];
    let mut selections: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); h]; inst.n_subsets()];
    for (s, subset) in inst.subsets().iter().enumerate() {
        for k in 0..h {
            let vals: Vec<f64> = subset.iter().map(|&i| node_contrib(i, k)).collect();
            let (c, sel) = select(subset, &vals, with_copying);
            costs[s][k] = c;
            selections[s][k] = sel;
        }
    }
    let assignment = netflow::h_cardinality_assignment(&costs, h)?;
    let o: f64 = assignment
        .iter()
        .enumerate()
        .map(|(k, &s)| costs[s][k])
        .sum();
    let v: f64 = ys
        .iter()
        .enumerate()
        .map(|(yp, &j)| family.y_coeff(m, yp) * p.y(inst, j))
        .sum();
    if o + v <= family.rhs() + tol {
        return Ok(());
    }
    // Emit the member.
    let mut terms: Vec<(Var, f64)> = Vec::new();
    for (yp, &j) in ys.iter().enumerate() {
        let coeff = family.y_coeff(m, yp);
        if coeff != 0.0 {
            terms.push((Var::Y(j), coeff));
        }
    }
    for (k, &s) in assignment.iter().enumerate() {
        for &i in &selections[s][k] {
            let xc = family.x_coeff(m, k);
            if xc != 0.0 {
                terms.push((Var::X(i), xc));
            }
            for (yp, &j) in ys.iter().enumerate() {
                let zc = family.z_coeff(m, k, yp);
                if zc != 0.0 {
                    terms.push((Var::Z(i, j), zc));
                }
            }
        }
    }
    let cut = LinearConstraint::le(inst, terms, family.rhs(), "lifted");
    batch.push(
        inst,
        p,
        cut,
        format!("{:?}", ys),
    );
    Ok(())
}

/// Cut classes of the loop, named as in the experiment tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CutClass {
    Rlt,
    C,
    Cc,
    A1,
    A1s,
    A1c,
    A2,
    A2s,
    A2c,
}

impl CutClass {
    pub fn parse(s: &str) -> Option<CutClass> {
        match s {
            "rlt" => Some(CutClass::Rlt),
            "c" => Some(CutClass::C),
            "cc" => Some(CutClass::Cc),
            "a1" => Some(CutClass::A1),
            "a1s" => Some(CutClass::A1s),
            "a1c" => Some(CutClass::A1c),
            "a2" => Some(CutClass::A2),
            "a2s" => Some(CutClass::A2s),
            "a2c" => Some(CutClass::A2c),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CutClass::Rlt => "rlt",
            CutClass::C => "c",
            CutClass::Cc => "cc",
            CutClass::A1 => "a1",
            CutClass::A1s => "a1s",
            CutClass::A1c => "a1c",
            CutClass::A2 => "a2",
            CutClass::A2s => "a2s",
            CutClass::A2c => "a2c",
        }
    }

    /// The classes behind the experiments' "all" row.
    pub fn all() -> Vec<CutClass> {
        vec![
            CutClass::Rlt,
            CutClass::Cc,
            CutClass::A1s,
            CutClass::A1c,
            CutClass::A2s,
            CutClass::A2c,
        ]
    }
}

#[derive(Debug, Clone)]
pub struct LoopConfig {
    pub tol: f64,
    pub round_limit: usize,
    pub max_enum_bits: usize,
    /// Verify each added cut against the vertex oracle (exhaustive y-pattern
    /// check); panics on an invalid cut. Test instrumentation.
    pub validate_cuts: bool,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            tol: VIOLATION_TOL,
            round_limit: 50,
            max_enum_bits: 12,
            validate_cuts: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RoundStats {
    pub round: usize,
    pub lp_value: f64,
    /// (class name, cuts added this round).
    pub cuts_added: Vec<(String, usize)>,
}

#[derive(Debug, Clone)]
pub struct LoopReport {
    pub rounds: Vec<RoundStats>,
    pub lp_value: f64,
    pub ip_value: f64,
    pub gap_percent: f64,
    pub total_cuts: Vec<(String, usize)>,
    pub hit_round_limit: bool,
    /// Every cut added across all rounds.
    pub cuts: Vec<LinearConstraint>,
}

pub fn gap_percent(lp: f64, ip: f64) -> f64 {
    if ip.abs() < 1e-12 {
        if lp.abs() < 1e-9 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        100.0 * (lp - ip) / ip.abs()
    }
}

/// Iterative separation loop: McCormick relaxation (all RLT rows added up
/// front when the class list includes rlt), then solve / separate every
/// class / add the deduplicated violated cuts until a round adds nothing.
pub fn cutting_loop(
    inst: &Instance,
    objective: &[f64],
    classes: &[CutClass],
    config: &LoopConfig,
) -> Result<LoopReport, SeparatorError> {
    let mut lp = simplex::mccormick_relaxation(inst, objective);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut total_cuts: Vec<(String, usize)> = Vec::new();
    let mut all_cuts: Vec<LinearConstraint> = Vec::new();
    if classes.contains(&CutClass::Rlt) {
        let zero = Point::zeros(inst);
        let batch = separate_rlt(inst, &zero, true, config.tol);
        let mut n = 0;
        for cut in batch.cuts {
            if seen.insert(cut.canonical_key(inst)) {
                lp.add_constraint(inst, &cut.normalized_le(inst));
                all_cuts.push(cut);
                n += 1;
            }
        }
        total_cuts.push(("rlt".into(), n));
    }
    // Warm-started solver: cut rounds append rows and re-optimize dually;
    // a stall falls back to a from-scratch solve of the accumulated LP.
    let opts = SolveOptions::default();
    let mut inc = match simplex::IncrementalLp::new(&lp, &opts) {
        Some(Ok((inc, LpStatus::Optimal))) => Some(inc),
        Some(Ok((_, status))) => return Err(SeparatorError::Lp(status)),
        Some(Err(e)) => return Err(e.into()),
        None => None,
    };
    let mut rounds = Vec::new();
    let mut last_value = f64::INFINITY;
    let mut hit_round_limit = false;
    let mut final_value = f64::NAN;
    for round in 0.. {
        if round >= config.round_limit {
            hit_round_limit = true;
            break;
        }
        let (value, point) = match &inc {
            Some(inc) => (inc.value(), Point { values: inc.point() }),
            None => {
                let sol = solve_or_err(&lp)?;
                let point = simplex::solution_point(inst, &sol);
                (sol.value, point)
            }
        };
        // A valid-cut loop on a max LP cannot increase the value.
        debug_assert!(value <= last_value + 1e-6);
        last_value = value;
        final_value = value;
        let mut added = Vec::new();
        let mut new_cuts: Vec<LinearConstraint> = Vec::new();
        for class in classes {
            if *class == CutClass::Rlt {
                continue;
            }
            let batch = run_class(inst, &point, *class, config)?;
            let mut n = 0;
            for cut in batch.cuts {
                if seen.insert(cut.canonical_key(inst)) {
                    if config.validate_cuts {
                        let verdict = oracle::is_valid(inst, &cut);
                        assert!(
                            verdict.valid,
                            "separator {} emitted an invalid cut",
                            class.name()
                        );
                    }
                    new_cuts.push(cut.clone());
                    all_cuts.push(cut);
                    n += 1;
                }
            }
            added.push((class.name().to_string(), n));
            bump(&mut total_cuts, class.name(), n);
        }
        rounds.push(RoundStats {
            round,
            lp_value: value,
            cuts_added: added,
        });
        if new_cuts.is_empty() {
            break;
        }
        let rows: Vec<(Vec<(usize, f64)>, f64)> = new_cuts
            .iter()
            .map(|c| {
                let norm = c.normalized_le(inst);
                let terms = norm
                    .terms
                    .iter()
                    .map(|&(v, coeff)| (inst.var_index(v), coeff))
                    .collect();
                (terms, norm.rhs)
            })
            .collect();
        for (terms, rhs) in &rows {
            lp.add_row(terms.clone(), crate::instance::Sense::Le, *rhs);
        }
        if let Some(solver) = inc.as_mut() {
            match solver.add_cuts_and_reoptimize(&rows, &opts) {
                simplex::IncrementalOutcome::Optimal => {}
                simplex::IncrementalOutcome::Stalled => {
                    // Rebuild from scratch next round.
                    inc = match simplex::IncrementalLp::new(&lp, &opts) {
                        Some(Ok((fresh, LpStatus::Optimal))) => Some(fresh),
                        _ => None,
                    };
                }
                simplex::IncrementalOutcome::Infeasible
                | simplex::IncrementalOutcome::Unbounded => {
                    return Err(SeparatorError::Lp(LpStatus::Infeasible));
                }
            }
        }
    }
    let (ip_value, _) = oracle::integer_optimum(inst, objective);
    Ok(LoopReport {
        rounds,
        lp_value: final_value,
        ip_value,
        gap_percent: gap_percent(final_value, ip_value),
        total_cuts,
        hit_round_limit,
        cuts: all_cuts,
    })
}

fn bump(totals: &mut Vec<(String, usize)>, name: &str, n: usize) {
    if let Some(entry) = totals.iter_mut().find(|(k, _)| k == name) {
        entry.1 += n;
    } else {
        totals.push((name.to_string(), n));
    }
}

fn solve_or_err(lp: &LpProblem) -> Result<simplex::LpSolution<f64>, SeparatorError> {
    let sol = simplex::solve_with::<f64>(lp, &SolveOptions::default())?;
    if sol.status != LpStatus::Optimal {
        return Err(SeparatorError::Lp(sol.status));
    }
    Ok(sol)
}

fn run_class(
    inst: &Instance,
    point: &Point,
    class: CutClass,
    config: &LoopConfig,
) -> Result<CutBatch, SeparatorError> {
    match class {
        CutClass::Rlt => Ok(separate_rlt(inst, point, false, config.tol)),
        CutClass::C => separate_cycle_copy(inst, point, false, true, config.tol),
        CutClass::Cc => separate_cycle_copy(inst, point, true, true, config.tol),
        CutClass::A1 => separate_arrow(inst, point, ArrowVariant::Arrow1, config.tol),
        CutClass::A1s => separate_arrow_switch(inst, point, ArrowVariant::Arrow1, config.tol),
        CutClass::A1c => separate_arrow_copy(
            inst,
            point,
            ArrowVariant::Arrow1,
            config.tol,
            config.max_enum_bits,
        ),
        CutClass::A2 => separate_arrow(inst, point, ArrowVariant::Arrow2, config.tol),
        CutClass::A2s => separate_arrow_switch(inst, point, ArrowVariant::Arrow2, config.tol),
        CutClass::A2c => separate_arrow_copy(
            inst,
            point,
            ArrowVariant::Arrow2,
            config.tol,
            config.max_enum_bits,
        ),
    }
}

/// CSV rows for a batch of loop reports (one row per round and class, plus a
/// summary row per seed).
pub fn report_csv(instance: &str, runs: &[(u64, String, LoopReport)]) -> String {
    let mut out = String::from("instance,seed,classes,round,class,cuts_added,lp_value,ip_value,gap_percent\n");
    for (seed, classes, report) in runs {
        for r in &report.rounds {
            for (class, n) in &r.cuts_added {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{:.6},{:.6},{:.4}\n",
                    instance, seed, classes, r.round, class, n, r.lp_value, report.ip_value,
                    gap_percent(r.lp_value, report.ip_value),
                ));
            }
        }
        out.push_str(&format!(
            "{},{},{},summary,,,{:.6},{:.6},{:.4}\n",
            instance, seed, classes, report.lp_value, report.ip_value, report.gap_percent
        ));
    }
    out
}
