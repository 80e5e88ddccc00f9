//! Validity- and facet-preserving operations on constraints: switching on a
//! subset of Y, copying of per-node coefficient tuples within a subset,
//! extension/restriction between instances, within-subset permutations, and
//! the affine map between the equality-constrained and inequality-constrained
//! variable spaces.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::instance::{Instance, InstanceError, LinearConstraint, Point, Sense, Var};

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("node {0} is not a Y node of the instance")]
    NotAyNode(usize),
    #[error("cannot switch an equation")]
    SwitchEquation,
    #[error("copying requires equal neighbourhoods within each reassigned subset")]
    NeighbourhoodMismatch,
    #[error("assignment references tuple {0} outside H^I of subset {1}")]
    UnknownTuple(usize, usize),
    #[error("assignment is not structure-preserving: tuple {0} of subset {1} unused")]
    NotStructurePreserving(usize, usize),
    #[error("assignment arity does not match the partition")]
    BadAssignmentShape,
    #[error("permutation must map subsets onto subsets of equal neighbourhood")]
    BadPermutation,
    #[error("instance mismatch: {0}")]
    Instance(#[from] InstanceError),
    #[error("{0} is not an induced subinstance of {1}")]
    NotInduced(String, String),
    #[error("partitions are not compatible between the two instances")]
    IncompatiblePartition,
    #[error("slack node {0} is not in subset {1}")]
    SlackOutsideSubset(usize, usize),
}

/// Switching on hatY ⊆ Y: for a <=-inequality, replaces
/// a_i by a_i + sum_{j in hatY} a_ij, negates a_j and a_ij for j in hatY,
/// and replaces b by b - sum_{j in hatY} a_j. Involutive for fixed hatY.
/// Ge rows are normalized to Le first.
pub fn switch(
    inst: &Instance,
    c: &LinearConstraint,
    hat_y: &[usize],
) -> Result<LinearConstraint, TransformError> {
    for &j in hat_y {
        if j >= inst.ny() {
            return Err(TransformError::NotAyNode(j));
        }
    }
    let work = c.normalized_le(inst);
    let mut in_hat = vec![false; inst.ny()];
    for &j in hat_y {
        in_hat[j] = true;
    }
    let mut terms: Vec<(Var, f64)> = Vec::with_capacity(work.terms.len() + hat_y.len());
    let mut rhs = work.rhs;
    for &(v, a) in &work.terms {
        match v {
            Var::X(_) => terms.push((v, a)),
            Var::Y(j) => {
                if in_hat[j] {
                    terms.push((v, -a));
                    rhs -= a;
                } else {
                    terms.push((v, a));
                }
            }
            Var::Z(i, j) => {
                if in_hat[j] {
                    terms.push((v, -a));
                    terms.push((Var::X(i), a));
                } else {
                    terms.push((v, a));
                }
            }
        }
    }
    Ok(LinearConstraint::new(
        inst,
        terms,
        work.sense,
        rhs,
        work.tag,
    ))
}

/// The switching maximizing lhs - rhs at p, found by deciding each j in Y
/// independently (the effect of each j on the slack is separable). Ties
/// prefer the unswitched choice.
pub fn best_switching(
    inst: &Instance,
    c: &LinearConstraint,
    p: &Point,
) -> Result<LinearConstraint, TransformError> {
    let work = c.normalized_le(inst);
    let mut delta = vec![0.0; inst.ny()];
    for &(v, a) in &work.terms {
        match v {
            Var::X(_) => {}
            Var::Y(j) => delta[j] += a * (1.0 - 2.0 * p.y(inst, j)),
            Var::Z(i, j) => delta[j] += a * (p.x(inst, i) - 2.0 * p.z(inst, i, j)),
        }
    }
    let hat: Vec<usize> = (0..inst.ny()).filter(|&j| delta[j] > 0.0).collect();
    switch(inst, &work, &hat)
}

/// Per-node coefficient tuple (a_i, a_ij for j in N(i)); comparable only
/// between nodes with equal neighbourhoods.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTuple {
    pub x: f64,
    /// Edge coefficients in ascending j order over N(i).
    pub z: Vec<f64>,
}

/// The distinct coefficient tuples of a subset in a source constraint: index
/// 0 is the all-zero tuple, the rest follow in order of first occurrence.
#[derive(Debug, Clone)]
pub struct TupleSet {
    pub tuples: Vec<CoeffTuple>,
    /// First node of the subset carrying each tuple (index 0 may have none).
    pub first_carrier: Vec<Option<usize>>,
    /// Tuple index carried by each node of the subset, in subset order.
    pub node_tuple: Vec<usize>,
}

fn tuple_of(inst: &Instance, c: &LinearConstraint, i: usize) -> CoeffTuple {
    CoeffTuple {
        x: c.coeff(Var::X(i)),
        z: inst
            .neighbours_of_x(i)
            .iter()
            .map(|&j| c.coeff(Var::Z(i, j)))
            .collect(),
    }
}

/// Collects H^I per subset for a constraint.
pub fn tuple_sets(inst: &Instance, c: &LinearConstraint) -> Vec<TupleSet> {
    inst.subsets()
        .iter()
        .map(|subset| {
            let mut tuples = vec![CoeffTuple {
                x: 0.0,
                z: vec![0.0; inst.neighbours_of_x(subset[0]).len()],
            }];
            let mut first_carrier: Vec<Option<usize>> = vec![None];
            let mut node_tuple = Vec::with_capacity(subset.len());
            for &i in subset {
                let t = tuple_of(inst, c, i);
                let idx = match tuples.iter().position(|u| *u == t) {
                    Some(idx) => idx,
                    None => {
                        tuples.push(t);
                        first_carrier.push(Some(i));
                        tuples.len() - 1
                    }
                };
                if first_carrier[idx].is_none() && idx != 0 {
                    first_carrier[idx] = Some(i);
                }
                node_tuple.push(idx);
            }
            TupleSet {
                tuples,
                first_carrier,
                node_tuple,
            }
        })
        .collect()
}

/// A copying: per subset, the tuple index assigned to each node (in subset
/// order). Valid assignments are structure-preserving: every non-zero tuple
/// of H^I stays in use.
#[derive(Debug, Clone)]
pub struct CopyAssignment {
    pub choices: Vec<Vec<usize>>,
}

impl CopyAssignment {
    pub fn identity(inst: &Instance, c: &LinearConstraint) -> Self {
        CopyAssignment {
            choices: tuple_sets(inst, c)
                .into_iter()
                .map(|ts| ts.node_tuple)
                .collect(),
        }
    }
}

fn check_copy_preconditions(
    inst: &Instance,
    sets: &[TupleSet],
    asg: &CopyAssignment,
) -> Result<(), TransformError> {
    if asg.choices.len() != inst.n_subsets() {
        return Err(TransformError::BadAssignmentShape);
    }
    for (s, subset) in inst.subsets().iter().enumerate() {
        let choices = &asg.choices[s];
        if choices.len() != subset.len() {
            return Err(TransformError::BadAssignmentShape);
        }
        let ts = &sets[s];
        for (pos, &t) in choices.iter().enumerate() {
            if t >= ts.tuples.len() {
                return Err(TransformError::UnknownTuple(t, s));
            }
            // A node may take a tuple different from its own only when its
            // neighbourhood matches the subset's common one.
            if t != ts.node_tuple[pos]
                && inst.neighbours_of_x(subset[pos]).len() != ts.tuples[t].z.len()
            {
                return Err(TransformError::NeighbourhoodMismatch);
            }
            if t != ts.node_tuple[pos] && !subset_uniform_within(inst, subset) {
                return Err(TransformError::NeighbourhoodMismatch);
            }
        }
        for t in 1..ts.tuples.len() {
            if !choices.contains(&t) {
                return Err(TransformError::NotStructurePreserving(t, s));
            }
        }
    }
    Ok(())
}

fn subset_uniform_within(inst: &Instance, subset: &[usize]) -> bool {
    subset
        .windows(2)
        .all(|w| inst.neighbours_of_x(w[0]) == inst.neighbours_of_x(w[1]))
}

/// Replaces each node's coefficient tuple by the assigned one; rhs unchanged.
pub fn copy(
    inst: &Instance,
    c: &LinearConstraint,
    asg: &CopyAssignment,
) -> Result<LinearConstraint, TransformError> {
    let sets = tuple_sets(inst, c);
    check_copy_preconditions(inst, &sets, asg)?;
    Ok(apply_assignment(inst, c, &sets, &asg.choices))
}

fn apply_assignment(
    inst: &Instance,
    c: &LinearConstraint,
    sets: &[TupleSet],
    choices: &[Vec<usize>],
) -> LinearConstraint {
    let mut terms: Vec<(Var, f64)> = c
        .terms
        .iter()
        .copied()
        .filter(|(v, _)| matches!(v, Var::Y(_)))
        .collect();
    for (s, subset) in inst.subsets().iter().enumerate() {
        for (pos, &i) in subset.iter().enumerate() {
            let t = &sets[s].tuples[choices[s][pos]];
            if t.x != 0.0 {
                terms.push((Var::X(i), t.x));
            }
            for (&j, &coeff) in inst.neighbours_of_x(i).iter().zip(t.z.iter()) {
                if coeff != 0.0 {
                    terms.push((Var::Z(i, j), coeff));
                }
            }
        }
    }
    LinearConstraint::new(inst, terms, c.sense, c.rhs, c.tag.clone())
}

/// Contribution of assigning tuple t to node i at point p, oriented so that
/// larger means more violated (Le rows count positively, Ge negatively).
fn tuple_value(inst: &Instance, p: &Point, i: usize, t: &CoeffTuple, sign: f64) -> f64 {
    let mut v = t.x * p.x(inst, i);
    for (&j, &coeff) in inst.neighbours_of_x(i).iter().zip(t.z.iter()) {
        v += coeff * p.z(inst, i, j);
    }
    sign * v
}

/// The structure-preserving copying maximizing the violation at p. Within
/// each subset a greedy per-node choice is made first (ties prefer the zero
/// tuple, then the lowest tuple index); if some non-zero tuple ends up
/// unused, the optimum over injective tuple-to-node repairs is taken, which
/// matches exhaustive search over all valid assignments.
pub fn best_copying(
    inst: &Instance,
    c: &LinearConstraint,
    p: &Point,
) -> Result<LinearConstraint, TransformError> {
    let sets = tuple_sets(inst, c);
    let sign = match c.sense {
        Sense::Le | Sense::Eq => 1.0,
        Sense::Ge => -1.0,
    };
    let mut choices = Vec::with_capacity(sets.len());
    for (s, subset) in inst.subsets().iter().enumerate() {
        let ts = &sets[s];
        if ts.tuples.len() == 1 || !subset_uniform_within(inst, subset) {
            // Nothing to reassign (or not allowed to).
            choices.push(ts.node_tuple.clone());
            continue;
        }
        let values: Vec<Vec<f64>> = subset
            .iter()
            .map(|&i| {
                ts.tuples
                    .iter()
                    .map(|t| tuple_value(inst, p, i, t, sign))
                    .collect()
            })
            .collect();
        let greedy: Vec<usize> = values
            .iter()
            .map(|row| {
                let mut best = 0usize;
                for (t, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = t;
                    }
                }
                best
            })
            .collect();
        let unused: Vec<usize> = (1..ts.tuples.len())
            .filter(|t| !greedy.contains(t))
            .collect();
        if unused.is_empty() {
            choices.push(greedy);
            continue;
        }
        // Exact repair: choose one responsible node per non-zero tuple
        // (injectively); remaining nodes keep their greedy choice.
        let tuples_to_place: Vec<usize> = (1..ts.tuples.len()).collect();
        let mut best_choice: Option<(f64, Vec<usize>)> = None;
        let mut owner = vec![usize::MAX; subset.len()];
        place_tuples(
            &tuples_to_place,
            0,
            &mut owner,
            &values,
            &greedy,
            &mut best_choice,
        );
        let (_, repaired) = best_choice.expect("placement exists: tuples <= nodes");
        choices.push(repaired);
    }
    let asg = CopyAssignment { choices };
    copy(inst, c, &asg)
}

fn place_tuples(
    tuples: &[usize],
    k: usize,
    owner: &mut Vec<usize>,
    values: &[Vec<f64>],
    greedy: &[usize],
    best: &mut Option<(f64, Vec<usize>)>,
) {
    if k == tuples.len() {
        let mut total = 0.0;
        let mut choice = Vec::with_capacity(owner.len());
        for (node, &t) in owner.iter().enumerate() {
            let pick = if t == usize::MAX { greedy[node] } else { t };
            total += values[node][pick];
            choice.push(pick);
        }
        if best.as_ref().map_or(true, |(bv, _)| total > *bv) {
            *best = Some((total, choice));
        }
        return;
    }
    for node in 0..owner.len() {
        if owner[node] == usize::MAX {
            owner[node] = tuples[k];
            place_tuples(tuples, k + 1, owner, values, greedy, best);
            owner[node] = usize::MAX;
        }
    }
}

fn find_embedding(sub: &Instance, full: &Instance) -> Result<EmbedMap, TransformError> {
    let mut x_map = Vec::with_capacity(sub.nx());
    for i in 0..sub.nx() {
        let fi = full
            .x_index(sub.x_name(i))
            .ok_or_else(|| InstanceError::UnknownNode(sub.x_name(i).to_string()))?;
        x_map.push(fi);
    }
    let mut y_map = Vec::with_capacity(sub.ny());
    for j in 0..sub.ny() {
        let fj = full
            .y_index(sub.y_name(j))
            .ok_or_else(|| InstanceError::UnknownNode(sub.y_name(j).to_string()))?;
        y_map.push(fj);
    }
    // Partition compatibility: nodes sharing a subset in sub share one in full.
    for a in 0..sub.nx() {
        for b in 0..sub.nx() {
            if sub.subset_of(a) == sub.subset_of(b)
                && full.subset_of(x_map[a]) != full.subset_of(x_map[b])
            {
                return Err(TransformError::IncompatiblePartition);
            }
        }
    }
    for &(i, j) in sub.edges() {
        if !full.has_edge(x_map[i], y_map[j]) {
            return Err(TransformError::NotInduced(
                "sub".into(),
                "full".into(),
            ));
        }
    }
    Ok(EmbedMap { x_map, y_map })
}

struct EmbedMap {
    x_map: Vec<usize>,
    y_map: Vec<usize>,
}

impl EmbedMap {
    fn is_induced(&self, sub: &Instance, full: &Instance) -> bool {
        for a in 0..sub.nx() {
            for b in 0..sub.ny() {
                if full.has_edge(self.x_map[a], self.y_map[b]) && !sub.has_edge(a, b) {
                    return false;
                }
            }
        }
        true
    }
}

/// 0-lifting: re-tags a constraint of `sub` onto the universe of `full`,
/// adding zero coefficients for everything new.
pub fn extend(
    c: &LinearConstraint,
    sub: &Instance,
    full: &Instance,
) -> Result<LinearConstraint, TransformError> {
    let map = find_embedding(sub, full)?;
    let terms = c
        .terms
        .iter()
        .map(|&(v, a)| {
            let w = match v {
                Var::X(i) => Var::X(map.x_map[i]),
                Var::Y(j) => Var::Y(map.y_map[j]),
                Var::Z(i, j) => Var::Z(map.x_map[i], map.y_map[j]),
            };
            (w, a)
        })
        .collect();
    Ok(LinearConstraint::new(
        full,
        terms,
        c.sense,
        c.rhs,
        c.tag.clone(),
    ))
}

/// Restriction: drops coefficients outside `sub`. Requires `sub` to be an
/// induced subinstance of `full`.
pub fn restrict(
    c: &LinearConstraint,
    full: &Instance,
    sub: &Instance,
) -> Result<LinearConstraint, TransformError> {
    let map = find_embedding(sub, full)?;
    if !map.is_induced(sub, full) {
        return Err(TransformError::NotInduced("sub".into(), "full".into()));
    }
    let mut terms = Vec::new();
    for &(v, a) in &c.terms {
        let w = match v {
            Var::X(fi) => map.x_map.iter().position(|&m| m == fi).map(Var::X),
            Var::Y(fj) => map.y_map.iter().position(|&m| m == fj).map(Var::Y),
            Var::Z(fi, fj) => {
                let i = map.x_map.iter().position(|&m| m == fi);
                let j = map.y_map.iter().position(|&m| m == fj);
                match (i, j) {
                    (Some(i), Some(j)) => Some(Var::Z(i, j)),
                    _ => None,
                }
            }
        };
        if let Some(w) = w {
            terms.push((w, a));
        }
    }
    Ok(LinearConstraint::new(
        sub,
        terms,
        c.sense,
        c.rhs,
        c.tag.clone(),
    ))
}

/// A permutation of the instance's nodes: within-subset on X (or swaps of
/// equal-sized, equal-neighbourhood subsets) and arbitrary on Y; edges
/// follow.
#[derive(Debug, Clone)]
pub struct NodePermutation {
    pub x_perm: Vec<usize>,
    pub y_perm: Vec<usize>,
}

impl NodePermutation {
    pub fn identity(inst: &Instance) -> Self {
        NodePermutation {
            x_perm: (0..inst.nx()).collect(),
            y_perm: (0..inst.ny()).collect(),
        }
    }
}

/// Re-indexes coefficients by the permutation.
pub fn permute(
    inst: &Instance,
    c: &LinearConstraint,
    sigma: &NodePermutation,
) -> Result<LinearConstraint, TransformError> {
    if sigma.x_perm.len() != inst.nx() || sigma.y_perm.len() != inst.ny() {
        return Err(TransformError::BadPermutation);
    }
    let mut seen_x = vec![false; inst.nx()];
    let mut seen_y = vec![false; inst.ny()];
    for &i in &sigma.x_perm {
        if i >= inst.nx() || seen_x[i] {
            return Err(TransformError::BadPermutation);
        }
        seen_x[i] = true;
    }
    for &j in &sigma.y_perm {
        if j >= inst.ny() || seen_y[j] {
            return Err(TransformError::BadPermutation);
        }
        seen_y[j] = true;
    }
    for i in 0..inst.nx() {
        let to = sigma.x_perm[i];
        if to == i {
            continue;
        }
        let same_subset = inst.subset_of(to) == inst.subset_of(i);
        let same_nbhd = inst.neighbours_of_x(i) == inst.neighbours_of_x(to);
        let subsets_swappable = same_nbhd
            && inst.subsets()[inst.subset_of(i)].len() == inst.subsets()[inst.subset_of(to)].len();
        if same_subset {
            if !(inst.is_subset_uniform() || same_nbhd) {
                return Err(TransformError::BadPermutation);
            }
        } else if !subsets_swappable {
            return Err(TransformError::BadPermutation);
        }
    }
    let terms = c
        .terms
        .iter()
        .map(|&(v, a)| {
            let w = match v {
                Var::X(i) => Var::X(sigma.x_perm[i]),
                Var::Y(j) => Var::Y(sigma.y_perm[j]),
                Var::Z(i, j) => Var::Z(sigma.x_perm[i], sigma.y_perm[j]),
            };
            (w, a)
        })
        .collect();
    Ok(LinearConstraint::new(
        inst,
        terms,
        c.sense,
        c.rhs,
        c.tag.clone(),
    ))
}

/// Designated slack node per subset for the affine map between the
/// equality-constrained space and the inequality-constrained one.
#[derive(Debug, Clone)]
pub struct LowDimMap {
    /// One x ordinal per subset; must belong to that subset.
    pub slack_nodes: Vec<usize>,
}

impl LowDimMap {
    pub fn validate(&self, inst: &Instance) -> Result<(), TransformError> {
        if self.slack_nodes.len() != inst.n_subsets() {
            return Err(TransformError::BadAssignmentShape);
        }
        for (s, &i0) in self.slack_nodes.iter().enumerate() {
            if inst.subset_of(i0) != s {
                return Err(TransformError::SlackOutsideSubset(i0, s));
            }
        }
        Ok(())
    }

    /// Lowest-index node of each subset.
    pub fn first_nodes(inst: &Instance) -> Self {
        LowDimMap {
            slack_nodes: inst.subsets().iter().map(|s| s[0]).collect(),
        }
    }
}

/// Accumulates an affine expression over instance variables.
#[derive(Default)]
struct AffineExpr {
    coeffs: BTreeMap<Var, f64>,
    constant: f64,
}

impl AffineExpr {
    fn add(&mut self, v: Var, c: f64) {
        *self.coeffs.entry(v).or_insert(0.0) += c;
    }
}

/// Substitutes the map x -> Bx - b, z -> Bz - b y^T into a constraint valid
/// on the inequality-constrained (low-dimensional) space, producing the
/// equivalent constraint on the equality-constrained space. Per subset with
/// slack node i0: x_i0 becomes sum_{i in I} x_i - 1 and z_i0,j becomes
/// sum_{i in I} z_ij - y_j, all other coordinates pass through.
pub fn to_full_dim(
    inst: &Instance,
    c: &LinearConstraint,
    map: &LowDimMap,
) -> Result<LinearConstraint, TransformError> {
    map.validate(inst)?;
    let is_slack: Vec<bool> = {
        let mut v = vec![false; inst.nx()];
        for &i0 in &map.slack_nodes {
            v[i0] = true;
        }
        v
    };
    let mut expr = AffineExpr::default();
    for &(v, a) in &c.terms {
        match v {
            Var::X(i) if is_slack[i] => {
                for &i2 in &inst.subsets()[inst.subset_of(i)] {
                    expr.add(Var::X(i2), a);
                }
                expr.constant -= a;
            }
            Var::Z(i, j) if is_slack[i] => {
                for &i2 in &inst.subsets()[inst.subset_of(i)] {
                    expr.add(Var::Z(i2, j), a);
                }
                expr.add(Var::Y(j), -a);
            }
            other => expr.add(other, a),
        }
    }
    let rhs = c.rhs - expr.constant;
    Ok(LinearConstraint::new(
        inst,
        expr.coeffs.into_iter().collect(),
        c.sense,
        rhs,
        c.tag.clone(),
    ))
}

/// Inverse of `to_full_dim`: substitutes x -> B^{-1}(x + b),
/// z -> B^{-1}(z + b y^T). Per subset with slack node i0: x_i0 becomes
/// x_i0 + 1 - sum_{i != i0} x_i and z_i0,j becomes
/// z_i0,j + y_j - sum_{i != i0} z_ij.
pub fn to_low_dim(
    inst: &Instance,
    c: &LinearConstraint,
    map: &LowDimMap,
) -> Result<LinearConstraint, TransformError> {
    map.validate(inst)?;
    let is_slack: Vec<bool> = {
        let mut v = vec![false; inst.nx()];
        for &i0 in &map.slack_nodes {
            v[i0] = true;
        }
        v
    };
    let mut expr = AffineExpr::default();
    for &(v, a) in &c.terms {
        match v {
            Var::X(i) if is_slack[i] => {
                expr.add(Var::X(i), a);
                expr.constant += a;
                for &i2 in &inst.subsets()[inst.subset_of(i)] {
                    if i2 != i {
                        expr.add(Var::X(i2), -a);
                    }
                }
            }
            Var::Z(i, j) if is_slack[i] => {
                expr.add(Var::Z(i, j), a);
                expr.add(Var::Y(j), a);
                for &i2 in &inst.subsets()[inst.subset_of(i)] {
                    if i2 != i {
                        expr.add(Var::Z(i2, j), -a);
                    }
                }
            }
            other => expr.add(other, a),
        }
    }
    let rhs = c.rhs - expr.constant;
    Ok(LinearConstraint::new(
        inst,
        expr.coeffs.into_iter().collect(),
        c.sense,
        rhs,
        c.tag.clone(),
    ))
}
