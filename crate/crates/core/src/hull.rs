//! Interval-certificate membership proofs: exact interval-set algebra over
//! [0,1), the Match subroutine, and the tree-traversal construction that
//! certifies points of the basic+RLT polytope as convex combinations of
//! vertices when the dependency graph is cycle-free (or the partition has a
//! single subset).
//!
//! Everything here runs on exact rational endpoints; the set conditions the
//! certificate must satisfy are equalities of sets, which floating point
//! would break on tight rows.

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::instance::{DepNode, Instance, LinearConstraint, Var};

#[derive(Debug, Error)]
pub enum HullError {
    #[error("point violates `{0}`")]
    ViolatedRow(String),
    #[error("match weights exceed the available measure")]
    MatchOverflow,
    #[error("match weight is negative")]
    NegativeWeight,
    #[error(
        "instance outside the certified cases: needs a single subset, or subset-uniformity with a cycle-free dependency graph"
    )]
    OutOfTheoremScope,
    #[error("point has {0} coordinates, instance has {1}")]
    DimensionMismatch(usize, usize),
}

pub type Rat = BigRational;

fn rat(x: f64) -> Rat {
    BigRational::from_float(x).expect("finite")
}

/// Finite union of half-open subintervals of [0,1) with exact rational
/// endpoints, kept sorted, disjoint and non-touching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSet {
    ivs: Vec<(Rat, Rat)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { ivs: Vec::new() }
    }

    /// The whole carrier [0, 1).
    pub fn full() -> Self {
        IntervalSet {
            ivs: vec![(Rat::zero(), Rat::one())],
        }
    }

    pub fn interval(a: Rat, b: Rat) -> Self {
        IntervalSet::from_pairs(vec![(a, b)])
    }

    /// Normalizes arbitrary pairs: drops empties, sorts, merges overlapping
    /// and touching intervals.
    pub fn from_pairs(mut pairs: Vec<(Rat, Rat)>) -> Self {
        pairs.retain(|(a, b)| a < b);
        pairs.sort();
        let mut ivs: Vec<(Rat, Rat)> = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            match ivs.last_mut() {
                Some((_, last_b)) if a <= *last_b => {
                    if b > *last_b {
                        *last_b = b;
                    }
                }
                _ => ivs.push((a, b)),
            }
        }
        IntervalSet { ivs }
    }

    pub fn intervals(&self) -> &[(Rat, Rat)] {
        &self.ivs
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    pub fn measure(&self) -> Rat {
        self.ivs
            .iter()
            .map(|(a, b)| b - a)
            .fold(Rat::zero(), |acc, d| acc + d)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut pairs = self.ivs.clone();
        pairs.extend(other.ivs.iter().cloned());
        IntervalSet::from_pairs(pairs)
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut pairs = Vec::new();
        let mut i = 0;
        let mut j = 0;
        while i < self.ivs.len() && j < other.ivs.len() {
            let (a1, b1) = &self.ivs[i];
            let (a2, b2) = &other.ivs[j];
            let lo = a1.max(a2).clone();
            let hi = b1.min(b2).clone();
            if lo < hi {
                pairs.push((lo, hi));
            }
            if b1 <= b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { ivs: pairs }
    }

    /// Complement within [0, 1).
    pub fn complement(&self) -> IntervalSet {
        let mut pairs = Vec::with_capacity(self.ivs.len() + 1);
        let mut cursor = Rat::zero();
        for (a, b) in &self.ivs {
            if cursor < *a {
                pairs.push((cursor.clone(), a.clone()));
            }
            cursor = b.clone();
        }
        if cursor < Rat::one() {
            pairs.push((cursor, Rat::one()));
        }
        IntervalSet { ivs: pairs }
    }
}

/// Carves pairwise-disjoint subsets of the requested measures out of S,
/// left to right: t_r is the least point of S at which the measure of
/// S ∩ [t_{r-1}, t_r) reaches w_r, and S_r = S ∩ [t_{r-1}, t_r).
pub fn match_weights(s: &IntervalSet, weights: &[Rat]) -> Result<Vec<IntervalSet>, HullError> {
    let total: Rat = weights.iter().fold(Rat::zero(), |acc, w| acc + w);
    if weights.iter().any(|w| w < &Rat::zero()) {
        return Err(HullError::NegativeWeight);
    }
    if total > s.measure() {
        return Err(HullError::MatchOverflow);
    }
    let mut out = Vec::with_capacity(weights.len());
    let mut cursor = Rat::zero(); // t_{r-1}
    for w in weights {
        if w.is_zero() {
            out.push(IntervalSet::empty());
            continue;
        }
        let mut remaining = w.clone();
        let mut pieces = Vec::new();
        for (a, b) in &s.ivs {
            if *b <= cursor {
                continue;
            }
            let lo = a.max(&cursor).clone();
            let len = b - &lo;
            if len >= remaining {
                let hi = &lo + &remaining;
                pieces.push((lo, hi.clone()));
                cursor = hi;
                remaining = Rat::zero();
                break;
            } else {
                remaining -= &len;
                pieces.push((lo, b.clone()));
                cursor = b.clone();
            }
        }
        debug_assert!(remaining.is_zero());
        out.push(IntervalSet::from_pairs(pieces));
    }
    Ok(out)
}

/// Exact-rational point over an instance's variable universe.
#[derive(Debug, Clone)]
pub struct RatPoint {
    pub values: Vec<Rat>,
}

impl RatPoint {
    pub fn from_f64(values: &[f64]) -> Self {
        RatPoint {
            values: values.iter().map(|&v| rat(v)).collect(),
        }
    }

    pub fn get(&self, inst: &Instance, v: Var) -> &Rat {
        &self.values[inst.var_index(v)]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.values.iter().map(|v| v.to_f64().unwrap()).collect()
    }
}

fn lhs_exact(inst: &Instance, c: &LinearConstraint, h: &RatPoint) -> Rat {
    c.terms
        .iter()
        .map(|&(v, coeff)| rat(coeff) * &h.values[inst.var_index(v)])
        .fold(Rat::zero(), |acc, t| acc + t)
}

fn violates(inst: &Instance, c: &LinearConstraint, h: &RatPoint) -> bool {
    let lhs = lhs_exact(inst, c, h);
    let rhs = rat(c.rhs);
    match c.sense {
        crate::instance::Sense::Le => lhs > rhs,
        crate::instance::Sense::Ge => lhs < rhs,
        crate::instance::Sense::Eq => lhs != rhs,
    }
}

/// One interval set per variable, indexed canonically.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub sets: Vec<IntervalSet>,
}

impl Certificate {
    pub fn set(&self, inst: &Instance, v: Var) -> &IntervalSet {
        &self.sets[inst.var_index(v)]
    }
}

/// Which of the five certificate conditions failed, if any.
#[derive(Debug, Clone, PartialEq)]
pub enum CertificateFailure {
    /// (condition name, variable description)
    MeasureMismatch(String),
    EdgeIntersection(String),
    SubsetOverlap(String),
}

/// Exact check of the five conditions: measures of the x/y/edge sets equal
/// the point coordinates, S_i ∩ S_j = S_ij per edge, and within-subset
/// x sets are disjoint.
pub fn verify_certificate(
    inst: &Instance,
    h: &RatPoint,
    cert: &Certificate,
) -> Result<(), CertificateFailure> {
    for idx in 0..inst.n_vars() {
        if cert.sets[idx].measure() != h.values[idx] {
            return Err(CertificateFailure::MeasureMismatch(format!(
                "{}",
                inst.var_at(idx)
            )));
        }
    }
    for &(i, j) in inst.edges() {
        let inter = cert
            .set(inst, Var::X(i))
            .intersection(cert.set(inst, Var::Y(j)));
        if inter != *cert.set(inst, Var::Z(i, j)) {
            return Err(CertificateFailure::EdgeIntersection(format!(
                "z{},{}",
                i, j
            )));
        }
    }
    for subset in inst.subsets() {
        for (a, &i1) in subset.iter().enumerate() {
            for &i2 in &subset[a + 1..] {
                let inter = cert
                    .set(inst, Var::X(i1))
                    .intersection(cert.set(inst, Var::X(i2)));
                if !inter.is_empty() {
                    return Err(CertificateFailure::SubsetOverlap(format!(
                        "x{} ∩ x{}",
                        i1, i2
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Builds a certificate for a point of the basic+RLT polytope. Preconditions
/// are checked first: the point must satisfy all basic and RLT rows exactly
/// (a violated row is returned as the refusal reason), and the instance must
/// either have a single subset, or be subset-uniform with a cycle-free
/// dependency graph.
pub fn certify_membership(inst: &Instance, h: &RatPoint) -> Result<Certificate, HullError> {
    if h.values.len() != inst.n_vars() {
        return Err(HullError::DimensionMismatch(h.values.len(), inst.n_vars()));
    }
    for c in crate::families::basic_inequalities(inst)
        .iter()
        .chain(crate::families::rlt_inequalities(inst).iter())
    {
        if violates(inst, c, h) {
            return Err(HullError::ViolatedRow(c.tag.clone()));
        }
    }
    let subset_uniform = inst.is_subset_uniform();
    if subset_uniform {
        let dep = inst.dependency_graph().expect("subset-uniform");
        if dep.is_acyclic() {
            return Ok(certify_trees(inst, h, &dep));
        }
    }
    if inst.n_subsets() == 1 {
        return Ok(certify_single_subset(inst, h));
    }
    Err(HullError::OutOfTheoremScope)
}

/// Tree construction: per component of the dependency graph, root at the
/// lowest-index y node (components without a y node are isolated subsets,
/// laid out adjacently from 0) and recurse, matching edge sets inside the
/// parent's set and node remainders inside its complement.
fn certify_trees(inst: &Instance, h: &RatPoint, dep: &crate::instance::DepGraph) -> Certificate {
    let mut sets: Vec<Option<IntervalSet>> = vec![None; inst.n_vars()];
    for comp in dep.components() {
        let root = comp.iter().find_map(|n| match n {
            DepNode::Y(j) => Some(*j),
            DepNode::Subset(_) => None,
        });
        match root {
            Some(j) => {
                let hj = h.get(inst, Var::Y(j)).clone();
                sets[inst.var_index(Var::Y(j))] =
                    Some(IntervalSet::interval(Rat::zero(), hj));
                traverse(inst, h, dep, DepNode::Y(j), None, &mut sets);
            }
            None => {
                // Isolated subsets: lay the node sets next to each other.
                for n in comp {
                    let DepNode::Subset(s) = n else { unreachable!() };
                    let mut cursor = Rat::zero();
                    for &i in &inst.subsets()[s] {
                        let hi = h.get(inst, Var::X(i)).clone();
                        let next = &cursor + &hi;
                        sets[inst.var_index(Var::X(i))] =
                            Some(IntervalSet::interval(cursor.clone(), next.clone()));
                        cursor = next;
                    }
                }
            }
        }
    }
    Certificate {
        sets: sets
            .into_iter()
            .map(|s| s.unwrap_or_else(IntervalSet::empty))
            .collect(),
    }
}

fn traverse(
    inst: &Instance,
    h: &RatPoint,
    dep: &crate::instance::DepGraph,
    node: DepNode,
    parent: Option<DepNode>,
    sets: &mut Vec<Option<IntervalSet>>,
) {
    for child in dep.neighbours(node) {
        if Some(child) == parent {
            continue;
        }
        match (node, child) {
            (DepNode::Y(p), DepNode::Subset(c)) => {
                let sp = sets[inst.var_index(Var::Y(p))].clone().expect("parent set");
                let members = &inst.subsets()[c];
                // M1: edge sets inside S_p.
                let edge_weights: Vec<Rat> = members
                    .iter()
                    .map(|&i| h.get(inst, Var::Z(i, p)).clone())
                    .collect();
                let edge_sets = match_weights(&sp, &edge_weights).expect("rlt row 6 guarantees fit");
                // M2: node remainders inside the complement of S_p.
                let rem_weights: Vec<Rat> = members
                    .iter()
                    .map(|&i| h.get(inst, Var::X(i)) - h.get(inst, Var::Z(i, p)))
                    .collect();
                let rem_sets =
                    match_weights(&sp.complement(), &rem_weights).expect("rlt row 7 guarantees fit");
                for ((&i, es), rs) in members.iter().zip(edge_sets).zip(rem_sets) {
                    sets[inst.var_index(Var::Z(i, p))] = Some(es.clone());
                    sets[inst.var_index(Var::X(i))] = Some(es.union(&rs));
                }
            }
            (DepNode::Subset(p), DepNode::Y(c)) => {
                let members = &inst.subsets()[p];
                // M3: one edge set inside each S_i.
                let mut union_edges = IntervalSet::empty();
                let mut union_nodes = IntervalSet::empty();
                for &i in members {
                    let si = sets[inst.var_index(Var::X(i))].clone().expect("parent set");
                    let es = match_weights(&si, &[h.get(inst, Var::Z(i, c)).clone()])
                        .expect("rlt row 5 guarantees fit")
                        .remove(0);
                    union_edges = union_edges.union(&es);
                    union_nodes = union_nodes.union(&si);
                    sets[inst.var_index(Var::Z(i, c))] = Some(es);
                }
                // M4: the remainder of S_c outside all member sets.
                let surplus = members.iter().fold(h.get(inst, Var::Y(c)).clone(), |acc, &i| {
                    acc - h.get(inst, Var::Z(i, c))
                });
                let hat = match_weights(&union_nodes.complement(), &[surplus])
                    .expect("rlt rows 6/7 guarantee fit")
                    .remove(0);
                sets[inst.var_index(Var::Y(c))] = Some(union_edges.union(&hat));
            }
            _ => unreachable!("dependency graph is bipartite"),
        }
        traverse(inst, h, dep, child, Some(node), sets);
    }
}

/// Single-subset construction for arbitrary bipartite instances: the x sets
/// are adjacent blocks from 0; each edge set is matched onto its x set; each
/// y set is its edge sets plus a surplus matched outside all neighbours.
fn certify_single_subset(inst: &Instance, h: &RatPoint) -> Certificate {
    let mut sets: Vec<Option<IntervalSet>> = vec![None; inst.n_vars()];
    let mut cursor = Rat::zero();
    for i in 0..inst.nx() {
        let hi = h.get(inst, Var::X(i)).clone();
        let next = &cursor + &hi;
        sets[inst.var_index(Var::X(i))] =
            Some(IntervalSet::interval(cursor.clone(), next.clone()));
        cursor = next;
    }
    for j in 0..inst.ny() {
        let mut union_edges = IntervalSet::empty();
        let mut union_nodes = IntervalSet::empty();
        let mut surplus = h.get(inst, Var::Y(j)).clone();
        for &i in inst.neighbours_of_y(j) {
            let si = sets[inst.var_index(Var::X(i))].clone().unwrap();
            let es = match_weights(&si, &[h.get(inst, Var::Z(i, j)).clone()])
                .expect("rlt row 5 guarantees fit")
                .remove(0);
            union_edges = union_edges.union(&es);
            union_nodes = union_nodes.union(&si);
            surplus -= h.get(inst, Var::Z(i, j));
            sets[inst.var_index(Var::Z(i, j))] = Some(es);
        }
        let hat = match_weights(&union_nodes.complement(), &[surplus])
            .expect("rlt rows 6/7 guarantee fit")
            .remove(0);
        sets[inst.var_index(Var::Y(j))] = Some(union_edges.union(&hat));
    }
    Certificate {
        sets: sets
            .into_iter()
            .map(|s| s.unwrap_or_else(IntervalSet::empty))
            .collect(),
    }
}

/// Serializes a certificate as one line per variable with rational endpoint
/// pairs.
pub fn write_certificate(inst: &Instance, cert: &Certificate) -> String {
    let mut out = String::new();
    for idx in 0..inst.n_vars() {
        out.push_str(&inst.var_name(inst.var_at(idx)));
        for (a, b) in cert.sets[idx].intervals() {
            out.push_str(&format!(" [{},{})", a, b));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{inst_c, Instance};

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    #[test]
    fn interval_basics() {
        assert_eq!(IntervalSet::full().measure(), Rat::one());
        let c = IntervalSet::interval(Rat::zero(), r(3, 10)).complement();
        assert_eq!(c, IntervalSet::interval(r(3, 10), Rat::one()));
        let a = IntervalSet::interval(Rat::zero(), r(1, 2));
        let b = IntervalSet::interval(r(1, 4), r(3, 4));
        let i = a.intersection(&b);
        assert_eq!(i, IntervalSet::interval(r(1, 4), r(1, 2)));
        assert_eq!(i.measure(), r(1, 4));
    }

    #[test]
    fn touching_intervals_merge() {
        let s = IntervalSet::from_pairs(vec![(Rat::zero(), r(1, 2)), (r(1, 2), Rat::one())]);
        assert_eq!(s.intervals().len(), 1);
    }

    #[test]
    fn match_greedy_rule() {
        let s = IntervalSet::full();
        let parts = match_weights(&s, &[r(3, 10), r(3, 10)]).unwrap();
        assert_eq!(parts[0], IntervalSet::interval(Rat::zero(), r(3, 10)));
        assert_eq!(parts[1], IntervalSet::interval(r(3, 10), r(6, 10)));
    }

    #[test]
    fn match_across_gap() {
        let s = IntervalSet::from_pairs(vec![(Rat::zero(), r(2, 10)), (r(5, 10), Rat::one())]);
        let parts = match_weights(&s, &[r(4, 10)]).unwrap();
        let want =
            IntervalSet::from_pairs(vec![(Rat::zero(), r(2, 10)), (r(5, 10), r(7, 10))]);
        assert_eq!(parts[0], want);
    }

    #[test]
    fn match_zero_weight() {
        let s = IntervalSet::full();
        let parts = match_weights(&s, &[Rat::zero()]).unwrap();
        assert!(parts[0].is_empty());
    }

    #[test]
    fn match_overflow_rejected() {
        let s = IntervalSet::interval(Rat::zero(), r(1, 2));
        assert!(match_weights(&s, &[r(3, 4)]).is_err());
    }

    #[test]
    fn unit_vertex_certificate() {
        let c = inst_c();
        let mut vals = vec![Rat::zero(); c.n_vars()];
        vals[c.var_index(Var::Y(0))] = Rat::one();
        let h = RatPoint { values: vals };
        let cert = certify_membership(&c, &h).unwrap();
        assert_eq!(*cert.set(&c, Var::Y(0)), IntervalSet::full());
        assert!(cert.set(&c, Var::X(0)).is_empty());
        verify_certificate(&c, &h, &cert).unwrap();
    }

    #[test]
    fn all_zero_certificate() {
        let c = inst_c();
        let h = RatPoint {
            values: vec![Rat::zero(); c.n_vars()],
        };
        let cert = certify_membership(&c, &h).unwrap();
        verify_certificate(&c, &h, &cert).unwrap();
    }

    #[test]
    fn fractional_point_on_inst_c() {
        let c = inst_c();
        // x = (1/2, 3/10, 2/5), y = (9/10, 3/5), z chosen to satisfy the
        // RLT rows: z_ij <= min(x_i, ...), column sums within y_j.
        let mut vals = vec![Rat::zero(); c.n_vars()];
        vals[c.var_index(Var::X(0))] = r(1, 2);
        vals[c.var_index(Var::X(1))] = r(3, 10);
        vals[c.var_index(Var::X(2))] = r(2, 5);
        vals[c.var_index(Var::Y(0))] = r(9, 10);
        vals[c.var_index(Var::Y(1))] = r(3, 5);
        vals[c.var_index(Var::Z(0, 0))] = r(9, 20);
        vals[c.var_index(Var::Z(1, 0))] = r(3, 10);
        vals[c.var_index(Var::Z(2, 0))] = r(3, 10);
        vals[c.var_index(Var::Z(2, 1))] = r(1, 5);
        let h = RatPoint { values: vals };
        let cert = certify_membership(&c, &h).unwrap();
        verify_certificate(&c, &h, &cert).unwrap();
    }

    #[test]
    fn violated_row_refused() {
        let c = inst_c();
        let mut vals = vec![Rat::zero(); c.n_vars()];
        vals[c.var_index(Var::Z(0, 0))] = r(1, 2); // z > x = 0 violates rlt5
        let h = RatPoint { values: vals };
        match certify_membership(&c, &h) {
            Err(HullError::ViolatedRow(tag)) => assert!(tag.starts_with("rlt")),
            other => panic!("expected refusal, got {:?}", other),
        }
    }

    #[test]
    fn single_subset_arbitrary_graph() {
        // Non-complete, non-subset-uniform graph with one subset.
        let inst = Instance::new(
            vec![vec!["i1".into(), "i2".into(), "i3".into()]],
            vec!["j1".into(), "j2".into()],
            crate::instance::EdgeSpec::Explicit(vec![
                ("i1".into(), "j1".into()),
                ("i2".into(), "j1".into()),
                ("i2".into(), "j2".into()),
                ("i3".into(), "j2".into()),
            ]),
        )
        .unwrap();
        let mut vals = vec![Rat::zero(); inst.n_vars()];
        vals[inst.var_index(Var::X(0))] = r(1, 4);
        vals[inst.var_index(Var::X(1))] = r(1, 4);
        vals[inst.var_index(Var::X(2))] = r(1, 3);
        vals[inst.var_index(Var::Y(0))] = r(1, 2);
        vals[inst.var_index(Var::Y(1))] = r(2, 3);
        vals[inst.var_index(Var::Z(0, 0))] = r(1, 5);
        vals[inst.var_index(Var::Z(1, 0))] = r(1, 5);
        vals[inst.var_index(Var::Z(1, 1))] = r(1, 8);
        vals[inst.var_index(Var::Z(2, 1))] = r(1, 4);
        let h = RatPoint { values: vals };
        let cert = certify_membership(&inst, &h).unwrap();
        verify_certificate(&inst, &h, &cert).unwrap();
    }

    #[test]
    fn cyclic_dependency_rejected() {
        let a = crate::instance::inst_a();
        let h = RatPoint {
            values: vec![Rat::zero(); a.n_vars()],
        };
        assert!(matches!(
            certify_membership(&a, &h),
            Err(HullError::OutOfTheoremScope)
        ));
    }

    #[test]
    fn layered_construction_matches_two_by_two_figure() {
        // Complete 2x2 with one subset: root j1 gets [0, h_j1), the edges
        // are carved inside it, remainders outside, then j2 follows.
        let inst = Instance::new(
            vec![vec!["i1".into(), "i2".into()]],
            vec!["j1".into(), "j2".into()],
            crate::instance::EdgeSpec::Complete,
        )
        .unwrap();
        let mut vals = vec![Rat::zero(); inst.n_vars()];
        vals[inst.var_index(Var::X(0))] = r(2, 5);
        vals[inst.var_index(Var::X(1))] = r(2, 5);
        vals[inst.var_index(Var::Y(0))] = r(3, 5);
        vals[inst.var_index(Var::Y(1))] = r(4, 5);
        vals[inst.var_index(Var::Z(0, 0))] = r(1, 5);
        vals[inst.var_index(Var::Z(1, 0))] = r(1, 5);
        vals[inst.var_index(Var::Z(0, 1))] = r(2, 5);
        vals[inst.var_index(Var::Z(1, 1))] = r(1, 5);
        let h = RatPoint { values: vals };
        let cert = certify_membership(&inst, &h).unwrap();
        verify_certificate(&inst, &h, &cert).unwrap();
        assert_eq!(
            *cert.set(&inst, Var::Y(0)),
            IntervalSet::interval(Rat::zero(), r(3, 5))
        );
        // M1 carves the two edge sets left to right inside S_j1.
        assert_eq!(
            *cert.set(&inst, Var::Z(0, 0)),
            IntervalSet::interval(Rat::zero(), r(1, 5))
        );
        assert_eq!(
            *cert.set(&inst, Var::Z(1, 0)),
            IntervalSet::interval(r(1, 5), r(2, 5))
        );
    }
}
