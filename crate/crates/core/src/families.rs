//! Constructors for the named inequality families of the polytope and the
//! 1,m-template validity predicate.
//!
//! All constructors return constraints with integer coefficients, so their
//! f64 representation is exact and canonical hashing is reliable.

use thiserror::Error;

use crate::instance::{Instance, LinearConstraint, Var};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("subsets of a cycle must be pairwise distinct")]
    RepeatedSubset,
    #[error("y nodes must be pairwise distinct")]
    RepeatedY,
    #[error("S_{0} must be a non-empty subset of its cycle subset")]
    BadSubsetSelection(usize),
    #[error("m = {0} is too small for this family")]
    MTooSmall(usize),
    #[error("not enough distinct nodes: {0}")]
    NotEnoughNodes(String),
    #[error("cycle is not chordless in the dependency graph")]
    NotChordless,
    #[error("node {0} is not in the stated subset")]
    NodeOutsideSubset(usize),
    #[error("family requires a complete bipartite instance")]
    NotComplete,
    #[error("malformed coefficient layout: {0}")]
    BadLayout(String),
}

/// Bounds 0 <= y_j <= 1, x_i >= 0 and the multiple-choice rows
/// sum_{i in I} x_i <= 1.
pub fn basic_inequalities(inst: &Instance) -> Vec<LinearConstraint> {
    let mut out = Vec::new();
    for j in 0..inst.ny() {
        out.push(LinearConstraint::ge(
            inst,
            vec![(Var::Y(j), 1.0)],
            0.0,
            "basic-ylo",
        ));
        out.push(LinearConstraint::le(
            inst,
            vec![(Var::Y(j), 1.0)],
            1.0,
            "basic-yhi",
        ));
    }
    for i in 0..inst.nx() {
        out.push(LinearConstraint::ge(
            inst,
            vec![(Var::X(i), 1.0)],
            0.0,
            "basic-x",
        ));
    }
    for subset in inst.subsets() {
        out.push(LinearConstraint::le(
            inst,
            subset.iter().map(|&i| (Var::X(i), 1.0)).collect(),
            1.0,
            "basic-mc",
        ));
    }
    out
}

/// The four reformulation-linearization rows: z_ij >= 0 and x_i - z_ij >= 0
/// per edge, and per (subset, j) pair with N(j) ∩ I nonempty,
/// y_j - sum z_ij >= 0 and y_j + sum (x_i - z_ij) <= 1.
pub fn rlt_inequalities(inst: &Instance) -> Vec<LinearConstraint> {
    let mut out = Vec::new();
    for &(i, j) in inst.edges() {
        out.push(LinearConstraint::ge(
            inst,
            vec![(Var::Z(i, j), 1.0)],
            0.0,
            "rlt4",
        ));
    }
    for &(i, j) in inst.edges() {
        out.push(LinearConstraint::ge(
            inst,
            vec![(Var::X(i), 1.0), (Var::Z(i, j), -1.0)],
            0.0,
            "rlt5",
        ));
    }
    for (s, subset) in inst.subsets().iter().enumerate() {
        for j in 0..inst.ny() {
            let members: Vec<usize> = subset
                .iter()
                .copied()
                .filter(|&i| inst.has_edge(i, j))
                .collect();
            if members.is_empty() {
                continue;
            }
            let mut terms = vec![(Var::Y(j), 1.0)];
            for &i in &members {
                terms.push((Var::Z(i, j), -1.0));
            }
            out.push(LinearConstraint::ge(
                inst,
                terms,
                0.0,
                format!("rlt6-I{}-j{}", s, j),
            ));
        }
    }
    for (s, subset) in inst.subsets().iter().enumerate() {
        for j in 0..inst.ny() {
            let members: Vec<usize> = subset
                .iter()
                .copied()
                .filter(|&i| inst.has_edge(i, j))
                .collect();
            if members.is_empty() {
                continue;
            }
            let mut terms = vec![(Var::Y(j), 1.0)];
            for &i in &members {
                terms.push((Var::X(i), 1.0));
                terms.push((Var::Z(i, j), -1.0));
            }
            out.push(LinearConstraint::le(
                inst,
                terms,
                1.0,
                format!("rlt7-I{}-j{}", s, j),
            ));
        }
    }
    out
}

/// Equations sum_{i in I} z_ij = y_j, valid when the multiple-choice rows
/// hold with equality. Emitted per (subset, j) pair with the whole subset
/// adjacent to j.
pub fn rlt_equations(inst: &Instance) -> Vec<LinearConstraint> {
    let mut out = Vec::new();
    for (s, subset) in inst.subsets().iter().enumerate() {
        for j in 0..inst.ny() {
            if !subset.iter().all(|&i| inst.has_edge(i, j)) {
                continue;
            }
            let mut terms: Vec<(Var, f64)> =
                subset.iter().map(|&i| (Var::Z(i, j), 1.0)).collect();
            terms.push((Var::Y(j), -1.0));
            out.push(LinearConstraint::eq(
                inst,
                terms,
                0.0,
                format!("rlteq-I{}-j{}", s, j),
            ));
        }
    }
    out
}

/// Parameters of a cycle inequality with node sets: the cycle
/// (I_1, j_1, I_2, j_2, ..., I_m, j_m) in the dependency graph plus one
/// non-empty selection S_p per touched subset.
#[derive(Debug, Clone)]
pub struct CycleSpec {
    pub subsets: Vec<usize>,
    pub ys: Vec<usize>,
    pub selections: Vec<Vec<usize>>,
}

/// sum_{i in S_1} (-z_ij1 + z_ijm)
///   + sum_{p=2..m} (-y_jp + sum_{i in S_p} (-x_i + z_ij(p-1) + z_ijp)) <= 0
/// for a simple chordless cycle of the dependency graph.
pub fn cycle_copy_inequality(
    inst: &Instance,
    spec: &CycleSpec,
) -> Result<LinearConstraint, FamilyError> {
    let m = spec.subsets.len();
    if m < 2 {
        return Err(FamilyError::MTooSmall(m));
    }
    if spec.ys.len() != m || spec.selections.len() != m {
        return Err(FamilyError::BadLayout("cycle arity mismatch".into()));
    }
    for p in 0..m {
        for q in (p + 1)..m {
            if spec.subsets[p] == spec.subsets[q] {
                return Err(FamilyError::RepeatedSubset);
            }
            if spec.ys[p] == spec.ys[q] {
                return Err(FamilyError::RepeatedY);
            }
        }
    }
    for (p, sel) in spec.selections.iter().enumerate() {
        if sel.is_empty() {
            return Err(FamilyError::BadSubsetSelection(p + 1));
        }
        for &i in sel {
            if inst.subset_of(i) != spec.subsets[p] {
                return Err(FamilyError::NodeOutsideSubset(i));
            }
        }
    }
    // Chordlessness: the only dependency edges among the touched nodes are
    // the 2m cycle edges. A 4-cycle has no room for chords.
    if m > 2 {
        let dep = inst.dependency_graph().map_err(|_| FamilyError::NotChordless)?;
        for (p, &s) in spec.subsets.iter().enumerate() {
            for (q, &j) in spec.ys.iter().enumerate() {
                let on_cycle = q == p || (q + 1) % m == p;
                let present = dep.edges.contains(&(s, j));
                if present && !on_cycle {
                    return Err(FamilyError::NotChordless);
                }
            }
        }
    }
    let mut terms = Vec::new();
    let j1 = spec.ys[0];
    let jm = spec.ys[m - 1];
    for &i in &spec.selections[0] {
        terms.push((Var::Z(i, j1), -1.0));
        terms.push((Var::Z(i, jm), 1.0));
    }
    for p in 1..m {
        let jp = spec.ys[p];
        let jprev = spec.ys[p - 1];
        terms.push((Var::Y(jp), -1.0));
        for &i in &spec.selections[p] {
            terms.push((Var::X(i), -1.0));
            terms.push((Var::Z(i, jprev), 1.0));
            terms.push((Var::Z(i, jp), 1.0));
        }
    }
    Ok(LinearConstraint::le(inst, terms, 0.0, "cc"))
}

/// Support-matrix member with one representative per subset:
/// -y_j1 - sum_k (m-k) x_ik - sum_{p+k=m+2, p,k>=2} z_ip_jk
///   + sum_{p+k<m+2} z_ip_jk <= 0.
pub fn bell_inequality(
    inst: &Instance,
    reps: &[usize],
    ys: &[usize],
) -> Result<LinearConstraint, FamilyError> {
    let m = reps.len();
    if m < 2 {
        return Err(FamilyError::MTooSmall(m));
    }
    if ys.len() != m {
        return Err(FamilyError::BadLayout("need as many y nodes as reps".into()));
    }
    for p in 0..m {
        for q in (p + 1)..m {
            if inst.subset_of(reps[p]) == inst.subset_of(reps[q]) {
                return Err(FamilyError::RepeatedSubset);
            }
            if ys[p] == ys[q] {
                return Err(FamilyError::RepeatedY);
            }
        }
    }
    if !inst.is_complete() {
        return Err(FamilyError::NotComplete);
    }
    let mut terms = vec![(Var::Y(ys[0]), -1.0)];
    for (k, &i) in reps.iter().enumerate() {
        let coeff = -((m - (k + 1)) as f64);
        if coeff != 0.0 {
            terms.push((Var::X(i), coeff));
        }
    }
    for p in 1..=m {
        for k in 1..=m {
            let coeff = if p + k < m + 2 {
                1.0
            } else if p + k == m + 2 && p >= 2 && k >= 2 {
                -1.0
            } else {
                0.0
            };
            if coeff != 0.0 {
                terms.push((Var::Z(reps[p - 1], ys[k - 1]), coeff));
            }
        }
    }
    Ok(LinearConstraint::le(inst, terms, 0.0, "bell"))
}

/// Common node-selection checks for the arrow families.
fn check_arrow_nodes(
    inst: &Instance,
    i1: usize,
    others: &[usize],
    ys: &[usize],
) -> Result<usize, FamilyError> {
    let m = ys.len();
    if m < 3 {
        return Err(FamilyError::MTooSmall(m));
    }
    if others.len() != m - 1 {
        return Err(FamilyError::BadLayout("need m-1 nodes in I_2".into()));
    }
    if !inst.is_complete() {
        return Err(FamilyError::NotComplete);
    }
    let s2 = inst.subset_of(others[0]);
    if inst.subset_of(i1) == s2 {
        return Err(FamilyError::RepeatedSubset);
    }
    for (a, &i) in others.iter().enumerate() {
        if inst.subset_of(i) != s2 {
            return Err(FamilyError::NodeOutsideSubset(i));
        }
        for &i2 in &others[a + 1..] {
            if i == i2 {
                return Err(FamilyError::NotEnoughNodes("repeated i in I_2".into()));
            }
        }
    }
    for a in 0..m {
        for b in (a + 1)..m {
            if ys[a] == ys[b] {
                return Err(FamilyError::RepeatedY);
            }
        }
    }
    Ok(m)
}

/// (m-1) x_i1 + y_j1 - sum_p z_i1_jp + sum_{p=2..m} (-z_ip_j1 + z_ip_jp) >= 0.
pub fn arrow1_inequality(
    inst: &Instance,
    i1: usize,
    others: &[usize],
    ys: &[usize],
) -> Result<LinearConstraint, FamilyError> {
    let m = check_arrow_nodes(inst, i1, others, ys)?;
    let mut terms = vec![
        (Var::X(i1), (m - 1) as f64),
        (Var::Y(ys[0]), 1.0),
    ];
    for &j in ys {
        terms.push((Var::Z(i1, j), -1.0));
    }
    for p in 1..m {
        terms.push((Var::Z(others[p - 1], ys[0]), -1.0));
        terms.push((Var::Z(others[p - 1], ys[p]), 1.0));
    }
    Ok(LinearConstraint::ge(inst, terms, 0.0, "a1"))
}

/// x_i1 + sum_{p=2..m} y_jp - sum_p z_i1_jp
///   + sum_{p=2..m} (z_ip_j1 - z_ip_jp) >= 0.
pub fn arrow2_inequality(
    inst: &Instance,
    i1: usize,
    others: &[usize],
    ys: &[usize],
) -> Result<LinearConstraint, FamilyError> {
    let m = check_arrow_nodes(inst, i1, others, ys)?;
    let mut terms = vec![(Var::X(i1), 1.0)];
    for p in 1..m {
        terms.push((Var::Y(ys[p]), 1.0));
    }
    for &j in ys {
        terms.push((Var::Z(i1, j), -1.0));
    }
    for p in 1..m {
        terms.push((Var::Z(others[p - 1], ys[0]), 1.0));
        terms.push((Var::Z(others[p - 1], ys[p]), -1.0));
    }
    Ok(LinearConstraint::ge(inst, terms, 0.0, "a2"))
}

/// Copying of an arrow-1 inequality: S_1 replicates the i_1 tuple and the
/// pairwise disjoint non-empty sets S_2..S_m replicate the diagonal tuples:
/// sum_{i in S_1} ((m-1) x_i - sum_p z_i_jp) + y_j1
///   + sum_{p=2..m} sum_{i in S_p} (-z_i_j1 + z_i_jp) >= 0.
pub fn arrow1_copy_inequality(
    inst: &Instance,
    s1: &[usize],
    groups: &[Vec<usize>],
    ys: &[usize],
) -> Result<LinearConstraint, FamilyError> {
    let m = check_arrow_copy_nodes(inst, s1, groups, ys)?;
    let mut terms = vec![(Var::Y(ys[0]), 1.0)];
    for &i in s1 {
        terms.push((Var::X(i), (m - 1) as f64));
        for &j in ys {
            terms.push((Var::Z(i, j), -1.0));
        }
    }
    for p in 1..m {
        for &i in &groups[p - 1] {
            terms.push((Var::Z(i, ys[0]), -1.0));
            terms.push((Var::Z(i, ys[p]), 1.0));
        }
    }
    Ok(LinearConstraint::ge(inst, terms, 0.0, "a1c"))
}

/// Copying of an arrow-2 inequality:
/// sum_{i in S_1} (x_i - sum_p z_i_jp) + sum_{p=2..m} y_jp
///   + sum_{p=2..m} sum_{i in S_p} (z_i_j1 - z_i_jp) >= 0.
pub fn arrow2_copy_inequality(
    inst: &Instance,
    s1: &[usize],
    groups: &[Vec<usize>],
    ys: &[usize],
) -> Result<LinearConstraint, FamilyError> {
    let m = check_arrow_copy_nodes(inst, s1, groups, ys)?;
    let mut terms = Vec::new();
    for &i in s1 {
        terms.push((Var::X(i), 1.0));
        for &j in ys {
            terms.push((Var::Z(i, j), -1.0));
        }
    }
    for p in 1..m {
        terms.push((Var::Y(ys[p]), 1.0));
        for &i in &groups[p - 1] {
            terms.push((Var::Z(i, ys[0]), 1.0));
            terms.push((Var::Z(i, ys[p]), -1.0));
        }
    }
    Ok(LinearConstraint::ge(inst, terms, 0.0, "a2c"))
}

fn check_arrow_copy_nodes(
    inst: &Instance,
    s1: &[usize],
    groups: &[Vec<usize>],
    ys: &[usize],
) -> Result<usize, FamilyError> {
    let m = ys.len();
    if m < 3 {
        return Err(FamilyError::MTooSmall(m));
    }
    if groups.len() != m - 1 {
        return Err(FamilyError::BadLayout("need m-1 groups in I_2".into()));
    }
    if s1.is_empty() {
        return Err(FamilyError::BadSubsetSelection(1));
    }
    if !inst.is_complete() {
        return Err(FamilyError::NotComplete);
    }
    let sub1 = inst.subset_of(s1[0]);
    for &i in s1 {
        if inst.subset_of(i) != sub1 {
            return Err(FamilyError::NodeOutsideSubset(i));
        }
    }
    let all2: Vec<usize> = groups.iter().flatten().copied().collect();
    if all2.is_empty() {
        return Err(FamilyError::BadSubsetSelection(2));
    }
    let sub2 = inst.subset_of(all2[0]);
    if sub1 == sub2 {
        return Err(FamilyError::RepeatedSubset);
    }
    for (g, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(FamilyError::BadSubsetSelection(g + 2));
        }
        for &i in group {
            if inst.subset_of(i) != sub2 {
                return Err(FamilyError::NodeOutsideSubset(i));
            }
        }
    }
    let mut sorted = all2.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != all2.len() {
        return Err(FamilyError::NotEnoughNodes("groups overlap".into()));
    }
    for a in 0..m {
        for b in (a + 1)..m {
            if ys[a] == ys[b] {
                return Err(FamilyError::RepeatedY);
            }
        }
    }
    Ok(m)
}

/// Coefficient layout of the 1,m-template written in >= 0 form over one
/// node i_1, y nodes j_1..j_m (the first k carry coefficient 1) and rows
/// h = 2..m of further z coefficients.
#[derive(Debug, Clone)]
pub struct OneMCoefficients {
    pub a_i1: f64,
    /// y coefficients, length m.
    pub a_y: Vec<f64>,
    /// z coefficients of the i_1 row, length m.
    pub a_i1_z: Vec<f64>,
    /// z coefficients of rows h = 2..m, each of length m.
    pub a_rows: Vec<Vec<f64>>,
}

/// Checks the template conditions: (i) the i_1 row is all -1, (ii) the first
/// k y coefficients are 1 (the rest 0), (iii) a_i1 = m - k, (iv)/(v) the
/// remaining z coefficients lie in {0,-1} on the first k columns and {0,1}
/// after, and (vi) every row survives the worst-case column selection
/// sum_{p<=k} a_hp + sum_{p>k, a_hp=0} (a_hp - 1) >= -(m-k).
pub fn check_one_m_valid(c: &OneMCoefficients, m: usize, k: usize) -> Result<bool, FamilyError> {
    if m < 3 || k == 0 || k > m {
        return Err(FamilyError::BadLayout(format!("m={}, k={}", m, k)));
    }
    if c.a_y.len() != m || c.a_i1_z.len() != m || c.a_rows.iter().any(|r| r.len() != m) {
        return Err(FamilyError::BadLayout("row lengths must equal m".into()));
    }
    if c.a_i1_z.iter().any(|&a| a != -1.0) {
        return Ok(false);
    }
    for (p, &a) in c.a_y.iter().enumerate() {
        let want = if p < k { 1.0 } else { 0.0 };
        if a != want {
            return Ok(false);
        }
    }
    if c.a_i1 != (m - k) as f64 {
        return Ok(false);
    }
    for row in &c.a_rows {
        for (p, &a) in row.iter().enumerate() {
            if p < k {
                if a != 0.0 && a != -1.0 {
                    return Ok(false);
                }
            } else if a != 0.0 && a != 1.0 {
                return Ok(false);
            }
        }
    }
    for row in &c.a_rows {
        let head: f64 = row[..k].iter().sum();
        let worst: f64 = row[k..].iter().filter(|&&a| a < 1.0).map(|&a| a - 1.0).sum();
        if head + worst < -((m - k) as f64) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Template coefficients of an arrow-1 inequality (k = 1 layout).
pub fn arrow1_template(m: usize) -> OneMCoefficients {
    let mut rows = Vec::new();
    for h in 2..=m {
        let mut row = vec![0.0; m];
        row[0] = -1.0;
        row[h - 1] = 1.0;
        rows.push(row);
    }
    let mut a_y = vec![0.0; m];
    a_y[0] = 1.0;
    OneMCoefficients {
        a_i1: (m - 1) as f64,
        a_y,
        a_i1_z: vec![-1.0; m],
        a_rows: rows,
    }
}

/// Template coefficients of an arrow-2 inequality with the y nodes reordered
/// so the k = m - 1 supported columns come first.
pub fn arrow2_template(m: usize) -> OneMCoefficients {
    // Column order (j_2, ..., j_m, j_1): the supported y's first.
    let mut rows = Vec::new();
    for h in 2..=m {
        let mut row = vec![0.0; m];
        row[h - 2] = -1.0;
        row[m - 1] = 1.0;
        rows.push(row);
    }
    let mut a_y = vec![1.0; m];
    a_y[m - 1] = 0.0;
    OneMCoefficients {
        a_i1: 1.0,
        a_y,
        a_i1_z: vec![-1.0; m],
        a_rows: rows,
    }
}
