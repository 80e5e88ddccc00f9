//! Ground-truth brute force: vertex enumeration, integer optimum, validity
//! and facet-rank checks, and exhaustive most-violated family search.
//!
//! Vertices of the polytope are (x, y, z) with x a vertex of the
//! multiple-choice box (per subset: one node or none), y binary and
//! z = x y^T. Enumeration is deterministic: subset choices advance as a
//! mixed-radix counter (none first), y as a binary counter with j = 0 the
//! least significant bit.

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::instance::{Instance, LinearConstraint, Point, Sense, Var};
use crate::rng::SplitMix64;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("vertex count {0} exceeds the enumeration cap {1}")]
    CapExceeded(u128, u128),
    #[error("constraint is not valid; facet rank undefined")]
    InvalidConstraint,
}

pub const DEFAULT_VERTEX_CAP: u128 = 1 << 22;

/// (prod_I (|I|+1)) * 2^|Y|.
pub fn vertex_count(inst: &Instance) -> u128 {
    let mut n: u128 = 1;
    for subset in inst.subsets() {
        n *= (subset.len() + 1) as u128;
    }
    n << inst.ny()
}

fn vertex_from_pattern(inst: &Instance, choices: &[Option<usize>], ybits: u64) -> Point {
    let mut p = Point::zeros(inst);
    for &choice in choices {
        if let Some(i) = choice {
            p.values[i] = 1.0;
        }
    }
    for j in 0..inst.ny() {
        if (ybits >> j) & 1 == 1 {
            p.set(inst, Var::Y(j), 1.0);
        }
    }
    for &(i, j) in inst.edges() {
        let v = p.x(inst, i) * p.y(inst, j);
        p.set(inst, Var::Z(i, j), v);
    }
    p
}

/// All vertices in deterministic order.
pub fn enumerate_vertices(inst: &Instance, cap: u128) -> Result<Vec<Point>, OracleError> {
    let count = vertex_count(inst);
    if count > cap {
        return Err(OracleError::CapExceeded(count, cap));
    }
    let k = inst.n_subsets();
    let mut choices: Vec<Option<usize>> = vec![None; k];
    let mut digits = vec![0usize; k];
    let mut out = Vec::with_capacity(count as usize);
    loop {
        for ybits in 0..(1u64 << inst.ny()) {
            out.push(vertex_from_pattern(inst, &choices, ybits));
        }
        // Advance the mixed-radix counter over subset choices.
        let mut s = 0;
        loop {
            if s == k {
                return Ok(out);
            }
            digits[s] += 1;
            if digits[s] <= inst.subsets()[s].len() {
                choices[s] = Some(inst.subsets()[s][digits[s] - 1]);
                break;
            }
            digits[s] = 0;
            choices[s] = None;
            s += 1;
        }
    }
}

/// A uniformly random vertex.
pub fn sample_vertex(inst: &Instance, rng: &mut SplitMix64) -> Point {
    let mut choices = Vec::with_capacity(inst.n_subsets());
    for subset in inst.subsets() {
        let pick = rng.below(subset.len() + 1);
        choices.push(if pick == 0 { None } else { Some(subset[pick - 1]) });
    }
    let ybits = rng.next_u64() & ((1u64 << inst.ny()) - 1);
    vertex_from_pattern(inst, &choices, ybits)
}

/// Objective value of the best vertex, maximized exactly over all y patterns
/// with the x choice per subset optimized analytically.
pub fn integer_optimum(inst: &Instance, obj: &[f64]) -> (f64, Point) {
    let ny = inst.ny();
    let mut best = f64::NEG_INFINITY;
    let mut best_y = 0u64;
    let mut best_choices: Vec<Option<usize>> = vec![None; inst.n_subsets()];
    for ybits in 0..(1u64 << ny) {
        let mut val = 0.0;
        for j in 0..ny {
            if (ybits >> j) & 1 == 1 {
                val += obj[inst.nx() + j];
            }
        }
        let mut choices = Vec::with_capacity(inst.n_subsets());
        for subset in inst.subsets() {
            let mut sub_best = 0.0;
            let mut sub_choice = None;
            for &i in subset {
                let mut gain = obj[i];
                for &j in inst.neighbours_of_x(i) {
                    if (ybits >> j) & 1 == 1 {
                        gain += obj[inst.var_index(Var::Z(i, j))];
                    }
                }
                if gain > sub_best {
                    sub_best = gain;
                    sub_choice = Some(i);
                }
            }
            val += sub_best;
            choices.push(sub_choice);
        }
        if val > best {
            best = val;
            best_y = ybits;
            best_choices = choices;
        }
    }
    let point = vertex_from_pattern(inst, &best_choices, best_y);
    (best, point)
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Exact-rational integer optimum (same enumeration as `integer_optimum`).
pub fn integer_optimum_exact(inst: &Instance, obj: &[BigRational]) -> BigRational {
    let ny = inst.ny();
    let mut best: Option<BigRational> = None;
    for ybits in 0..(1u64 << ny) {
        let mut val = BigRational::zero();
        for j in 0..ny {
            if (ybits >> j) & 1 == 1 {
                val += &obj[inst.nx() + j];
            }
        }
        for subset in inst.subsets() {
            let mut sub_best = BigRational::zero();
            for &i in subset {
                let mut gain = obj[i].clone();
                for &j in inst.neighbours_of_x(i) {
                    if (ybits >> j) & 1 == 1 {
                        gain += &obj[inst.var_index(Var::Z(i, j))];
                    }
                }
                if gain > sub_best {
                    sub_best = gain;
                }
            }
            val += sub_best;
        }
        if best.as_ref().map_or(true, |b| val > *b) {
            best = Some(val);
        }
    }
    best.unwrap()
}

/// Validity verdict with a violating vertex when invalid.
#[derive(Debug, Clone)]
pub struct Validity {
    pub valid: bool,
    pub witness: Option<Point>,
}

/// Exact check that every vertex satisfies the constraint. Uses the same
/// y-pattern enumeration as `integer_optimum`, evaluated in rationals so
/// integer-coefficient constraints are decided without tolerance.
pub fn is_valid(inst: &Instance, c: &LinearConstraint) -> Validity {
    let le_ok = match c.sense {
        Sense::Ge => true,
        Sense::Le | Sense::Eq => extreme_ok(inst, c, false),
    };
    if !le_ok {
        return Validity {
            valid: false,
            witness: Some(extreme_witness(inst, c, false)),
        };
    }
    let ge_ok = match c.sense {
        Sense::Le => true,
        Sense::Ge | Sense::Eq => extreme_ok(inst, c, true),
    };
    if !ge_ok {
        return Validity {
            valid: false,
            witness: Some(extreme_witness(inst, c, true)),
        };
    }
    Validity {
        valid: true,
        witness: None,
    }
}

/// Max (minimize=false) or min (true) of the constraint's lhs over vertices,
/// compared against rhs.
fn extreme_ok(inst: &Instance, c: &LinearConstraint, minimize: bool) -> bool {
    let (val, _, _) = extremal_lhs(inst, c, minimize);
    let rhs = rat(c.rhs);
    if minimize {
        val >= rhs
    } else {
        val <= rhs
    }
}

fn extreme_witness(inst: &Instance, c: &LinearConstraint, minimize: bool) -> Point {
    let (_, choices, ybits) = extremal_lhs(inst, c, minimize);
    vertex_from_pattern(inst, &choices, ybits)
}

fn extremal_lhs(
    inst: &Instance,
    c: &LinearConstraint,
    minimize: bool,
) -> (BigRational, Vec<Option<usize>>, u64) {
    // Integer-coefficient constraints (every family member) are decided in
    // f64: sums of small integers are exact there and orders of magnitude
    // faster than rational arithmetic.
    let integral =
        c.terms.iter().all(|&(_, a)| a.fract() == 0.0 && a.abs() < 1e12) && c.rhs.fract() == 0.0;
    if integral {
        let (val, choices, ybits) = extremal_lhs_f64(inst, c, minimize);
        return (rat(val), choices, ybits);
    }
    let ny = inst.ny();
    let mut a = vec![BigRational::zero(); inst.n_vars()];
    for &(v, coeff) in &c.terms {
        a[inst.var_index(v)] = rat(coeff);
    }
    let sign = if minimize {
        -BigRational::one()
    } else {
        BigRational::one()
    };
    let mut best: Option<(BigRational, Vec<Option<usize>>, u64)> = None;
    for ybits in 0..(1u64 << ny) {
        let mut val = BigRational::zero();
        for j in 0..ny {
            if (ybits >> j) & 1 == 1 {
                val += &sign * &a[inst.nx() + j];
            }
        }
        let mut choices = Vec::with_capacity(inst.n_subsets());
        for subset in inst.subsets() {
            let mut sub_best = BigRational::zero();
            let mut sub_choice = None;
            for &i in subset {
                let mut gain = &sign * &a[i];
                for &j in inst.neighbours_of_x(i) {
                    if (ybits >> j) & 1 == 1 {
                        gain += &sign * &a[inst.var_index(Var::Z(i, j))];
                    }
                }
                if gain > sub_best {
                    sub_best = gain;
                    sub_choice = Some(i);
                }
            }
            val += sub_best;
            choices.push(sub_choice);
        }
        if best.as_ref().map_or(true, |(b, _, _)| val > *b) {
            best = Some((val, choices, ybits));
        }
    }
    let (val, choices, ybits) = best.unwrap();
    (&sign * val, choices, ybits)
}

fn extremal_lhs_f64(
    inst: &Instance,
    c: &LinearConstraint,
    minimize: bool,
) -> (f64, Vec<Option<usize>>, u64) {
    let ny = inst.ny();
    let mut a = vec![0.0f64; inst.n_vars()];
    for &(v, coeff) in &c.terms {
        a[inst.var_index(v)] = coeff;
    }
    let sign = if minimize { -1.0 } else { 1.0 };
    let mut best = f64::NEG_INFINITY;
    let mut best_choices: Vec<Option<usize>> = Vec::new();
    let mut best_y = 0u64;
    for ybits in 0..(1u64 << ny) {
        let mut val = 0.0;
        for j in 0..ny {
            if (ybits >> j) & 1 == 1 {
                val += sign * a[inst.nx() + j];
            }
        }
        let mut choices = Vec::with_capacity(inst.n_subsets());
        for subset in inst.subsets() {
            let mut sub_best = 0.0;
            let mut sub_choice = None;
            for &i in subset {
                let mut gain = sign * a[i];
                for &j in inst.neighbours_of_x(i) {
                    if (ybits >> j) & 1 == 1 {
                        gain += sign * a[inst.var_index(Var::Z(i, j))];
                    }
                }
                if gain > sub_best {
                    sub_best = gain;
                    sub_choice = Some(i);
                }
            }
            val += sub_best;
            choices.push(sub_choice);
        }
        if val > best {
            best = val;
            best_choices = choices;
            best_y = ybits;
        }
    }
    (sign * best, best_choices, best_y)
}

/// Rank of a rational matrix by Gaussian elimination.
fn rational_rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let pivot = (rank..rows.len()).find(|&r| !rows[r][col].is_zero());
        let Some(pr) = pivot else { continue };
        rows.swap(rank, pr);
        let pv = rows[rank][col].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let factor = &rows[r][col] / &pv;
                for cc in col..ncols {
                    let sub = &factor * &rows[rank][cc];
                    rows[r][cc] -= sub;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Affine dimension of a point set: rank of differences from the first point.
/// Empty set has affine dimension -1, a single point 0.
pub fn affine_dimension(points: &[Vec<BigRational>]) -> isize {
    match points.split_first() {
        None => -1,
        Some((first, rest)) => {
            let diffs: Vec<Vec<BigRational>> = rest
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(first.iter())
                        .map(|(a, b)| a - b)
                        .collect()
                })
                .collect();
            rational_rank(diffs) as isize
        }
    }
}

fn point_to_rationals(p: &Point) -> Vec<BigRational> {
    p.values.iter().map(|&v| rat(v)).collect()
}

/// Affine dimension of the face induced by a valid constraint: the rank of
/// the exactly-tight vertex set. The constraint defines a facet iff the
/// result equals n_vars - 1.
pub fn facet_rank(
    inst: &Instance,
    c: &LinearConstraint,
    cap: u128,
) -> Result<isize, OracleError> {
    if !is_valid(inst, c).valid {
        return Err(OracleError::InvalidConstraint);
    }
    let vertices = enumerate_vertices(inst, cap)?;
    let mut a = vec![BigRational::zero(); inst.n_vars()];
    for &(v, coeff) in &c.terms {
        a[inst.var_index(v)] = rat(coeff);
    }
    let rhs = rat(c.rhs);
    let tight: Vec<Vec<BigRational>> = vertices
        .iter()
        .filter_map(|v| {
            let rv = point_to_rationals(v);
            let lhs: BigRational = rv
                .iter()
                .zip(a.iter())
                .map(|(x, coeff)| x * coeff)
                .sum();
            (lhs == rhs).then_some(rv)
        })
        .collect();
    Ok(affine_dimension(&tight))
}

/// Affine dimension of the whole vertex set (full-dimensionality check).
pub fn polytope_dimension(inst: &Instance, cap: u128) -> Result<isize, OracleError> {
    let vertices = enumerate_vertices(inst, cap)?;
    let pts: Vec<Vec<BigRational>> = vertices.iter().map(point_to_rationals).collect();
    Ok(affine_dimension(&pts))
}

/// Family kinds known to the exhaustive most-violated search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// Cycle inequalities, m = 2; `copying` enables non-singleton selections.
    Cycle { copying: bool },
    Arrow1,
    Arrow2,
    /// Copyings of arrow inequalities (disjoint group selections).
    Arrow1Copy,
    Arrow2Copy,
    Bell { m: usize },
}

fn all_nonempty_subsets(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u64..(1 << items.len()) {
        let mut sel = Vec::new();
        for (b, &i) in items.iter().enumerate() {
            if (mask >> b) & 1 == 1 {
                sel.push(i);
            }
        }
        out.push(sel);
    }
    out
}

fn singletons(items: &[usize]) -> Vec<Vec<usize>> {
    items.iter().map(|&i| vec![i]).collect()
}

/// Exhaustive search for the most violated family member at p, optionally
/// over all switchings of each member. Returns the best (constraint,
/// violation); violation <= 0 means nothing in the family is violated.
pub fn brute_force_most_violated(
    inst: &Instance,
    kind: FamilyKind,
    p: &Point,
    switchings: bool,
) -> Option<(LinearConstraint, f64)> {
    let mut best: Option<(LinearConstraint, f64)> = None;
    let mut consider = |c: LinearConstraint| {
        if switchings {
            for mask in 0u64..(1 << inst.ny()) {
                let hat: Vec<usize> = (0..inst.ny()).filter(|j| (mask >> j) & 1 == 1).collect();
                let sc = crate::transforms::switch(inst, &c, &hat).expect("switch");
                let viol = sc.violation_at(inst, p);
                if best.as_ref().map_or(true, |(_, bv)| viol > *bv) {
                    best = Some((sc, viol));
                }
            }
        } else {
            let viol = c.violation_at(inst, p);
            if best.as_ref().map_or(true, |(_, bv)| viol > *bv) {
                best = Some((c, viol));
            }
        }
    };

    let k = inst.n_subsets();
    match kind {
        FamilyKind::Cycle { copying } => {
            for j1 in 0..inst.ny() {
                for j2 in 0..inst.ny() {
                    if j1 == j2 {
                        continue;
                    }
                    for s1 in 0..k {
                        for s2 in 0..k {
                            if s1 == s2 {
                                continue;
                            }
                            let sel1 = if copying {
                                all_nonempty_subsets(&inst.subsets()[s1])
                            } else {
                                singletons(&inst.subsets()[s1])
                            };
                            let sel2 = if copying {
                                all_nonempty_subsets(&inst.subsets()[s2])
                            } else {
                                singletons(&inst.subsets()[s2])
                            };
                            for a in &sel1 {
                                for b in &sel2 {
                                    let spec = crate::families::CycleSpec {
                                        subsets: vec![s1, s2],
                                        ys: vec![j1, j2],
                                        selections: vec![a.clone(), b.clone()],
                                    };
                                    if let Ok(c) =
                                        crate::families::cycle_copy_inequality(inst, &spec)
                                    {
                                        consider(c);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        FamilyKind::Arrow1 | FamilyKind::Arrow2 => {
            for_each_arrow_selection(inst, |i1, others, ys| {
                let c = match kind {
                    FamilyKind::Arrow1 => {
                        crate::families::arrow1_inequality(inst, i1, others, ys)
                    }
                    _ => crate::families::arrow2_inequality(inst, i1, others, ys),
                };
                if let Ok(c) = c {
                    consider(c);
                }
            });
        }
        FamilyKind::Arrow1Copy | FamilyKind::Arrow2Copy => {
            for_each_arrow_copy_selection(inst, |s1, groups, ys| {
                let c = match kind {
                    FamilyKind::Arrow1Copy => {
                        crate::families::arrow1_copy_inequality(inst, s1, groups, ys)
                    }
                    _ => crate::families::arrow2_copy_inequality(inst, s1, groups, ys),
                };
                if let Ok(c) = c {
                    consider(c);
                }
            });
        }
        FamilyKind::Bell { m } => {
            let mut reps = Vec::new();
            let mut ys = Vec::new();
            bell_recurse(inst, m, &mut reps, &mut ys, &mut consider);
        }
    }
    best
}

fn bell_recurse(
    inst: &Instance,
    m: usize,
    reps: &mut Vec<usize>,
    ys: &mut Vec<usize>,
    consider: &mut impl FnMut(LinearConstraint),
) {
    if reps.len() == m {
        if ys.len() == m {
            if let Ok(c) = crate::families::bell_inequality(inst, reps, ys) {
                consider(c);
            }
            return;
        }
        for j in 0..inst.ny() {
            if ys.contains(&j) {
                continue;
            }
            ys.push(j);
            bell_recurse(inst, m, reps, ys, consider);
            ys.pop();
        }
        return;
    }
    for i in 0..inst.nx() {
        if reps
            .iter()
            .any(|&r| inst.subset_of(r) == inst.subset_of(i))
        {
            continue;
        }
        reps.push(i);
        bell_recurse(inst, m, reps, ys, consider);
        reps.pop();
    }
}

/// Enumerates (i1, [i_2..i_m], [j_1..j_m]) selections for the arrow families,
/// for every m from 3 up to the instance limits.
fn for_each_arrow_selection(inst: &Instance, mut f: impl FnMut(usize, &[usize], &[usize])) {
    let k = inst.n_subsets();
    for s1 in 0..k {
        for s2 in 0..k {
            if s1 == s2 {
                continue;
            }
            let i2pool = &inst.subsets()[s2];
            let max_m = (i2pool.len() + 1).min(inst.ny());
            for m in 3..=max_m {
                for &i1 in &inst.subsets()[s1] {
                    let mut others = Vec::new();
                    let mut ys = Vec::new();
                    arrow_tuples(inst, i2pool, m, &mut others, &mut ys, &mut |o, y| {
                        f(i1, o, y)
                    });
                }
            }
        }
    }
}

fn arrow_tuples(
    inst: &Instance,
    i2pool: &[usize],
    m: usize,
    others: &mut Vec<usize>,
    ys: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize], &[usize]),
) {
    if ys.len() < m {
        for j in 0..inst.ny() {
            if ys.contains(&j) {
                continue;
            }
            ys.push(j);
            arrow_tuples(inst, i2pool, m, others, ys, f);
            ys.pop();
        }
        return;
    }
    if others.len() == m - 1 {
        f(others, ys);
        return;
    }
    for &i in i2pool {
        if others.contains(&i) {
            continue;
        }
        others.push(i);
        arrow_tuples(inst, i2pool, m, others, ys, f);
        others.pop();
    }
}

/// Enumerates (S_1, [S_2..S_m], [j_1..j_m]) selections for the arrow+copying
/// families: S_1 nonempty, groups pairwise disjoint and nonempty.
fn for_each_arrow_copy_selection(
    inst: &Instance,
    mut f: impl FnMut(&[usize], &[Vec<usize>], &[usize]),
) {
    let k = inst.n_subsets();
    for s1 in 0..k {
        for s2 in 0..k {
            if s1 == s2 {
                continue;
            }
            let pool2 = &inst.subsets()[s2];
            let max_m = (pool2.len() + 1).min(inst.ny());
            for m in 3..=max_m {
                let sel1s = all_nonempty_subsets(&inst.subsets()[s1]);
                let mut ys: Vec<usize> = Vec::new();
                y_tuples(inst.ny(), m, &mut ys, &mut |ys: &[usize]| {
                    let mut assignment = vec![0usize; pool2.len()];
                    group_assignments(pool2, m - 1, 0, &mut assignment, &mut |groups| {
                        for s1sel in &sel1s {
                            f(s1sel, groups, ys);
                        }
                    });
                });
            }
        }
    }
}

fn y_tuples(ny: usize, m: usize, ys: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if ys.len() == m {
        f(ys);
        return;
    }
    for j in 0..ny {
        if ys.contains(&j) {
            continue;
        }
        ys.push(j);
        y_tuples(ny, m, ys, f);
        ys.pop();
    }
}

/// Assigns each node of the pool to a group 1..=g or to none (0), then keeps
/// assignments where every group is non-empty.
fn group_assignments(
    pool: &[usize],
    g: usize,
    idx: usize,
    assignment: &mut Vec<usize>,
    f: &mut impl FnMut(&[Vec<usize>]),
) {
    if idx == pool.len() {
        let mut groups = vec![Vec::new(); g];
        for (n, &a) in assignment.iter().enumerate() {
            if a > 0 {
                groups[a - 1].push(pool[n]);
            }
        }
        if groups.iter().all(|gr| !gr.is_empty()) {
            f(&groups);
        }
        return;
    }
    for a in 0..=g {
        assignment[idx] = a;
        group_assignments(pool, g, idx + 1, assignment, f);
    }
}
