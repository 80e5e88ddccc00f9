//! Dense two-phase primal simplex over f64 or exact rationals, plus the
//! McCormick relaxation builder.
//!
//! Pricing is most-negative reduced cost with ties broken by lowest index;
//! after a run of degenerate pivots the solver falls back to Bland's rule
//! (lowest eligible index) until the objective moves again, which prevents
//! cycling. In rational mode all tolerances are exactly zero and runs are
//! bit-identical.

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::instance::{Instance, LinearConstraint, Point, Sense, Var};

#[derive(Debug, Error)]
pub enum LpError {
    #[error("variable {0} has invalid bounds [{1}, {2}]")]
    BadBounds(usize, f64, f64),
    #[error("row references column {0} out of range")]
    BadColumn(usize),
}

/// Number field the solver runs over. f64 carries the floating tolerances,
/// BigRational compares exactly.
pub trait Scalar: Clone + PartialOrd + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Feasibility tolerance (phase-1 residual, ratio-test pivots).
    fn feas_tol() -> Self;
    /// Optimality tolerance (reduced costs).
    fn opt_tol() -> Self;
    /// dst -= factor * src, elementwise over equal-length slices.
    fn axpy_neg(dst: &mut [Self], src: &[Self], factor: &Self);
    /// dst /= divisor, elementwise.
    fn scale_div(dst: &mut [Self], divisor: &Self);
    /// dst[j] -= factor * src[j] for the listed indices only.
    fn axpy_neg_indexed(dst: &mut [Self], src: &[Self], idx: &[u32], factor: &Self) {
        let _ = idx;
        Self::axpy_neg(dst, src, factor);
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn feas_tol() -> Self {
        1e-7
    }
    fn opt_tol() -> Self {
        1e-9
    }
    fn axpy_neg(dst: &mut [Self], src: &[Self], factor: &Self) {
        let f = *factor;
        for (d, &s) in dst.iter_mut().zip(src.iter()) {
            *d -= f * s;
        }
    }
    fn scale_div(dst: &mut [Self], divisor: &Self) {
        let inv = 1.0 / divisor;
        for d in dst.iter_mut() {
            *d *= inv;
        }
    }
    fn axpy_neg_indexed(dst: &mut [Self], src: &[Self], idx: &[u32], factor: &Self) {
        let f = *factor;
        for &j in idx {
            let j = j as usize;
            dst[j] -= f * src[j];
        }
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite value")
    }
    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn feas_tol() -> Self {
        num_traits::Zero::zero()
    }
    fn opt_tol() -> Self {
        num_traits::Zero::zero()
    }
    fn axpy_neg(dst: &mut [Self], src: &[Self], factor: &Self) {
        for (d, s) in dst.iter_mut().zip(src.iter()) {
            if !Zero::is_zero(s) {
                *d -= factor * s;
            }
        }
    }
    fn scale_div(dst: &mut [Self], divisor: &Self) {
        for d in dst.iter_mut() {
            if !Zero::is_zero(d) {
                *d /= divisor;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// An LP over plain column indices. Instance-level builders keep columns in
/// the canonical variable order so solutions convert directly to points.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub n_cols: usize,
    pub maximize: bool,
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    /// Per-column [lo, hi]; hi may be f64::INFINITY.
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    pub fn new(n_cols: usize, maximize: bool) -> Self {
        LpProblem {
            n_cols,
            maximize,
            objective: vec![0.0; n_cols],
            rows: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n_cols],
        }
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(LpRow { terms, sense, rhs });
    }

    pub fn add_constraint(&mut self, inst: &Instance, c: &LinearConstraint) {
        let terms = c
            .terms
            .iter()
            .map(|&(v, coeff)| (inst.var_index(v), coeff))
            .collect();
        self.add_row(terms, c.sense, c.rhs);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpSolution<S> {
    pub status: LpStatus,
    pub value: S,
    pub point: Vec<S>,
    /// Row duals in input row order (only filled on request).
    pub duals: Option<Vec<S>>,
    /// Simplex pivots spent across both phases.
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub iteration_limit: usize,
    pub want_duals: bool,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_threshold: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            iteration_limit: 1_000_000,
            want_duals: false,
            stall_threshold: 64,
        }
    }
}

pub fn solve(p: &LpProblem) -> Result<LpSolution<f64>, LpError> {
    solve_with::<f64>(p, &SolveOptions::default())
}

pub fn solve_exact(p: &LpProblem) -> Result<LpSolution<BigRational>, LpError> {
    solve_with::<BigRational>(p, &SolveOptions::default())
}

/// Dense tableau with basis bookkeeping. Columns: structurals (bound-shifted
/// to lo = 0), then one slack/surplus per row, then artificials, then rhs.
struct Tableau<S> {
    width: usize,
    n_rows: usize,
    data: Vec<S>,
    basis: Vec<usize>,
    /// Cost row (reduced costs) incl. rhs cell, maintained incrementally.
    cost: Vec<S>,
    n_structural: usize,
    artificial_start: usize,
}

impl<S: Scalar> Tableau<S> {
    fn at(&self, r: usize, c: usize) -> &S {
        &self.data[r * self.width + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let width = self.width;
        let pivot_val = self.at(pr, pc).clone();
        {
            let row = &mut self.data[pr * width..(pr + 1) * width];
            S::scale_div(row, &pivot_val);
            row[pc] = S::one();
        }
        let pivot_row: Vec<S> = self.data[pr * width..(pr + 1) * width].to_vec();
        // Sparse pivot rows are updated through their nonzero index list,
        // which cuts the memory traffic on large cut-augmented tableaus.
        let nz: Vec<u32> = pivot_row
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, _)| j as u32)
            .collect();
        let use_indexed = nz.len() * 3 < width;
        for r in 0..self.n_rows {
            if r == pr {
                continue;
            }
            let factor = self.at(r, pc).clone();
            if factor.is_zero() {
                continue;
            }
            let row = &mut self.data[r * width..(r + 1) * width];
            if use_indexed {
                S::axpy_neg_indexed(row, &pivot_row, &nz, &factor);
            } else {
                S::axpy_neg(row, &pivot_row, &factor);
            }
            row[pc] = S::zero();
        }
        let factor = self.cost[pc].clone();
        if !factor.is_zero() {
            S::axpy_neg(&mut self.cost, &pivot_row, &factor);
            self.cost[pc] = S::zero();
        }
        self.basis[pr] = pc;
    }

    /// Entering column: most negative reduced cost (ties lowest index), or
    /// lowest index with negative reduced cost in Bland mode. Artificials
    /// are barred once phase 1 is done.
    fn entering(&self, bland: bool, allow_artificial: bool, tol: &S) -> Option<usize> {
        let limit = if allow_artificial {
            self.width - 1
        } else {
            self.artificial_start
        };
        let threshold = tol.neg();
        if bland {
            (0..limit).find(|&c| self.cost[c] < threshold)
        } else {
            let mut best: Option<usize> = None;
            for c in 0..limit {
                if self.cost[c] < threshold
                    && best.map_or(true, |b| self.cost[c] < self.cost[b])
                {
                    best = Some(c);
                }
            }
            best
        }
    }

    /// Lexicographic ratio test: among rows with a_rc > tol, the row whose
    /// scaled vector (rhs first, then all columns) is lexicographically
    /// minimal. Keeps every row lex-positive, so no basis repeats regardless
    /// of the pricing rule. Ties are broken scanning the slack/artificial
    /// block first, where rows differ earliest.
    fn leaving(&self, pc: usize, tol: &S) -> Option<usize> {
        let rhs_col = self.width - 1;
        let mut candidates: Vec<(usize, S)> = (0..self.n_rows)
            .filter(|&r| *self.at(r, pc) > *tol)
            .map(|r| (r, S::one().div(self.at(r, pc))))
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let filter_min = |cands: &mut Vec<(usize, S)>, t: &Tableau<S>, col: usize| {
            let mut min_val: Option<S> = None;
            for (r, inv) in cands.iter() {
                let v = t.at(*r, col).mul(inv);
                if min_val.as_ref().map_or(true, |m| v < *m) {
                    min_val = Some(v);
                }
            }
            let m = min_val.unwrap();
            cands.retain(|(r, inv)| t.at(*r, col).mul(inv) == m);
        };
        filter_min(&mut candidates, self, rhs_col);
        let n_struct = self.n_structural;
        let mut col = n_struct;
        while candidates.len() > 1 && col < rhs_col {
            filter_min(&mut candidates, self, col);
            col += 1;
        }
        let mut col = 0;
        while candidates.len() > 1 && col < n_struct {
            filter_min(&mut candidates, self, col);
            col += 1;
        }
        Some(candidates[0].0)
    }

    /// Internal maximization objective (the cost row is kept as z - c, so
    /// its rhs cell tracks the objective).
    fn objective_value(&self) -> S {
        self.cost[self.width - 1].clone()
    }
}

enum PhaseOutcome {
    Done,
    IterationLimit,
    Unbounded,
}

fn run_phase<S: Scalar>(
    t: &mut Tableau<S>,
    allow_artificial: bool,
    opts: &SolveOptions,
    iterations: &mut usize,
) -> PhaseOutcome {
    let opt_tol = S::opt_tol();
    let feas_tol = S::feas_tol();
    // Dantzig pricing with a Bland fallback after a long degenerate stall;
    // the lexicographic ratio test already rules out cycling, the fallback
    // guards against float-noise edge cases.
    let mut bland = false;
    let mut stall = 0usize;
    let mut last_obj = t.objective_value();
    loop {
        if *iterations >= opts.iteration_limit {
            return PhaseOutcome::IterationLimit;
        }
        let Some(pc) = t.entering(bland, allow_artificial, &opt_tol) else {
            return PhaseOutcome::Done;
        };
        let Some(pr) = t.leaving(pc, &feas_tol) else {
            return PhaseOutcome::Unbounded;
        };
        t.pivot(pr, pc);
        *iterations += 1;
        let obj = t.objective_value();
        if obj > last_obj {
            stall = 0;
            bland = false;
        } else {
            stall += 1;
            if stall >= opts.stall_threshold * 64 {
                bland = true;
            }
        }
        last_obj = obj;
    }
}

pub fn solve_with<S: Scalar>(p: &LpProblem, opts: &SolveOptions) -> Result<LpSolution<S>, LpError> {
    for (c, &(lo, hi)) in p.bounds.iter().enumerate() {
        if lo > hi || !lo.is_finite() {
            return Err(LpError::BadBounds(c, lo, hi));
        }
    }
    for row in &p.rows {
        for &(c, _) in &row.terms {
            if c >= p.n_cols {
                return Err(LpError::BadColumn(c));
            }
        }
    }

    let n = p.n_cols;
    let lo: Vec<S> = p.bounds.iter().map(|&(l, _)| S::from_f64(l)).collect();

    // Row set: input rows with bounds substituted (x = x' + lo), plus one
    // upper-bound row per finite hi.
    struct NormRow<S> {
        terms: Vec<(usize, S)>,
        is_eq: bool,
        rhs: S,
    }
    let mut rows: Vec<NormRow<S>> = Vec::with_capacity(p.rows.len() + n);
    for row in &p.rows {
        let mut rhs = S::from_f64(row.rhs);
        let mut terms: Vec<(usize, S)> = Vec::with_capacity(row.terms.len());
        for &(c, coeff) in &row.terms {
            let coeff = S::from_f64(coeff);
            rhs = rhs.sub(&coeff.mul(&lo[c]));
            terms.push((c, coeff));
        }
        let (terms, is_eq, rhs) = match row.sense {
            Sense::Le => (terms, false, rhs),
            Sense::Eq => (terms, true, rhs),
            Sense::Ge => (
                terms.into_iter().map(|(c, v)| (c, v.neg())).collect(),
                false,
                rhs.neg(),
            ),
        };
        rows.push(NormRow { terms, is_eq, rhs });
    }
    for (c, &(l, h)) in p.bounds.iter().enumerate() {
        if h.is_finite() {
            rows.push(NormRow {
                terms: vec![(c, S::one())],
                is_eq: false,
                rhs: S::from_f64(h).sub(&S::from_f64(l)),
            });
        }
    }
    // Normalize to rhs >= 0 (flips Le rows with negative rhs to Ge form,
    // handled below with surplus + artificial).
    let zero = S::zero();
    let m = rows.len();
    let mut needs_artificial = vec![false; m];
    let mut surplus_sign: Vec<Option<bool>> = vec![None; m]; // Some(true) = +slack
    let mut flipped = vec![false; m];
    for (r, row) in rows.iter_mut().enumerate() {
        if row.rhs < zero {
            row.rhs = row.rhs.neg();
            for t in row.terms.iter_mut() {
                t.1 = t.1.neg();
            }
            flipped[r] = true;
            if !row.is_eq {
                // was <=, now >=: surplus with artificial.
                surplus_sign[r] = Some(false);
            }
            needs_artificial[r] = true;
        } else if !row.is_eq {
            surplus_sign[r] = Some(true);
        } else {
            needs_artificial[r] = true;
        }
    }
    let n_slack = surplus_sign.iter().filter(|s| s.is_some()).count();
    let n_art = needs_artificial.iter().filter(|&&a| a).count();
    let artificial_start = n + n_slack;
    let width = n + n_slack + n_art + 1;
    let rhs_col = width - 1;

    let mut t = Tableau {
        width,
        n_rows: m,
        data: vec![S::zero(); m * width],
        basis: vec![usize::MAX; m],
        cost: vec![S::zero(); width],
        n_structural: n,
        artificial_start,
    };
    let mut slack_of_row: Vec<Option<usize>> = vec![None; m];
    let mut art_of_row: Vec<Option<usize>> = vec![None; m];
    {
        let mut next_slack = n;
        let mut next_art = artificial_start;
        for (r, row) in rows.iter().enumerate() {
            for (c, coeff) in &row.terms {
                let cell = &mut t.data[r * width + c];
                *cell = cell.add(coeff);
            }
            t.data[r * width + rhs_col] = row.rhs.clone();
            if let Some(plus) = surplus_sign[r] {
                t.data[r * width + next_slack] = if plus { S::one() } else { S::one().neg() };
                slack_of_row[r] = Some(next_slack);
                if plus {
                    t.basis[r] = next_slack;
                }
                next_slack += 1;
            }
            if needs_artificial[r] {
                t.data[r * width + next_art] = S::one();
                art_of_row[r] = Some(next_art);
                t.basis[r] = next_art;
                next_art += 1;
            }
        }
    }

    let mut iterations = 0usize;

    // Phase 1: minimize the sum of artificials (as a maximization of the
    // negated sum), priced out against the starting basis.
    if n_art > 0 {
        for c in artificial_start..width - 1 {
            t.cost[c] = S::one();
        }
        // Price out basic artificials: cost row -= sum of their rows.
        for r in 0..m {
            if art_of_row[r] == Some(t.basis[r]) {
                for c in 0..width {
                    let v = t.at(r, c).clone();
                    t.cost[c] = t.cost[c].sub(&v);
                }
            }
        }
        match run_phase(&mut t, true, opts, &mut iterations) {
            PhaseOutcome::IterationLimit => {
                return Ok(LpSolution {
                    status: LpStatus::IterationLimit,
                    value: S::zero(),
                    point: vec![],
                    duals: None,
                    iterations,
                })
            }
            PhaseOutcome::Unbounded => unreachable!("phase 1 objective is bounded"),
            PhaseOutcome::Done => {}
        }
        let residual = t.objective_value().neg();
        if residual > S::feas_tol() {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                value: S::zero(),
                point: vec![],
                duals: None,
                iterations,
            });
        }
        // Drive any basic artificial out of the basis where possible.
        for r in 0..m {
            if t.basis[r] >= artificial_start {
                let pc = (0..artificial_start).find(|&c| !t.at(r, c).is_zero());
                if let Some(pc) = pc {
                    t.pivot(r, pc);
                }
            }
        }
    }

    // Phase 2 cost row: internal form is maximization.
    let sign = if p.maximize { 1.0 } else { -1.0 };
    for c in 0..width {
        t.cost[c] = S::zero();
    }
    for c in 0..n {
        t.cost[c] = S::from_f64(-sign * p.objective[c]);
    }
    // Price out the current basis.
    for r in 0..m {
        let b = t.basis[r];
        if b != usize::MAX && !t.cost[b].is_zero() {
            let factor = t.cost[b].clone();
            for c in 0..width {
                let v = t.at(r, c).clone();
                t.cost[c] = t.cost[c].sub(&factor.mul(&v));
            }
        }
    }
    let status = match run_phase(&mut t, false, opts, &mut iterations) {
        PhaseOutcome::Done => LpStatus::Optimal,
        PhaseOutcome::IterationLimit => LpStatus::IterationLimit,
        PhaseOutcome::Unbounded => LpStatus::Unbounded,
    };
    if status != LpStatus::Optimal {
        return Ok(LpSolution {
            status,
            value: S::zero(),
            point: vec![],
            duals: None,
            iterations,
        });
    }

    let mut point: Vec<S> = lo.clone();
    for r in 0..m {
        let b = t.basis[r];
        if b < n {
            point[b] = point[b].add(t.at(r, rhs_col));
        }
    }
    let mut value = S::zero();
    for c in 0..n {
        value = value.add(&S::from_f64(p.objective[c]).mul(&point[c]));
    }
    let duals = if opts.want_duals {
        // Reduced cost of a row's slack (surplus has the sign flipped; pure
        // Eq rows read their artificial column) gives the dual of the row in
        // internal orientation; unwind the flips back to the user's row.
        let mut d = Vec::with_capacity(p.rows.len());
        for r in 0..p.rows.len() {
            let col = slack_of_row[r]
                .or(art_of_row[r])
                .expect("row has a slack or artificial column");
            let mut y = t.cost[col].clone();
            if surplus_sign[r] == Some(false) {
                y = y.neg();
            }
            if flipped[r] {
                y = y.neg();
            }
            // Ge rows were negated when normalizing to Le.
            if p.rows[r].sense == Sense::Ge {
                y = y.neg();
            }
            if !p.maximize {
                y = y.neg();
            }
            d.push(y);
        }
        Some(d)
    } else {
        None
    };
    Ok(LpSolution {
        status,
        value,
        point,
        duals,
        iterations,
    })
}

/// Incremental f64 solver for the cutting loop: cut rows (<= with the old
/// optimum cut off) are appended to the optimal tableau and re-optimized by
/// dual simplex pivots, instead of re-solving from scratch each round. The
/// cut rows must have nonnegative right-hand sides over shifted variables
/// (every family cut does: the origin is feasible).
///
/// Requires an LP whose initial solve needs no artificials (all rows Le
/// with rhs >= 0 after bound shifting), which holds for the relaxations the
/// loop builds.
pub struct IncrementalLp {
    t: Tableau<f64>,
    n_cols: usize,
    lo: Vec<f64>,
    objective: Vec<f64>,
    iterations: usize,
}

pub enum IncrementalOutcome {
    Optimal,
    /// Dual pivoting exceeded its budget; caller should fall back to a
    /// fresh solve.
    Stalled,
    Infeasible,
    Unbounded,
}

impl IncrementalLp {
    /// Builds and solves the base LP. Returns None when the problem shape
    /// needs artificials (delegate to `solve_with` in that case).
    pub fn new(p: &LpProblem, opts: &SolveOptions) -> Option<Result<(Self, LpStatus), LpError>> {
        for row in &p.rows {
            if row.sense != Sense::Le {
                return None;
            }
        }
        for (c, &(lo, hi)) in p.bounds.iter().enumerate() {
            if lo > hi || !lo.is_finite() {
                return Some(Err(LpError::BadBounds(c, lo, hi)));
            }
        }
        let n = p.n_cols;
        let lo: Vec<f64> = p.bounds.iter().map(|&(l, _)| l).collect();
        struct R {
            terms: Vec<(usize, f64)>,
            rhs: f64,
        }
        let mut rows: Vec<R> = Vec::with_capacity(p.rows.len() + n);
        for row in &p.rows {
            let mut rhs = row.rhs;
            for &(c, coeff) in &row.terms {
                if c >= n {
                    return Some(Err(LpError::BadColumn(c)));
                }
                rhs -= coeff * lo[c];
            }
            if rhs < 0.0 {
                return None;
            }
            rows.push(R {
                terms: row.terms.clone(),
                rhs,
            });
        }
        for (c, &(l, h)) in p.bounds.iter().enumerate() {
            if h.is_finite() {
                rows.push(R {
                    terms: vec![(c, 1.0)],
                    rhs: h - l,
                });
            }
        }
        let m = rows.len();
        let width = n + m + 1;
        let mut t = Tableau {
            width,
            n_rows: m,
            data: vec![0.0; m * width],
            basis: vec![usize::MAX; m],
            cost: vec![0.0; width],
            n_structural: n,
            artificial_start: width - 1,
        };
        for (r, row) in rows.iter().enumerate() {
            for &(c, coeff) in &row.terms {
                t.data[r * width + c] += coeff;
            }
            t.data[r * width + n + r] = 1.0;
            t.data[r * width + width - 1] = row.rhs;
            t.basis[r] = n + r;
        }
        for c in 0..n {
            t.cost[c] = -p.objective[c];
        }
        let mut slf = IncrementalLp {
            t,
            n_cols: n,
            lo,
            objective: p.objective.clone(),
            iterations: 0,
        };
        let status = match run_phase(&mut slf.t, false, opts, &mut slf.iterations) {
            PhaseOutcome::Done => LpStatus::Optimal,
            PhaseOutcome::Unbounded => LpStatus::Unbounded,
            PhaseOutcome::IterationLimit => LpStatus::IterationLimit,
        };
        Some(Ok((slf, status)))
    }

    pub fn point(&self) -> Vec<f64> {
        let mut point = self.lo.clone();
        let rhs_col = self.t.width - 1;
        for r in 0..self.t.n_rows {
            let b = self.t.basis[r];
            if b < self.n_cols {
                point[b] += self.t.data[r * self.t.width + rhs_col];
            }
        }
        point
    }

    pub fn value(&self) -> f64 {
        self.point()
            .iter()
            .zip(self.objective.iter())
            .map(|(x, c)| x * c)
            .sum()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Appends Le cut rows (expressed over the unshifted variables) and
    /// re-optimizes with dual simplex followed by a primal cleanup phase.
    pub fn add_cuts_and_reoptimize(
        &mut self,
        cuts: &[(Vec<(usize, f64)>, f64)],
        opts: &SolveOptions,
    ) -> IncrementalOutcome {
        let old_rows = self.t.n_rows;
        let old_width = self.t.width;
        let add = cuts.len();
        let new_rows = old_rows + add;
        let new_width = old_width + add;
        let rhs_old = old_width - 1;
        let rhs_new = new_width - 1;
        // Widen the tableau: one slack column per new row, rhs stays last.
        let mut data = vec![0.0f64; new_rows * new_width];
        for r in 0..old_rows {
            let src = &self.t.data[r * old_width..(r + 1) * old_width];
            let dst = &mut data[r * new_width..r * new_width + new_width];
            dst[..rhs_old].copy_from_slice(&src[..rhs_old]);
            dst[rhs_new] = src[rhs_old];
        }
        let mut cost = vec![0.0f64; new_width];
        cost[..rhs_old].copy_from_slice(&self.t.cost[..rhs_old]);
        cost[rhs_new] = self.t.cost[rhs_old];
        let mut basis = self.t.basis.clone();
        for (k, (terms, rhs)) in cuts.iter().enumerate() {
            let r = old_rows + k;
            let row_start = r * new_width;
            let mut shifted_rhs = *rhs;
            for &(c, coeff) in terms {
                data[row_start + c] += coeff;
                shifted_rhs -= coeff * self.lo[c];
            }
            data[row_start + old_rows + self.n_cols + k] = 1.0;
            data[row_start + rhs_new] = shifted_rhs;
            basis.push(old_rows + self.n_cols + k);
        }
        // The slack columns of the old tableau sit at n..n+old_rows; new
        // slacks follow them, so old column indices are unchanged.
        self.t = Tableau {
            width: new_width,
            n_rows: new_rows,
            data,
            basis,
            cost,
            n_structural: self.t.n_structural,
            artificial_start: new_width - 1,
        };
        // Express the new rows in the current basis: each original basic
        // coefficient is eliminated with its (unique) tableau row; rows of
        // the tableau are zero at every other basis column, so one pass
        // suffices.
        for k in 0..add {
            let r = old_rows + k;
            for old_r in 0..old_rows {
                let b = self.t.basis[old_r];
                let factor = self.t.data[r * new_width + b];
                if factor != 0.0 {
                    let (head, tail) = self.t.data.split_at_mut(r * new_width);
                    let src = &head[old_r * new_width..(old_r + 1) * new_width];
                    let dst = &mut tail[..new_width];
                    f64::axpy_neg(dst, src, &factor);
                    dst[b] = 0.0;
                }
            }
        }
        // Dual simplex until primal feasible.
        let budget = opts.stall_threshold.max(64) * 64 + 8 * new_rows;
        let mut dual_steps = 0usize;
        loop {
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..new_rows {
                let b = self.t.data[r * new_width + rhs_new];
                if b < -1e-9 && leave.map_or(true, |(_, lb)| b < lb) {
                    leave = Some((r, b));
                }
            }
            let Some((pr, _)) = leave else { break };
            let mut enter: Option<(usize, f64)> = None;
            for c in 0..rhs_new {
                let a = self.t.data[pr * new_width + c];
                if a < -1e-9 {
                    let ratio = self.t.cost[c] / (-a);
                    if enter.map_or(true, |(_, er)| ratio < er) {
                        enter = Some((c, ratio));
                    }
                }
            }
            let Some((pc, _)) = enter else {
                return IncrementalOutcome::Infeasible;
            };
            self.t.pivot(pr, pc);
            self.iterations += 1;
            dual_steps += 1;
            if dual_steps > budget {
                return IncrementalOutcome::Stalled;
            }
        }
        // Primal cleanup (usually a no-op: dual pivots keep reduced costs
        // nonnegative up to tolerance).
        match run_phase(&mut self.t, false, opts, &mut self.iterations) {
            PhaseOutcome::Done => IncrementalOutcome::Optimal,
            PhaseOutcome::Unbounded => IncrementalOutcome::Unbounded,
            PhaseOutcome::IterationLimit => IncrementalOutcome::Stalled,
        }
    }
}

/// The relaxation rows per edge — z >= 0, x + y - z <= 1, z <= x, z <= y —
/// plus the multiple-choice rows and the y boxes. The x and z variables are
/// left without explicit upper bounds: the multiple-choice rows cap x and
/// the z <= x rows cap z, so every variable still lives in [0, 1].
pub fn mccormick_relaxation(inst: &Instance, objective: &[f64]) -> LpProblem {
    let mut p = LpProblem::new(inst.n_vars(), true);
    p.objective = objective.to_vec();
    for j in 0..inst.ny() {
        p.bounds[inst.nx() + j] = (0.0, 1.0);
    }
    for &(i, j) in inst.edges() {
        let zi = inst.var_index(Var::Z(i, j));
        p.add_row(
            vec![(i, 1.0), (inst.nx() + j, 1.0), (zi, -1.0)],
            Sense::Le,
            1.0,
        );
        p.add_row(vec![(zi, 1.0), (i, -1.0)], Sense::Le, 0.0);
        p.add_row(vec![(zi, 1.0), (inst.nx() + j, -1.0)], Sense::Le, 0.0);
    }
    for subset in inst.subsets() {
        p.add_row(
            subset.iter().map(|&i| (i, 1.0)).collect(),
            Sense::Le,
            1.0,
        );
    }
    p
}

/// Builds the LP of all basic + RLT rows (used by the exact zero-gap checks
/// for cycle-free instances). The basic rows already box every variable —
/// y via its bound rows, x via nonnegativity plus the multiple-choice rows,
/// and z via rlt rows 4 and 5 — so no explicit bounds are added.
pub fn basic_rlt_lp(inst: &Instance, objective: &[f64]) -> LpProblem {
    let mut p = LpProblem::new(inst.n_vars(), true);
    p.objective = objective.to_vec();
    for c in crate::families::basic_inequalities(inst) {
        p.add_constraint(inst, &c);
    }
    for c in crate::families::rlt_inequalities(inst) {
        p.add_constraint(inst, &c);
    }
    p
}

pub fn solution_point(inst: &Instance, sol: &LpSolution<f64>) -> Point {
    assert_eq!(sol.point.len(), inst.n_vars());
    Point {
        values: sol.point.clone(),
    }
}
