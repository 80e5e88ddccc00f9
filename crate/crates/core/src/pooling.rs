//! Pooling-with-recipes model builders (the q and q+cuts formulations) and
//! LP-file export for external bilinear solvers.
//!
//! Arcs run input -> pool and pool -> output only. Each pool partitions its
//! inputs into material groups with fixed recipe proportions sigma summing
//! to one. The q+cuts formulation adds the per-group proportion equations,
//! their product-space counterparts, and the reformulation-linearization
//! rows of each pool's scaled product polytope.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::instance::Sense;

#[derive(Debug, Error)]
pub enum PoolingError {
    #[error("pool `{0}`: recipe proportions sum to {1}, expected 1")]
    BadSigma(String, f64),
    #[error("pool `{0}`: groups do not partition its inputs")]
    BadPartition(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone)]
pub struct PoolInput {
    pub name: String,
    pub avail: f64,
    /// One value per spec.
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RecipeGroup {
    pub sigma: f64,
    /// Input indices.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Pool {
    pub name: String,
    pub groups: Vec<RecipeGroup>,
}

#[derive(Debug, Clone)]
pub struct PoolOutput {
    pub name: String,
    pub demand: f64,
    pub spec_min: Vec<f64>,
    pub spec_max: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PoolingInstance {
    pub specs: Vec<String>,
    pub inputs: Vec<PoolInput>,
    pub pools: Vec<Pool>,
    pub outputs: Vec<PoolOutput>,
    /// (input, pool) arcs.
    pub arcs_in: Vec<(usize, usize)>,
    /// (pool, output) arcs.
    pub arcs_out: Vec<(usize, usize)>,
}

impl PoolingInstance {
    /// Inputs with an arc into the pool, ascending.
    pub fn pool_inputs(&self, l: usize) -> Vec<usize> {
        self.arcs_in
            .iter()
            .filter(|&&(_, pl)| pl == l)
            .map(|&(i, _)| i)
            .collect()
    }

    pub fn pool_outputs(&self, l: usize) -> Vec<usize> {
        self.arcs_out
            .iter()
            .filter(|&&(pl, _)| pl == l)
            .map(|&(_, o)| o)
            .collect()
    }

    pub fn validate(&self) -> Result<(), PoolingError> {
        for (l, pool) in self.pools.iter().enumerate() {
            let sigma_sum: f64 = pool.groups.iter().map(|g| g.sigma).sum();
            if (sigma_sum - 1.0).abs() > 1e-9 {
                return Err(PoolingError::BadSigma(pool.name.clone(), sigma_sum));
            }
            let members: BTreeSet<usize> = pool
                .groups
                .iter()
                .flat_map(|g| g.members.iter().copied())
                .collect();
            let count: usize = pool.groups.iter().map(|g| g.members.len()).sum();
            let arcs: BTreeSet<usize> = self.pool_inputs(l).into_iter().collect();
            if members != arcs || count != members.len() {
                return Err(PoolingError::BadPartition(pool.name.clone()));
            }
        }
        Ok(())
    }
}

/// A variable of the pooling model.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolVar {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelRow {
    pub name: String,
    /// (variable index, coefficient).
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Bilinear definition row v = q * y.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearRow {
    pub name: String,
    pub q: usize,
    pub y: usize,
    pub v: usize,
}

#[derive(Debug, Clone)]
pub struct PoolingModel {
    pub vars: Vec<PoolVar>,
    pub rows: Vec<ModelRow>,
    pub bilinear: Vec<BilinearRow>,
    /// Maximized.
    pub objective: Vec<(usize, f64)>,
}

impl PoolingModel {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// The LP relaxation obtained by dropping the bilinear rows.
    pub fn lp_relaxation(&self) -> crate::simplex::LpProblem {
        let mut p = crate::simplex::LpProblem::new(self.vars.len(), true);
        for (idx, v) in self.vars.iter().enumerate() {
            p.bounds[idx] = (v.lo, v.hi);
        }
        for &(idx, c) in &self.objective {
            p.objective[idx] = c;
        }
        for row in &self.rows {
            p.add_row(row.terms.clone(), row.sense, row.rhs);
        }
        p
    }
}

struct Builder {
    vars: Vec<PoolVar>,
    rows: Vec<ModelRow>,
}

impl Builder {
    fn var(&mut self, name: String, lo: f64, hi: f64) -> usize {
        self.vars.push(PoolVar { name, lo, hi });
        self.vars.len() - 1
    }

    fn row(&mut self, name: String, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(ModelRow {
            name,
            terms,
            sense,
            rhs,
        });
    }
}

/// Flow/proportion/product variables with deterministic names:
/// y_<in>_<pool>, y_<pool>_<out>, q_<in>_<pool>, v_<in>_<pool>_<out>.
struct VarMap {
    y_in: Vec<usize>,
    y_out: Vec<usize>,
    /// Indexed by position in the per-pool input list, per pool.
    q: Vec<Vec<usize>>,
    v: Vec<Vec<Vec<usize>>>,
}

fn declare_vars(pi: &PoolingInstance, b: &mut Builder) -> VarMap {
    let y_in = pi
        .arcs_in
        .iter()
        .map(|&(i, l)| {
            b.var(
                format!("y_{}_{}", pi.inputs[i].name, pi.pools[l].name),
                0.0,
                pi.inputs[i].avail,
            )
        })
        .collect();
    let y_out = pi
        .arcs_out
        .iter()
        .map(|&(l, o)| {
            b.var(
                format!("y_{}_{}", pi.pools[l].name, pi.outputs[o].name),
                0.0,
                pi.outputs[o].demand,
            )
        })
        .collect();
    let mut q = Vec::with_capacity(pi.pools.len());
    let mut v = Vec::with_capacity(pi.pools.len());
    for (l, pool) in pi.pools.iter().enumerate() {
        let inputs = pi.pool_inputs(l);
        let outs = pi.pool_outputs(l);
        let mut ql = Vec::with_capacity(inputs.len());
        let mut vl = Vec::with_capacity(inputs.len());
        for &i in &inputs {
            ql.push(b.var(
                format!("q_{}_{}", pi.inputs[i].name, pool.name),
                0.0,
                1.0,
            ));
            let mut vrow = Vec::with_capacity(outs.len());
            for &o in &outs {
                vrow.push(b.var(
                    format!(
                        "v_{}_{}_{}",
                        pi.inputs[i].name, pool.name, pi.outputs[o].name
                    ),
                    0.0,
                    pi.outputs[o].demand,
                ));
            }
            vl.push(vrow);
        }
        q.push(ql);
        v.push(vl);
    }
    VarMap {
        y_in,
        y_out,
        q,
        v,
    }
}

/// The q-formulation: flow bounds, conservation, recipe rows, proportion
/// normalization, bilinear definitions, q/y consistency and two-sided
/// specification rows; objective maximizes the flow into the outputs.
pub fn build_q(pi: &PoolingInstance) -> Result<PoolingModel, PoolingError> {
    pi.validate()?;
    let mut b = Builder {
        vars: Vec::new(),
        rows: Vec::new(),
    };
    let vm = declare_vars(pi, &mut b);
    let mut bilinear = Vec::new();

    // Flow capacity rows (one per arc).
    for (a, &(i, l)) in pi.arcs_in.iter().enumerate() {
        b.row(
            format!("cap_{}_{}", pi.inputs[i].name, pi.pools[l].name),
            vec![(vm.y_in[a], 1.0)],
            Sense::Le,
            pi.inputs[i].avail,
        );
    }
    for (a, &(l, o)) in pi.arcs_out.iter().enumerate() {
        b.row(
            format!("cap_{}_{}", pi.pools[l].name, pi.outputs[o].name),
            vec![(vm.y_out[a], 1.0)],
            Sense::Le,
            pi.outputs[o].demand,
        );
    }
    // Conservation per pool.
    for (l, pool) in pi.pools.iter().enumerate() {
        let mut terms: Vec<(usize, f64)> = in_arcs(pi, l)
            .map(|a| (vm.y_in[a], 1.0))
            .collect();
        terms.extend(out_arcs(pi, l).map(|a| (vm.y_out[a], -1.0)));
        b.row(format!("bal_{}", pool.name), terms, Sense::Eq, 0.0);
    }
    // Recipe rows per (pool, group).
    for (l, pool) in pi.pools.iter().enumerate() {
        for (h, group) in pool.groups.iter().enumerate() {
            let mut terms: Vec<(usize, f64)> = in_arcs(pi, l)
                .filter(|&a| group.members.contains(&pi.arcs_in[a].0))
                .map(|a| (vm.y_in[a], 1.0))
                .collect();
            terms.extend(out_arcs(pi, l).map(|a| (vm.y_out[a], -group.sigma)));
            b.row(
                format!("rec_{}_{}", pool.name, h + 1),
                terms,
                Sense::Eq,
                0.0,
            );
        }
    }
    // Proportions sum to one per pool.
    for (l, pool) in pi.pools.iter().enumerate() {
        let terms = vm.q[l].iter().map(|&qv| (qv, 1.0)).collect();
        b.row(format!("qsum_{}", pool.name), terms, Sense::Eq, 1.0);
    }
    // Bilinear definitions v = q * y per (pool input, output).
    for (l, _) in pi.pools.iter().enumerate() {
        let inputs = pi.pool_inputs(l);
        let outs: Vec<usize> = out_arcs(pi, l).collect();
        for (ii, &i) in inputs.iter().enumerate() {
            for (oo, &a) in outs.iter().enumerate() {
                let o = pi.arcs_out[a].1;
                bilinear.push(BilinearRow {
                    name: format!(
                        "blt_{}_{}_{}",
                        pi.inputs[i].name, pi.pools[l].name, pi.outputs[o].name
                    ),
                    q: vm.q[l][ii],
                    y: vm.y_out[a],
                    v: vm.v[l][ii][oo],
                });
            }
        }
    }
    // q/y consistency: the inflow from i equals its share of all outflows.
    for (l, pool) in pi.pools.iter().enumerate() {
        let inputs = pi.pool_inputs(l);
        for (ii, &i) in inputs.iter().enumerate() {
            let a_in = in_arcs(pi, l)
                .find(|&a| pi.arcs_in[a].0 == i)
                .expect("arc exists");
            let mut terms = vec![(vm.y_in[a_in], 1.0)];
            for (oo, _) in out_arcs(pi, l).enumerate() {
                terms.push((vm.v[l][ii][oo], -1.0));
            }
            b.row(
                format!("ycons_{}_{}", pi.inputs[i].name, pool.name),
                terms,
                Sense::Eq,
                0.0,
            );
        }
    }
    // Two-sided specification rows per (output, spec).
    for (o, output) in pi.outputs.iter().enumerate() {
        for (s, spec) in pi.specs.iter().enumerate() {
            let mut lo_terms: Vec<(usize, f64)> = Vec::new();
            let mut hi_terms: Vec<(usize, f64)> = Vec::new();
            for (l, _) in pi.pools.iter().enumerate() {
                let inputs = pi.pool_inputs(l);
                let outs: Vec<usize> = out_arcs(pi, l).collect();
                for (oo, &a) in outs.iter().enumerate() {
                    if pi.arcs_out[a].1 != o {
                        continue;
                    }
                    lo_terms.push((vm.y_out[a], -output.spec_min[s]));
                    hi_terms.push((vm.y_out[a], -output.spec_max[s]));
                    for (ii, &i) in inputs.iter().enumerate() {
                        lo_terms.push((vm.v[l][ii][oo], pi.inputs[i].lambda[s]));
                        hi_terms.push((vm.v[l][ii][oo], pi.inputs[i].lambda[s]));
                    }
                }
            }
            b.row(
                format!("speclo_{}_{}", output.name, spec),
                lo_terms,
                Sense::Ge,
                0.0,
            );
            b.row(
                format!("spechi_{}_{}", output.name, spec),
                hi_terms,
                Sense::Le,
                0.0,
            );
        }
    }
    let objective = vm.y_out.iter().map(|&v| (v, 1.0)).collect();
    Ok(PoolingModel {
        vars: b.vars,
        rows: b.rows,
        bilinear,
        objective,
    })
}

fn in_arcs(pi: &PoolingInstance, l: usize) -> impl Iterator<Item = usize> + '_ {
    pi.arcs_in
        .iter()
        .enumerate()
        .filter(move |&(_, &(_, pl))| pl == l)
        .map(|(a, _)| a)
}

fn out_arcs(pi: &PoolingInstance, l: usize) -> impl Iterator<Item = usize> + '_ {
    pi.arcs_out
        .iter()
        .enumerate()
        .filter(move |&(_, &(pl, _))| pl == l)
        .map(|(a, _)| a)
}

/// The q+cuts formulation: build_q plus the per-group proportion equations,
/// their product-space versions, and the scaled per-pool
/// reformulation-linearization rows mapped back to the original variables.
pub fn build_qcuts(pi: &PoolingInstance) -> Result<PoolingModel, PoolingError> {
    let mut model = build_q(pi)?;
    let vm_q = |model: &PoolingModel, i: usize, l: usize| -> usize {
        model
            .var_index(&format!("q_{}_{}", pi.inputs[i].name, pi.pools[l].name))
            .expect("declared")
    };
    let vm_v = |model: &PoolingModel, i: usize, l: usize, o: usize| -> usize {
        model
            .var_index(&format!(
                "v_{}_{}_{}",
                pi.inputs[i].name, pi.pools[l].name, pi.outputs[o].name
            ))
            .expect("declared")
    };
    let vm_yout = |model: &PoolingModel, l: usize, o: usize| -> usize {
        model
            .var_index(&format!("y_{}_{}", pi.pools[l].name, pi.outputs[o].name))
            .expect("declared")
    };
    // Group proportion equations.
    for (l, pool) in pi.pools.iter().enumerate() {
        for (h, group) in pool.groups.iter().enumerate() {
            let terms = group
                .members
                .iter()
                .map(|&i| (vm_q(&model, i, l), 1.0))
                .collect();
            model.rows.push(ModelRow {
                name: format!("qrec_{}_{}", pool.name, h + 1),
                terms,
                sense: Sense::Eq,
                rhs: group.sigma,
            });
        }
    }
    // Product-space versions per (output, pool, group).
    for (l, pool) in pi.pools.iter().enumerate() {
        for &o in &pi.pool_outputs(l) {
            for (h, group) in pool.groups.iter().enumerate() {
                let mut terms: Vec<(usize, f64)> = group
                    .members
                    .iter()
                    .map(|&i| (vm_v(&model, i, l, o), 1.0))
                    .collect();
                terms.push((vm_yout(&model, l, o), -group.sigma));
                model.rows.push(ModelRow {
                    name: format!("vrec_{}_{}_{}", pool.name, h + 1, pi.outputs[o].name),
                    terms,
                    sense: Sense::Eq,
                    rhs: 0.0,
                });
            }
        }
    }
    // Scaled RLT rows per pool: with Y̅_o = demand, the four families are
    //   v >= 0,
    //   d_o q_il - v >= 0,
    //   sigma_h y_lo - sum_{i in group} v >= 0,
    //   sigma_h y_lo + sum_{i in group} (d_o q_il - v) <= sigma_h d_o.
    for (l, pool) in pi.pools.iter().enumerate() {
        let inputs = pi.pool_inputs(l);
        for &o in &pi.pool_outputs(l) {
            let d = pi.outputs[o].demand;
            for &i in &inputs {
                model.rows.push(ModelRow {
                    name: format!(
                        "rlt4_{}_{}_{}",
                        pi.inputs[i].name, pool.name, pi.outputs[o].name
                    ),
                    terms: vec![(vm_v(&model, i, l, o), 1.0)],
                    sense: Sense::Ge,
                    rhs: 0.0,
                });
            }
            for &i in &inputs {
                model.rows.push(ModelRow {
                    name: format!(
                        "rlt5_{}_{}_{}",
                        pi.inputs[i].name, pool.name, pi.outputs[o].name
                    ),
                    terms: vec![
                        (vm_q(&model, i, l), d),
                        (vm_v(&model, i, l, o), -1.0),
                    ],
                    sense: Sense::Ge,
                    rhs: 0.0,
                });
            }
            for (h, group) in pool.groups.iter().enumerate() {
                let mut terms = vec![(vm_yout(&model, l, o), group.sigma)];
                for &i in &group.members {
                    terms.push((vm_v(&model, i, l, o), -1.0));
                }
                model.rows.push(ModelRow {
                    name: format!("rlt6_{}_{}_{}", pool.name, h + 1, pi.outputs[o].name),
                    terms,
                    sense: Sense::Ge,
                    rhs: 0.0,
                });
            }
            for (h, group) in pool.groups.iter().enumerate() {
                let mut terms = vec![(vm_yout(&model, l, o), group.sigma)];
                for &i in &group.members {
                    terms.push((vm_q(&model, i, l), d));
                    terms.push((vm_v(&model, i, l, o), -1.0));
                }
                model.rows.push(ModelRow {
                    name: format!("rlt7_{}_{}_{}", pool.name, h + 1, pi.outputs[o].name),
                    terms,
                    sense: Sense::Le,
                    rhs: group.sigma * d,
                });
            }
        }
    }
    Ok(model)
}

/// Expected row counts of the two formulations, per the construction.
pub fn q_row_count(pi: &PoolingInstance) -> usize {
    let arcs = pi.arcs_in.len() + pi.arcs_out.len();
    let r_total: usize = pi.pools.iter().map(|p| p.groups.len()).sum();
    let ycons: usize = (0..pi.pools.len()).map(|l| pi.pool_inputs(l).len()).sum();
    arcs + pi.pools.len() + r_total + pi.pools.len() + ycons
        + 2 * pi.outputs.len() * pi.specs.len()
}

pub fn qcuts_row_count(pi: &PoolingInstance) -> usize {
    let mut extra = 0;
    for (l, pool) in pi.pools.iter().enumerate() {
        let n_inputs = pi.pool_inputs(l).len();
        let n_outs = pi.pool_outputs(l).len();
        let r = pool.groups.len();
        extra += r; // qrec
        extra += r * n_outs; // vrec
        extra += 2 * n_inputs * n_outs; // rlt4 + rlt5
        extra += 2 * r * n_outs; // rlt6 + rlt7
    }
    q_row_count(pi) + extra
}

pub fn q_var_count(pi: &PoolingInstance) -> usize {
    let arcs = pi.arcs_in.len() + pi.arcs_out.len();
    let q: usize = (0..pi.pools.len()).map(|l| pi.pool_inputs(l).len()).sum();
    let v: usize = (0..pi.pools.len())
        .map(|l| pi.pool_inputs(l).len() * pi.pool_outputs(l).len())
        .sum();
    arcs + q + v
}

fn fmt_coeff(out: &mut String, value: f64, first: bool) {
    if first {
        if value < 0.0 {
            out.push_str("- ");
        }
    } else if value < 0.0 {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    let a = value.abs();
    if a == 1.0 {
        // coefficient omitted
    } else {
        let _ = write!(out, "{} ", a);
    }
}

/// Writes the model in LP text format: linear rows under `Subject To`,
/// bilinear definitions as quadratic rows `[ q * y ] - v = 0`, bounds, and
/// the maximized objective. Byte-deterministic for a given instance.
pub fn export_lp(model: &PoolingModel) -> String {
    let mut out = String::new();
    out.push_str("Maximize\n obj:");
    for (k, &(v, c)) in model.objective.iter().enumerate() {
        out.push(' ');
        fmt_coeff(&mut out, c, k == 0);
        out.push_str(&model.vars[v].name);
    }
    out.push_str("\nSubject To\n");
    for row in &model.rows {
        let _ = write!(out, " {}:", row.name);
        for (k, &(v, c)) in row.terms.iter().enumerate() {
            out.push(' ');
            fmt_coeff(&mut out, c, k == 0);
            out.push_str(&model.vars[v].name);
        }
        let sense = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {} {}", sense, row.rhs);
    }
    for blt in &model.bilinear {
        let _ = writeln!(
            out,
            " {}: [ {} * {} ] - {} = 0",
            blt.name, model.vars[blt.q].name, model.vars[blt.y].name, model.vars[blt.v].name
        );
    }
    out.push_str("Bounds\n");
    for v in &model.vars {
        let _ = writeln!(out, " {} <= {} <= {}", v.lo, v.name, v.hi);
    }
    out.push_str("End\n");
    out
}

/// Parses the dialect written by `export_lp` back into rows; used for the
/// round-trip check that the export is lossless.
pub fn parse_lp(text: &str) -> Result<PoolingModel, PoolingError> {
    #[derive(PartialEq)]
    enum Section {
        Start,
        Objective,
        Rows,
        Bounds,
    }
    let mut section = Section::Start;
    let mut vars: Vec<PoolVar> = Vec::new();
    let mut rows = Vec::new();
    let mut bilinear = Vec::new();
    let mut objective: Vec<(usize, f64)> = Vec::new();
    let mut pending_obj: Vec<(String, f64)> = Vec::new();
    let mut pending_rows: Vec<(String, Vec<(String, f64)>, Sense, f64)> = Vec::new();
    let mut pending_blt: Vec<(String, String, String, String)> = Vec::new();

    fn parse_terms(body: &str) -> Result<Vec<(String, f64)>, PoolingError> {
        let mut terms = Vec::new();
        let mut sign = 1.0;
        let mut coeff: Option<f64> = None;
        for tok in body.split_whitespace() {
            match tok {
                "+" => sign = 1.0,
                "-" => sign = -1.0,
                _ => {
                    if let Ok(v) = tok.parse::<f64>() {
                        coeff = Some(v);
                    } else {
                        terms.push((tok.to_string(), sign * coeff.take().unwrap_or(1.0)));
                        sign = 1.0;
                    }
                }
            }
        }
        Ok(terms)
    }

    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "Maximize" => {
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Rows;
                continue;
            }
            "Bounds" => {
                section = Section::Bounds;
                continue;
            }
            "End" => break,
            _ => {}
        }
        match section {
            Section::Objective => {
                let body = line
                    .strip_prefix("obj:")
                    .ok_or_else(|| PoolingError::Parse("missing obj:".into()))?;
                pending_obj = parse_terms(body)?;
            }
            Section::Rows => {
                let (name, body) = line
                    .split_once(':')
                    .ok_or_else(|| PoolingError::Parse(format!("bad row `{}`", line)))?;
                if body.contains('[') {
                    // Quadratic row: [ q * y ] - v = 0.
                    let inner_start = body.find('[').unwrap();
                    let inner_end = body.find(']').unwrap();
                    let inner = &body[inner_start + 1..inner_end];
                    let (q, y) = inner
                        .split_once('*')
                        .ok_or_else(|| PoolingError::Parse("bad quadratic row".into()))?;
                    let rest = &body[inner_end + 1..];
                    let v = rest
                        .split_whitespace()
                        .nth(1)
                        .ok_or_else(|| PoolingError::Parse("bad quadratic row".into()))?;
                    pending_blt.push((
                        name.trim().to_string(),
                        q.trim().to_string(),
                        y.trim().to_string(),
                        v.trim().to_string(),
                    ));
                } else {
                    let (sense, pos) = if let Some(p) = body.find("<=") {
                        (Sense::Le, p)
                    } else if let Some(p) = body.find(">=") {
                        (Sense::Ge, p)
                    } else if let Some(p) = body.rfind('=') {
                        (Sense::Eq, p)
                    } else {
                        return Err(PoolingError::Parse(format!("bad row `{}`", line)));
                    };
                    let lhs = &body[..pos];
                    let rhs_txt = body[pos..].trim_start_matches(['<', '>', '=']).trim();
                    let rhs: f64 = rhs_txt
                        .parse()
                        .map_err(|_| PoolingError::Parse(format!("bad rhs `{}`", rhs_txt)))?;
                    pending_rows.push((name.trim().to_string(), parse_terms(lhs)?, sense, rhs));
                }
            }
            Section::Bounds => {
                // lo <= name <= hi
                let parts: Vec<&str> = line.split("<=").map(|s| s.trim()).collect();
                if parts.len() != 3 {
                    return Err(PoolingError::Parse(format!("bad bound `{}`", line)));
                }
                let lo: f64 = parts[0]
                    .parse()
                    .map_err(|_| PoolingError::Parse("bad bound".into()))?;
                let hi: f64 = parts[2]
                    .parse()
                    .map_err(|_| PoolingError::Parse("bad bound".into()))?;
                vars.push(PoolVar {
                    name: parts[1].to_string(),
                    lo,
                    hi,
                });
            }
            Section::Start => {
                return Err(PoolingError::Parse(format!("unexpected line `{}`", line)))
            }
        }
    }
    let index_of = |vars: &Vec<PoolVar>, name: &str| -> Result<usize, PoolingError> {
        vars.iter()
            .position(|v| v.name == name)
            .ok_or_else(|| PoolingError::UnknownNode(name.to_string()))
    };
    for (name, coeff) in pending_obj {
        objective.push((index_of(&vars, &name)?, coeff));
    }
    for (name, terms, sense, rhs) in pending_rows {
        let mut t = Vec::with_capacity(terms.len());
        for (vn, c) in terms {
            t.push((index_of(&vars, &vn)?, c));
        }
        rows.push(ModelRow {
            name,
            terms: t,
            sense,
            rhs,
        });
    }
    for (name, q, y, v) in pending_blt {
        bilinear.push(BilinearRow {
            name,
            q: index_of(&vars, &q)?,
            y: index_of(&vars, &y)?,
            v: index_of(&vars, &v)?,
        });
    }
    Ok(PoolingModel {
        vars,
        rows,
        bilinear,
        objective,
    })
}

/// Text format for pooling instances, one record per line:
/// ```text
/// specs s1 s2
/// input in1 avail 100 lambda 0.3 1.2
/// pool pl1 group 0.6 in1 in2 group 0.4 in3
/// output o1 demand 50 min 0.1 0.2 max 0.5 0.9
/// arc in1 pl1
/// arc pl1 o1
/// ```
pub fn parse_pooling_instance(text: &str) -> Result<PoolingInstance, PoolingError> {
    let mut specs = Vec::new();
    let mut inputs: Vec<PoolInput> = Vec::new();
    let mut pools: Vec<(String, Vec<(f64, Vec<String>)>)> = Vec::new();
    let mut outputs: Vec<PoolOutput> = Vec::new();
    let mut arcs: Vec<(String, String)> = Vec::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next().unwrap() {
            "specs" => specs = toks.map(|s| s.to_string()).collect(),
            "input" => {
                let name = toks
                    .next()
                    .ok_or_else(|| PoolingError::Parse("input needs a name".into()))?
                    .to_string();
                let rest: Vec<&str> = toks.collect();
                let avail_pos = rest
                    .iter()
                    .position(|&t| t == "avail")
                    .ok_or_else(|| PoolingError::Parse("input needs avail".into()))?;
                let avail: f64 = rest[avail_pos + 1]
                    .parse()
                    .map_err(|_| PoolingError::Parse("bad avail".into()))?;
                let lpos = rest
                    .iter()
                    .position(|&t| t == "lambda")
                    .ok_or_else(|| PoolingError::Parse("input needs lambda".into()))?;
                let lambda: Vec<f64> = rest[lpos + 1..]
                    .iter()
                    .map(|t| t.parse().map_err(|_| PoolingError::Parse("bad lambda".into())))
                    .collect::<Result<_, _>>()?;
                inputs.push(PoolInput {
                    name,
                    avail,
                    lambda,
                });
            }
            "pool" => {
                let name = toks
                    .next()
                    .ok_or_else(|| PoolingError::Parse("pool needs a name".into()))?
                    .to_string();
                let rest: Vec<&str> = toks.collect();
                let mut groups = Vec::new();
                let mut k = 0;
                while k < rest.len() {
                    if rest[k] != "group" {
                        return Err(PoolingError::Parse("expected group".into()));
                    }
                    let sigma: f64 = rest[k + 1]
                        .parse()
                        .map_err(|_| PoolingError::Parse("bad sigma".into()))?;
                    let mut members = Vec::new();
                    k += 2;
                    while k < rest.len() && rest[k] != "group" {
                        members.push(rest[k].to_string());
                        k += 1;
                    }
                    groups.push((sigma, members));
                }
                pools.push((name, groups));
            }
            "output" => {
                let name = toks
                    .next()
                    .ok_or_else(|| PoolingError::Parse("output needs a name".into()))?
                    .to_string();
                let rest: Vec<&str> = toks.collect();
                let dpos = rest
                    .iter()
                    .position(|&t| t == "demand")
                    .ok_or_else(|| PoolingError::Parse("output needs demand".into()))?;
                let demand: f64 = rest[dpos + 1]
                    .parse()
                    .map_err(|_| PoolingError::Parse("bad demand".into()))?;
                let minpos = rest
                    .iter()
                    .position(|&t| t == "min")
                    .ok_or_else(|| PoolingError::Parse("output needs min".into()))?;
                let maxpos = rest
                    .iter()
                    .position(|&t| t == "max")
                    .ok_or_else(|| PoolingError::Parse("output needs max".into()))?;
                let spec_min: Vec<f64> = rest[minpos + 1..maxpos]
                    .iter()
                    .map(|t| t.parse().map_err(|_| PoolingError::Parse("bad min".into())))
                    .collect::<Result<_, _>>()?;
                let spec_max: Vec<f64> = rest[maxpos + 1..]
                    .iter()
                    .map(|t| t.parse().map_err(|_| PoolingError::Parse("bad max".into())))
                    .collect::<Result<_, _>>()?;
                outputs.push(PoolOutput {
                    name,
                    demand,
                    spec_min,
                    spec_max,
                });
            }
            "arc" => {
                let a = toks
                    .next()
                    .ok_or_else(|| PoolingError::Parse("arc needs endpoints".into()))?;
                let b = toks
                    .next()
                    .ok_or_else(|| PoolingError::Parse("arc needs endpoints".into()))?;
                arcs.push((a.to_string(), b.to_string()));
            }
            other => return Err(PoolingError::Parse(format!("unknown record `{}`", other))),
        }
    }
    let input_idx = |n: &str| inputs.iter().position(|i| i.name == n);
    let pool_idx = |n: &str| pools.iter().position(|p| p.0 == n);
    let output_idx = |n: &str| outputs.iter().position(|o| o.name == n);
    let mut arcs_in = Vec::new();
    let mut arcs_out = Vec::new();
    for (a, b) in arcs {
        if let (Some(i), Some(l)) = (input_idx(&a), pool_idx(&b)) {
            arcs_in.push((i, l));
        } else if let (Some(l), Some(o)) = (pool_idx(&a), output_idx(&b)) {
            arcs_out.push((l, o));
        } else {
            return Err(PoolingError::UnknownNode(format!("{} -> {}", a, b)));
        }
    }
    arcs_in.sort_unstable();
    arcs_out.sort_unstable();
    let pools = pools
        .into_iter()
        .map(|(name, groups)| {
            let groups = groups
                .into_iter()
                .map(|(sigma, members)| {
                    let members = members
                        .iter()
                        .map(|m| {
                            input_idx(m).ok_or_else(|| PoolingError::UnknownNode(m.clone()))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(RecipeGroup { sigma, members })
                })
                .collect::<Result<Vec<_>, PoolingError>>()?;
            Ok(Pool { name, groups })
        })
        .collect::<Result<Vec<_>, PoolingError>>()?;
    let pi = PoolingInstance {
        specs,
        inputs,
        pools,
        outputs,
        arcs_in,
        arcs_out,
    };
    pi.validate()?;
    Ok(pi)
}

/// The reference instance: two inputs, one pool with two singleton groups
/// (sigma 0.6/0.4), one output, one spec.
pub fn reference_instance() -> PoolingInstance {
    PoolingInstance {
        specs: vec!["s1".into()],
        inputs: vec![
            PoolInput {
                name: "in1".into(),
                avail: 100.0,
                lambda: vec![0.3],
            },
            PoolInput {
                name: "in2".into(),
                avail: 80.0,
                lambda: vec![0.9],
            },
        ],
        pools: vec![Pool {
            name: "pl1".into(),
            groups: vec![
                RecipeGroup {
                    sigma: 0.6,
                    members: vec![0],
                },
                RecipeGroup {
                    sigma: 0.4,
                    members: vec![1],
                },
            ],
        }],
        outputs: vec![PoolOutput {
            name: "o1".into(),
            demand: 50.0,
            spec_min: vec![0.2],
            spec_max: vec![0.8],
        }],
        arcs_in: vec![(0, 0), (1, 0)],
        arcs_out: vec![(0, 0)],
    }
}
