//! Domain model: bipartite instances with a multiple-choice partition on the
//! X side, variables, points, linear constraints and dependency graphs.
//!
//! The variable universe of an instance is ordered canonically: all x
//! variables by (subset, position), then all y variables, then all z
//! variables by lexicographic (i, j). Every array-backed structure in the
//! crate (points, objectives, LP columns) follows this order.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("subset {0} is empty")]
    EmptySubset(usize),
    #[error("node `{0}` appears in more than one subset")]
    OverlappingSubsets(String),
    #[error("edge references unknown node `{0}`")]
    DanglingEdge(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node name `{0}`")]
    DuplicateName(String),
    #[error("instance is not subset-uniform")]
    NotSubsetUniform,
    #[error("no edge between x{0} and y{1}")]
    NoSuchEdge(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}

/// A variable of the instance: x_i, y_j or z_ij (i, j are dense ordinals).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X(usize),
    Y(usize),
    Z(usize, usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i),
            Var::Y(j) => write!(f, "y{}", j),
            Var::Z(i, j) => write!(f, "z{},{}", i, j),
        }
    }
}

/// Edge specification used when building an instance.
#[derive(Debug, Clone)]
pub enum EdgeSpec {
    Complete,
    /// Explicit list of (x name, y name) pairs.
    Explicit(Vec<(String, String)>),
}

/// A bipartite graph G = (X ∪ Y, E) together with a partition of X into
/// multiple-choice subsets. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Instance {
    x_names: Vec<String>,
    y_names: Vec<String>,
    /// Partition of 0..nx into consecutive ordinal ranges.
    subsets: Vec<Vec<usize>>,
    subset_of: Vec<usize>,
    /// Sorted lexicographically by (i, j).
    edges: Vec<(usize, usize)>,
    complete: bool,
    adj_x: Vec<Vec<usize>>,
    adj_y: Vec<Vec<usize>>,
    /// nx*ny matrix, value = edge position or u32::MAX.
    z_pos: Vec<u32>,
}

impl Instance {
    /// Builds a validated instance from named subsets, Y names and an edge spec.
    pub fn new(
        subsets: Vec<Vec<String>>,
        y_names: Vec<String>,
        edges: EdgeSpec,
    ) -> Result<Self, InstanceError> {
        let mut x_names: Vec<String> = Vec::new();
        let mut subset_ord = Vec::new();
        for (s, subset) in subsets.iter().enumerate() {
            if subset.is_empty() {
                return Err(InstanceError::EmptySubset(s));
            }
            let mut ords = Vec::with_capacity(subset.len());
            for name in subset {
                if x_names.contains(name) {
                    return Err(InstanceError::OverlappingSubsets(name.clone()));
                }
                ords.push(x_names.len());
                x_names.push(name.clone());
            }
            subset_ord.push(ords);
        }
        let mut seen = BTreeSet::new();
        for name in x_names.iter().chain(y_names.iter()) {
            if !seen.insert(name.clone()) {
                return Err(InstanceError::DuplicateName(name.clone()));
            }
        }
        let nx = x_names.len();
        let ny = y_names.len();
        let mut subset_of = vec![0usize; nx];
        for (s, ords) in subset_ord.iter().enumerate() {
            for &i in ords {
                subset_of[i] = s;
            }
        }
        let (edge_list, complete) = match edges {
            EdgeSpec::Complete => {
                let mut e = Vec::with_capacity(nx * ny);
                for i in 0..nx {
                    for j in 0..ny {
                        e.push((i, j));
                    }
                }
                (e, true)
            }
            EdgeSpec::Explicit(pairs) => {
                let mut e = BTreeSet::new();
                for (xn, yn) in pairs {
                    let i = x_names
                        .iter()
                        .position(|n| *n == xn)
                        .ok_or_else(|| InstanceError::DanglingEdge(xn.clone()))?;
                    let j = y_names
                        .iter()
                        .position(|n| *n == yn)
                        .ok_or_else(|| InstanceError::DanglingEdge(yn.clone()))?;
                    e.insert((i, j));
                }
                let e: Vec<_> = e.into_iter().collect();
                let complete = e.len() == nx * ny;
                (e, complete)
            }
        };
        let mut adj_x = vec![Vec::new(); nx];
        let mut adj_y = vec![Vec::new(); ny];
        let mut z_pos = vec![u32::MAX; nx * ny];
        for (pos, &(i, j)) in edge_list.iter().enumerate() {
            adj_x[i].push(j);
            adj_y[j].push(i);
            z_pos[i * ny + j] = pos as u32;
        }
        Ok(Instance {
            x_names,
            y_names,
            subsets: subset_ord,
            subset_of,
            edges: edge_list,
            complete,
            adj_x,
            adj_y,
            z_pos,
        })
    }

    /// Complete bipartite instance with subsets of the given sizes and
    /// synthetic node names i1, i2, ... / j1, j2, ...
    pub fn complete(sizes: &[usize], y_count: usize) -> Self {
        let mut subsets = Vec::new();
        let mut n = 0;
        for &len in sizes {
            let subset: Vec<String> = (0..len).map(|k| format!("i{}", n + k + 1)).collect();
            n += len;
            subsets.push(subset);
        }
        let y_names = (0..y_count).map(|j| format!("j{}", j + 1)).collect();
        Instance::new(subsets, y_names, EdgeSpec::Complete).expect("complete instance is valid")
    }

    pub fn nx(&self) -> usize {
        self.x_names.len()
    }
    pub fn ny(&self) -> usize {
        self.y_names.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn n_vars(&self) -> usize {
        self.nx() + self.ny() + self.n_edges()
    }
    pub fn n_subsets(&self) -> usize {
        self.subsets.len()
    }
    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }
    pub fn subset_of(&self, i: usize) -> usize {
        self.subset_of[i]
    }
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
    pub fn is_complete(&self) -> bool {
        self.complete
    }
    pub fn x_name(&self, i: usize) -> &str {
        &self.x_names[i]
    }
    pub fn y_name(&self, j: usize) -> &str {
        &self.y_names[j]
    }

    pub fn x_index(&self, name: &str) -> Option<usize> {
        self.x_names.iter().position(|n| n == name)
    }
    pub fn y_index(&self, name: &str) -> Option<usize> {
        self.y_names.iter().position(|n| n == name)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.z_pos[i * self.ny() + j] != u32::MAX
    }

    /// Position of edge (i, j) in the canonical edge order.
    pub fn edge_pos(&self, i: usize, j: usize) -> Option<usize> {
        let p = self.z_pos[i * self.ny() + j];
        (p != u32::MAX).then_some(p as usize)
    }

    /// Neighbours of x node i in Y (sorted).
    pub fn neighbours_of_x(&self, i: usize) -> &[usize] {
        &self.adj_x[i]
    }

    /// Neighbours of y node j in X (sorted).
    pub fn neighbours_of_y(&self, j: usize) -> &[usize] {
        &self.adj_y[j]
    }

    /// Canonical index of a variable in 0..n_vars().
    pub fn var_index(&self, v: Var) -> usize {
        match v {
            Var::X(i) => i,
            Var::Y(j) => self.nx() + j,
            Var::Z(i, j) => {
                self.nx()
                    + self.ny()
                    + self
                        .edge_pos(i, j)
                        .unwrap_or_else(|| panic!("no edge ({}, {})", i, j))
            }
        }
    }

    /// Inverse of `var_index`.
    pub fn var_at(&self, idx: usize) -> Var {
        let nx = self.nx();
        let ny = self.ny();
        if idx < nx {
            Var::X(idx)
        } else if idx < nx + ny {
            Var::Y(idx - nx)
        } else {
            let (i, j) = self.edges[idx - nx - ny];
            Var::Z(i, j)
        }
    }

    /// Named form used in constraint pool files, e.g. "z:i3:j2".
    pub fn var_name(&self, v: Var) -> String {
        match v {
            Var::X(i) => format!("x:{}", self.x_names[i]),
            Var::Y(j) => format!("y:{}", self.y_names[j]),
            Var::Z(i, j) => format!("z:{}:{}", self.x_names[i], self.y_names[j]),
        }
    }

    pub fn parse_var(&self, s: &str) -> Result<Var, InstanceError> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["x", n] => self
                .x_index(n)
                .map(Var::X)
                .ok_or_else(|| InstanceError::UnknownNode(n.to_string())),
            ["y", n] => self
                .y_index(n)
                .map(Var::Y)
                .ok_or_else(|| InstanceError::UnknownNode(n.to_string())),
            ["z", xn, yn] => {
                let i = self
                    .x_index(xn)
                    .ok_or_else(|| InstanceError::UnknownNode(xn.to_string()))?;
                let j = self
                    .y_index(yn)
                    .ok_or_else(|| InstanceError::UnknownNode(yn.to_string()))?;
                if !self.has_edge(i, j) {
                    return Err(InstanceError::NoSuchEdge(i, j));
                }
                Ok(Var::Z(i, j))
            }
            _ => Err(InstanceError::Parse(format!("bad variable `{}`", s))),
        }
    }

    /// True iff any two nodes in the same subset have identical neighbourhoods.
    pub fn is_subset_uniform(&self) -> bool {
        self.subsets.iter().all(|subset| {
            subset
                .windows(2)
                .all(|w| self.adj_x[w[0]] == self.adj_x[w[1]])
        })
    }

    /// Dependency graph obtained by merging each subset into one node.
    pub fn dependency_graph(&self) -> Result<DepGraph, InstanceError> {
        if !self.is_subset_uniform() {
            return Err(InstanceError::NotSubsetUniform);
        }
        let mut edges = BTreeSet::new();
        for (s, subset) in self.subsets.iter().enumerate() {
            for &i in subset {
                for &j in &self.adj_x[i] {
                    edges.insert((s, j));
                }
            }
        }
        Ok(DepGraph {
            n_subsets: self.subsets.len(),
            ny: self.ny(),
            edges: edges.into_iter().collect(),
        })
    }
}

/// Neighbourhood over named nodes (either side).
pub fn neighbourhood(inst: &Instance, name: &str) -> Result<BTreeSet<String>, InstanceError> {
    if let Some(i) = inst.x_index(name) {
        Ok(inst.adj_x[i]
            .iter()
            .map(|&j| inst.y_names[j].clone())
            .collect())
    } else if let Some(j) = inst.y_index(name) {
        Ok(inst.adj_y[j]
            .iter()
            .map(|&i| inst.x_names[i].clone())
            .collect())
    } else {
        Err(InstanceError::UnknownNode(name.to_string()))
    }
}

/// Node of the dependency graph: a merged subset or a Y node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DepNode {
    Subset(usize),
    Y(usize),
}

/// Graph on subsets ∪ Y with merged edges. Built for subset-uniform instances.
#[derive(Debug, Clone)]
pub struct DepGraph {
    pub n_subsets: usize,
    pub ny: usize,
    /// (subset index, y index), sorted.
    pub edges: Vec<(usize, usize)>,
}

impl DepGraph {
    pub fn n_nodes(&self) -> usize {
        self.n_subsets + self.ny
    }

    fn root(&self, parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }

    /// True iff the graph contains no cycle.
    pub fn is_acyclic(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n_nodes()).collect();
        for &(s, j) in &self.edges {
            let a = self.root(&mut parent, s);
            let b = self.root(&mut parent, self.n_subsets + j);
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }

    /// Connected components as node lists (subset nodes and Y nodes mixed).
    pub fn components(&self) -> Vec<Vec<DepNode>> {
        let n = self.n_nodes();
        let mut parent: Vec<usize> = (0..n).collect();
        for &(s, j) in &self.edges {
            let a = self.root(&mut parent, s);
            let b = self.root(&mut parent, self.n_subsets + j);
            if a != b {
                parent[a] = b;
            }
        }
        let mut comps: std::collections::BTreeMap<usize, Vec<DepNode>> = Default::default();
        for v in 0..n {
            let r = self.root(&mut parent, v);
            let node = if v < self.n_subsets {
                DepNode::Subset(v)
            } else {
                DepNode::Y(v - self.n_subsets)
            };
            comps.entry(r).or_default().push(node);
        }
        comps.into_values().collect()
    }

    /// Sorted neighbours of a node.
    pub fn neighbours(&self, node: DepNode) -> Vec<DepNode> {
        match node {
            DepNode::Subset(s) => self
                .edges
                .iter()
                .filter(|&&(a, _)| a == s)
                .map(|&(_, j)| DepNode::Y(j))
                .collect(),
            DepNode::Y(j) => self
                .edges
                .iter()
                .filter(|&&(_, b)| b == j)
                .map(|&(s, _)| DepNode::Subset(s))
                .collect(),
        }
    }
}

/// A total assignment of values to the variable universe of an instance,
/// stored in canonical variable order.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub values: Vec<f64>,
}

impl Point {
    pub fn zeros(inst: &Instance) -> Self {
        Point {
            values: vec![0.0; inst.n_vars()],
        }
    }

    pub fn x(&self, _inst: &Instance, i: usize) -> f64 {
        self.values[i]
    }
    pub fn y(&self, inst: &Instance, j: usize) -> f64 {
        self.values[inst.nx() + j]
    }
    pub fn z(&self, inst: &Instance, i: usize, j: usize) -> f64 {
        self.values[inst.var_index(Var::Z(i, j))]
    }
    pub fn get(&self, inst: &Instance, v: Var) -> f64 {
        self.values[inst.var_index(v)]
    }
    pub fn set(&mut self, inst: &Instance, v: Var, val: f64) {
        self.values[inst.var_index(v)] = val;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sense::Le => write!(f, "<="),
            Sense::Ge => write!(f, ">="),
            Sense::Eq => write!(f, "="),
        }
    }
}

/// Sparse linear constraint a^T (x, y, z) {<=,>=,=} b over an instance's
/// variables. Terms are kept sorted by canonical variable index with no
/// stored zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<(Var, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: String,
}

impl LinearConstraint {
    pub fn new(
        inst: &Instance,
        terms: Vec<(Var, f64)>,
        sense: Sense,
        rhs: f64,
        tag: impl Into<String>,
    ) -> Self {
        let mut dense: std::collections::BTreeMap<usize, f64> = Default::default();
        for (v, c) in terms {
            *dense.entry(inst.var_index(v)).or_insert(0.0) += c;
        }
        let terms = dense
            .into_iter()
            .filter(|&(_, c)| c != 0.0)
            .map(|(idx, c)| (inst.var_at(idx), c))
            .collect();
        LinearConstraint {
            terms,
            sense,
            rhs,
            tag: tag.into(),
        }
    }

    pub fn le(inst: &Instance, terms: Vec<(Var, f64)>, rhs: f64, tag: impl Into<String>) -> Self {
        Self::new(inst, terms, Sense::Le, rhs, tag)
    }
    pub fn ge(inst: &Instance, terms: Vec<(Var, f64)>, rhs: f64, tag: impl Into<String>) -> Self {
        Self::new(inst, terms, Sense::Ge, rhs, tag)
    }
    pub fn eq(inst: &Instance, terms: Vec<(Var, f64)>, rhs: f64, tag: impl Into<String>) -> Self {
        Self::new(inst, terms, Sense::Eq, rhs, tag)
    }

    pub fn coeff(&self, v: Var) -> f64 {
        self.terms
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, c)| c)
            .unwrap_or(0.0)
    }

    pub fn lhs_at(&self, inst: &Instance, p: &Point) -> f64 {
        self.terms
            .iter()
            .map(|&(v, c)| c * p.values[inst.var_index(v)])
            .sum()
    }

    /// Positive value = constraint violated at p; for equations the absolute
    /// residual is reported.
    pub fn violation_at(&self, inst: &Instance, p: &Point) -> f64 {
        let lhs = self.lhs_at(inst, p);
        match self.sense {
            Sense::Le => lhs - self.rhs,
            Sense::Ge => self.rhs - lhs,
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }

    /// Slack at p (negative = violated).
    pub fn slack_at(&self, inst: &Instance, p: &Point) -> f64 {
        -self.violation_at(inst, p)
    }

    /// Same constraint written with sense <= (Ge rows are negated, equations
    /// are returned unchanged).
    pub fn normalized_le(&self, inst: &Instance) -> LinearConstraint {
        match self.sense {
            Sense::Le | Sense::Eq => self.clone(),
            Sense::Ge => LinearConstraint::new(
                inst,
                self.terms.iter().map(|&(v, c)| (v, -c)).collect(),
                Sense::Le,
                -self.rhs,
                self.tag.clone(),
            ),
        }
    }

    /// Canonical dedup key: sense-normalized coefficient bit pattern.
    pub fn canonical_key(&self, inst: &Instance) -> Vec<u64> {
        let norm = self.normalized_le(inst);
        let mut key = Vec::with_capacity(norm.terms.len() * 2 + 2);
        key.push(match norm.sense {
            Sense::Le => 0,
            Sense::Ge => 1,
            Sense::Eq => 2,
        });
        key.push(norm.rhs.to_bits());
        for (v, c) in &norm.terms {
            key.push(inst.var_index(*v) as u64);
            key.push(c.to_bits());
        }
        key
    }

    /// Y nodes involved in the constraint: { j | a_j != 0 or some a_ij != 0 }.
    pub fn y_support(&self, _inst: &Instance) -> BTreeSet<usize> {
        let mut support = BTreeSet::new();
        for &(v, _) in &self.terms {
            match v {
                Var::Y(j) | Var::Z(_, j) => {
                    support.insert(j);
                }
                Var::X(_) => {}
            }
        }
        support
    }
}

/// Canonical fixture: subsets [[i1,i2],[i3]], |Y|=2, complete.
pub fn inst_a() -> Instance {
    Instance::complete(&[2, 1], 2)
}

/// Canonical fixture: subsets [[i1,i2]], |Y|=1, complete.
pub fn inst_b() -> Instance {
    Instance::complete(&[2], 1)
}

/// Canonical fixture: subsets [[i1,i2],[i3]], |Y|=2, edges
/// {(i1,j1),(i2,j1),(i3,j1),(i3,j2)}; subset-uniform with a tree dependency
/// graph.
pub fn inst_c() -> Instance {
    Instance::new(
        vec![vec!["i1".into(), "i2".into()], vec!["i3".into()]],
        vec!["j1".into(), "j2".into()],
        EdgeSpec::Explicit(vec![
            ("i1".into(), "j1".into()),
            ("i2".into(), "j1".into()),
            ("i3".into(), "j1".into()),
            ("i3".into(), "j2".into()),
        ]),
    )
    .expect("fixture is valid")
}
