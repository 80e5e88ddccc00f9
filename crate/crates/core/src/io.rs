//! Text formats: instance files and constraint pool files.
//!
//! Instance file:
//! ```text
//! subsets = [[i1, i2], [i3]]
//! y = [j1, j2]
//! edges = complete            # or [(i1, j1), (i3, j2)]
//! ```
//!
//! Constraint pool file: one record per line,
//! `tag <sense> <rhs> <var>=<coeff> ...` with variables named
//! `x:<node>`, `y:<node>` or `z:<xnode>:<ynode>`.

use crate::instance::{EdgeSpec, Instance, InstanceError, LinearConstraint, Sense};

/// Serializes an instance; `parse_instance` on the output reproduces
/// identical variable ordinals.
pub fn write_instance(inst: &Instance) -> String {
    let mut out = String::new();
    out.push_str("subsets = [");
    for (s, subset) in inst.subsets().iter().enumerate() {
        if s > 0 {
            out.push_str(", ");
        }
        out.push('[');
        for (k, &i) in subset.iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            out.push_str(inst.x_name(i));
        }
        out.push(']');
    }
    out.push_str("]\n");
    out.push_str("y = [");
    for j in 0..inst.ny() {
        if j > 0 {
            out.push_str(", ");
        }
        out.push_str(inst.y_name(j));
    }
    out.push_str("]\n");
    if inst.is_complete() {
        out.push_str("edges = complete\n");
    } else {
        out.push_str("edges = [");
        for (k, &(i, j)) in inst.edges().iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            out.push_str(&format!("({}, {})", inst.x_name(i), inst.y_name(j)));
        }
        out.push_str("]\n");
    }
    out
}

fn strip_list<'a>(s: &'a str, what: &str) -> Result<&'a str, InstanceError> {
    let s = s.trim();
    if s.starts_with('[') && s.ends_with(']') {
        Ok(&s[1..s.len() - 1])
    } else {
        Err(InstanceError::Parse(format!("expected [..] for {}", what)))
    }
}

/// Splits a bracketed list at top level on commas, respecting nesting.
fn split_top(s: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '[' | '(' => {
                depth += 1;
                cur.push(ch);
            }
            ']' | ')' => {
                depth = depth.saturating_sub(1);
                cur.push(ch);
            }
            ',' if depth == 0 => {
                parts.push(cur.trim().to_string());
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        parts.push(cur.trim().to_string());
    }
    parts
}

pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let mut subsets: Option<Vec<Vec<String>>> = None;
    let mut y: Option<Vec<String>> = None;
    let mut edges: Option<EdgeSpec> = None;
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| InstanceError::Parse(format!("expected key = value: `{}`", line)))?;
        match key.trim() {
            "subsets" => {
                let inner = strip_list(value, "subsets")?;
                let mut lists = Vec::new();
                for item in split_top(inner) {
                    let names = strip_list(&item, "subset")?
                        .split(',')
                        .map(|n| n.trim().to_string())
                        .filter(|n| !n.is_empty())
                        .collect();
                    lists.push(names);
                }
                subsets = Some(lists);
            }
            "y" => {
                let inner = strip_list(value, "y")?;
                y = Some(
                    inner
                        .split(',')
                        .map(|n| n.trim().to_string())
                        .filter(|n| !n.is_empty())
                        .collect(),
                );
            }
            "edges" => {
                let v = value.trim();
                if v == "complete" {
                    edges = Some(EdgeSpec::Complete);
                } else {
                    let inner = strip_list(v, "edges")?;
                    let mut pairs = Vec::new();
                    for item in split_top(inner) {
                        let item = item.trim();
                        if !(item.starts_with('(') && item.ends_with(')')) {
                            return Err(InstanceError::Parse(format!("bad edge `{}`", item)));
                        }
                        let body = &item[1..item.len() - 1];
                        let (a, b) = body.split_once(',').ok_or_else(|| {
                            InstanceError::Parse(format!("bad edge `{}`", item))
                        })?;
                        pairs.push((a.trim().to_string(), b.trim().to_string()));
                    }
                    edges = Some(EdgeSpec::Explicit(pairs));
                }
            }
            other => {
                return Err(InstanceError::Parse(format!("unknown key `{}`", other)));
            }
        }
    }
    Instance::new(
        subsets.ok_or_else(|| InstanceError::Parse("missing subsets".into()))?,
        y.ok_or_else(|| InstanceError::Parse("missing y".into()))?,
        edges.ok_or_else(|| InstanceError::Parse("missing edges".into()))?,
    )
}

pub fn write_constraints(inst: &Instance, pool: &[LinearConstraint]) -> String {
    let mut out = String::new();
    for c in pool {
        out.push_str(&c.tag);
        out.push(' ');
        out.push_str(&c.sense.to_string());
        out.push_str(&format!(" {}", c.rhs));
        for (v, coeff) in &c.terms {
            out.push_str(&format!(" {}={}", inst.var_name(*v), coeff));
        }
        out.push('\n');
    }
    out
}

pub fn parse_constraints(
    inst: &Instance,
    text: &str,
) -> Result<Vec<LinearConstraint>, InstanceError> {
    let mut pool = Vec::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let tag = tokens
            .next()
            .ok_or_else(|| InstanceError::Parse("missing tag".into()))?;
        let sense = match tokens.next() {
            Some("<=") => Sense::Le,
            Some(">=") => Sense::Ge,
            Some("=") => Sense::Eq,
            other => {
                return Err(InstanceError::Parse(format!("bad sense {:?}", other)));
            }
        };
        let rhs: f64 = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| InstanceError::Parse("bad rhs".into()))?;
        let mut terms = Vec::new();
        for tok in tokens {
            let (name, coeff) = tok
                .rsplit_once('=')
                .ok_or_else(|| InstanceError::Parse(format!("bad term `{}`", tok)))?;
            let coeff: f64 = coeff
                .parse()
                .map_err(|_| InstanceError::Parse(format!("bad coefficient `{}`", coeff)))?;
            terms.push((inst.parse_var(name)?, coeff));
        }
        pool.push(LinearConstraint::new(inst, terms, sense, rhs, tag));
    }
    Ok(pool)
}
