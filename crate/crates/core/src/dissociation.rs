//! Dissociation of a variable into fresh independent copies, and extraction
//! of the one-level disjunctive/conjunctive template around a variable.
//!
//! Occurrences of the dissociated variable are numbered from 0, left to right
//! over the leaves of the tree. A grouping partitions these indices; group
//! `k` (1-based) is replaced by the fresh variable `var#k`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{substitute, Expr};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Grouping {
    /// One fresh variable per occurrence.
    Finest,
    /// Explicit partition of occurrence indices.
    Groups(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DissociationResult {
    pub var: String,
    pub original: Expr,
    pub dissociated: Expr,
    /// Fresh name to original name.
    pub theta: BTreeMap<String, String>,
    /// Occurrence indices per fresh variable, in fresh-name order.
    pub groups: Vec<Vec<usize>>,
    /// Fresh names, `fresh_names[k]` standing for `groups[k]`.
    pub fresh_names: Vec<String>,
}

/// Replaces each group of occurrences of `var` with its own fresh variable.
pub fn dissociate(expr: &Expr, var: &str, grouping: &Grouping) -> Result<DissociationResult> {
    let (positive, negated) = expr.occurrences(var);
    if positive + negated == 0 {
        return Err(Error::VariableAbsent(var.into()));
    }
    if negated > 0 {
        return Err(Error::NegatedOccurrence(var.into()));
    }
    let groups = match grouping {
        Grouping::Finest => (0..positive).map(|i| vec![i]).collect(),
        Grouping::Groups(g) => {
            validate_partition(g, positive)?;
            g.clone()
        }
    };

    let fresh_names = fresh_names(expr, var, groups.len());
    let mut owner = vec![0usize; positive];
    for (k, g) in groups.iter().enumerate() {
        for &i in g {
            owner[i] = k;
        }
    }
    let mut counter = 0;
    let dissociated = rename_occurrences(expr, var, &mut |_| {
        let name = fresh_names[owner[counter]].clone();
        counter += 1;
        name
    });
    let theta = fresh_names
        .iter()
        .map(|n| (n.clone(), var.to_string()))
        .collect();
    Ok(DissociationResult {
        var: var.into(),
        original: expr.clone(),
        dissociated,
        theta,
        groups,
        fresh_names,
    })
}

fn validate_partition(groups: &[Vec<usize>], occurrences: usize) -> Result<()> {
    let mut seen = vec![false; occurrences];
    for g in groups {
        if g.is_empty() {
            return Err(Error::InvalidPartition("empty group".into()));
        }
        for &i in g {
            if i >= occurrences {
                return Err(Error::InvalidPartition(format!(
                    "occurrence {i} out of range (variable occurs {occurrences} times)"
                )));
            }
            if seen[i] {
                return Err(Error::InvalidPartition(format!(
                    "occurrence {i} appears in more than one group"
                )));
            }
            seen[i] = true;
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!("occurrence {i} is not covered")));
    }
    Ok(())
}

// `var#k` for k = 1..=count; the separator grows if the expression already
// uses such a name.
fn fresh_names(expr: &Expr, var: &str, count: usize) -> Vec<String> {
    let taken = expr.free_vars();
    let mut sep = String::from("#");
    loop {
        let names: Vec<String> = (1..=count).map(|k| format!("{var}{sep}{k}")).collect();
        if names.iter().all(|n| !taken.contains(n)) {
            return names;
        }
        sep.push('#');
    }
}

fn rename_occurrences(expr: &Expr, var: &str, next: &mut dyn FnMut(&str) -> String) -> Expr {
    match expr {
        Expr::Var(n) if n == var => Expr::Var(next(n)),
        Expr::Var(_) | Expr::Const(_) => expr.clone(),
        Expr::Not(c) => Expr::not(rename_occurrences(c, var, next)),
        Expr::And(cs) => Expr::And(cs.iter().map(|c| rename_occurrences(c, var, next)).collect()),
        Expr::Or(cs) => Expr::Or(cs.iter().map(|c| rename_occurrences(c, var, next)).collect()),
    }
}

/// True iff applying `theta` to the dissociated expression gives back the original.
pub fn check_dissociation(result: &DissociationResult) -> bool {
    substitute(&result.dissociated, &result.theta) == result.original
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemplateKind {
    /// `A0 ∨ xA1 ∨ … ∨ xAn`
    Disjunctive,
    /// `A0 ∧ (x∨A1) ∧ … ∧ (x∨An)`
    Conjunctive,
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TemplateKind::Disjunctive => "disjunctive",
            TemplateKind::Conjunctive => "conjunctive",
        })
    }
}

impl std::str::FromStr for TemplateKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "disjunctive" | "disj" => Ok(TemplateKind::Disjunctive),
            "conjunctive" | "conj" => Ok(TemplateKind::Conjunctive),
            _ => Err(format!("unknown template kind `{s}`")),
        }
    }
}

/// One-level template of an expression around `var`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub kind: TemplateKind,
    pub var: String,
    pub a0: Option<Expr>,
    /// `A_1..A_n` in child order.
    pub parts: Vec<Expr>,
    /// Occurrence indices of `var` inside the child that carries `parts[i]`.
    pub occurrence_groups: Vec<Vec<usize>>,
}

impl Template {
    pub fn n(&self) -> usize {
        self.parts.len()
    }

    /// The template expression over `var`.
    pub fn assemble(&self) -> Expr {
        let names = vec![self.var.clone(); self.n()];
        self.assemble_with(&names)
    }

    /// The template with `names[i]` in place of the `i`-th copy of `var`.
    pub fn assemble_with(&self, names: &[String]) -> Expr {
        assert_eq!(names.len(), self.n(), "one name per template part");
        let mut children: Vec<Expr> = self.a0.iter().cloned().collect();
        for (name, part) in names.iter().zip(&self.parts) {
            let x = Expr::var(name.clone());
            children.push(match (self.kind, part) {
                (TemplateKind::Disjunctive, Expr::Const(true)) => x,
                (TemplateKind::Disjunctive, a) => Expr::And(vec![x, a.clone()]),
                (TemplateKind::Conjunctive, Expr::Const(false)) => x,
                (TemplateKind::Conjunctive, a) => Expr::Or(vec![x, a.clone()]),
            });
        }
        match self.kind {
            TemplateKind::Disjunctive => Expr::or(children),
            TemplateKind::Conjunctive => Expr::and(children),
        }
    }
}

/// Reads the template of `expr` around `var` without any factoring.
///
/// A top-level `Or` yields the disjunctive form, a top-level `And` the
/// conjunctive one, and a bare `var` the degenerate disjunctive template.
pub fn extract_template(expr: &Expr, var: &str) -> Result<Template> {
    if !expr.contains_var(var) {
        return Err(Error::VariableAbsent(var.into()));
    }
    if expr.occurs_under_not(var) {
        return Err(Error::MixedPolarity(var.into()));
    }
    let not_template = |reason: &str| Error::NotTemplateForm {
        var: var.into(),
        reason: reason.into(),
    };
    let (kind, children) = match expr {
        Expr::Var(_) => {
            return Ok(Template {
                kind: TemplateKind::Disjunctive,
                var: var.into(),
                a0: None,
                parts: vec![Expr::Const(true)],
                occurrence_groups: vec![vec![0]],
            })
        }
        Expr::Or(cs) => (TemplateKind::Disjunctive, cs),
        Expr::And(cs) => (TemplateKind::Conjunctive, cs),
        _ => return Err(not_template("top level is neither a conjunction nor a disjunction")),
    };

    let mut a0 = Vec::new();
    let mut parts = Vec::new();
    let mut occurrence_groups = Vec::new();
    let mut next_occurrence = 0;
    for child in children {
        if !child.contains_var(var) {
            a0.push(child.clone());
            continue;
        }
        let items: &[Expr] = match (kind, child) {
            (_, Expr::Var(_)) => std::slice::from_ref(child),
            (TemplateKind::Disjunctive, Expr::And(cs)) => cs,
            (TemplateKind::Conjunctive, Expr::Or(cs)) => cs,
            _ => return Err(not_template("variable is nested deeper than one level")),
        };
        let (direct, rest): (Vec<&Expr>, Vec<&Expr>) =
            items.iter().partition(|c| matches!(c, Expr::Var(n) if n == var));
        if rest.iter().any(|c| c.contains_var(var)) {
            return Err(not_template("variable is nested deeper than one level"));
        }
        let rest = rest.into_iter().cloned();
        parts.push(match kind {
            TemplateKind::Disjunctive => Expr::and(rest),
            TemplateKind::Conjunctive => Expr::or(rest),
        });
        occurrence_groups.push((next_occurrence..next_occurrence + direct.len()).collect());
        next_occurrence += direct.len();
    }
    let a0 = match (a0.is_empty(), kind) {
        (true, _) => None,
        (false, TemplateKind::Disjunctive) => Some(Expr::or(a0)),
        (false, TemplateKind::Conjunctive) => Some(Expr::and(a0)),
    };
    Ok(Template {
        kind,
        var: var.into(),
        a0,
        parts,
        occurrence_groups,
    })
}

/// Names in `result.dissociated` that were introduced by the dissociation.
pub fn generated_names(result: &DissociationResult) -> BTreeSet<String> {
    result
        .dissociated
        .free_vars()
        .into_iter()
        .filter(|n| result.theta.contains_key(n))
        .collect()
}
