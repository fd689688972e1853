//! Probability assignments for dissociated copies and the resulting bounds.
//!
//! For the disjunctive template `A0 ∨ xA1 ∨ … ∨ xAn` and its conjunctive dual
//! `A0 ∧ (x∨A1) ∧ … ∧ (x∨An)`, giving each copy `x_i` a probability `p_i`
//! yields an upper or lower bound on the original probability when:
//!
//! | template    | upper                     | lower                           |
//! |-------------|---------------------------|---------------------------------|
//! | disjunctive | `p_i ≥ p`                 | `p_i ≤ p`, `Π(1−p_i) ≥ 1−p`     |
//! | conjunctive | `p_i ≥ p`, `Π p_i ≥ p`    | `p_i ≤ p`                       |
//!
//! The bound is statically tight when the defining (in)equality is met with
//! equality; the symmetric members of those families are `p`, `1−(1−p)^(1/n)`,
//! `p^(1/n)` and `p` respectively.

use std::fmt;

use crate::dissociation::{dissociate, extract_template, DissociationResult, Grouping, Template, TemplateKind};
use crate::error::{Error, Result};
use crate::eval::eval_shannon;
use crate::events::{correlated_pair, encode_disjoint, DisjointDeclaration};
use crate::expr::Expr;
use crate::figures::rho_min;
use crate::prob::{Prob, ProbAssignment, APPROX_TOL};

/// Slack on bound-direction checks when floats are involved.
pub const DIRECTION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Upper,
    Lower,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Upper => "upper",
            Direction::Lower => "lower",
        })
    }
}

impl std::str::FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "upper" => Ok(Direction::Upper),
            "lower" => Ok(Direction::Lower),
            _ => Err(format!("unknown direction `{s}` (expected upper or lower)")),
        }
    }
}

/// Probabilities for the copies of one dissociated variable, in template order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundPlan {
    pub kind: TemplateKind,
    pub direction: Direction,
    pub p: Prob,
    pub assignments: Vec<Prob>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanChoice {
    /// The symmetric statically-tight assignment.
    Symmetric,
    /// Explicit `p_1..p_n`.
    Explicit(Vec<Prob>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub exact: Prob,
    pub bound: Prob,
    pub direction: Direction,
    /// `bound − exact`
    pub gap: Prob,
    pub tight: bool,
}

impl BoundReport {
    pub fn new(exact: Prob, bound: Prob, direction: Direction) -> Self {
        let gap = &bound - &exact;
        let tol = if gap.is_exact() { 0.0 } else { APPROX_TOL };
        let tight = gap.eq_tol(&Prob::zero(), tol);
        BoundReport {
            exact,
            bound,
            direction,
            gap,
            tight,
        }
    }

    /// Whether the bound lies on its declared side of the exact value.
    pub fn is_consistent(&self) -> bool {
        match self.direction {
            Direction::Upper => self.bound.ge_tol(&self.exact, DIRECTION_SLACK),
            Direction::Lower => self.bound.le_tol(&self.exact, DIRECTION_SLACK),
        }
    }
}

/// Symmetric statically-tight assignment for `n` copies.
pub fn assign_symmetric(kind: TemplateKind, direction: Direction, p: &Prob, n: usize) -> Vec<Prob> {
    assert!(n >= 1, "at least one copy");
    let n32 = n as u32;
    let value = match (kind, direction) {
        (TemplateKind::Disjunctive, Direction::Upper) | (TemplateKind::Conjunctive, Direction::Lower) => p.clone(),
        (TemplateKind::Disjunctive, Direction::Lower) => p.complement().nth_root(n32).complement(),
        (TemplateKind::Conjunctive, Direction::Upper) => p.nth_root(n32),
    };
    vec![value; n]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Invalid,
    Valid,
    /// Valid and meeting the tightness equality.
    TightFamily,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validation {
    pub verdict: Verdict,
    pub reason: String,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.verdict != Verdict::Invalid
    }
}

/// Checks `p_list` against the side conditions for `kind`/`direction`.
pub fn validate_assignment(kind: TemplateKind, direction: Direction, p: &Prob, p_list: &[Prob]) -> Validation {
    let exact = p.is_exact() && p_list.iter().all(Prob::is_exact);
    let tol = if exact { 0.0 } else { APPROX_TOL };
    let invalid = |reason: String| Validation {
        verdict: Verdict::Invalid,
        reason,
    };
    if p_list.is_empty() {
        return invalid("empty assignment".into());
    }
    if let Some(bad) = p_list.iter().find(|v| !v.in_unit_interval()) {
        return invalid(format!("{bad} is not a probability"));
    }
    let all_ge = p_list.iter().all(|v| v.ge_tol(p, tol));
    let all_le = p_list.iter().all(|v| v.le_tol(p, tol));
    let all_eq = p_list.iter().all(|v| v.eq_tol(p, tol));
    let product: Prob = p_list.iter().cloned().product();
    let co_product: Prob = p_list.iter().map(Prob::complement).product();
    let co_p = p.complement();

    let (ok, reason, tight) = match (kind, direction) {
        (TemplateKind::Disjunctive, Direction::Upper) => (
            all_ge,
            format!("requires every p_i >= {p}"),
            all_eq,
        ),
        (TemplateKind::Disjunctive, Direction::Lower) => (
            all_le && co_product.ge_tol(&co_p, tol),
            format!("requires every p_i <= {p} and prod(1 - p_i) = {co_product} >= {co_p}"),
            co_product.eq_tol(&co_p, tol),
        ),
        (TemplateKind::Conjunctive, Direction::Upper) => (
            all_ge && product.ge_tol(p, tol),
            format!("requires every p_i >= {p} and prod(p_i) = {product} >= {p}"),
            product.eq_tol(p, tol),
        ),
        (TemplateKind::Conjunctive, Direction::Lower) => (
            all_le,
            format!("requires every p_i <= {p}"),
            all_eq,
        ),
    };
    if !ok {
        return invalid(reason);
    }
    if tight {
        Validation {
            verdict: Verdict::TightFamily,
            reason: "meets the tightness equality".into(),
        }
    } else {
        Validation {
            verdict: Verdict::Valid,
            reason: "side conditions hold strictly".into(),
        }
    }
}

/// Everything produced by [`compute_bound`].
#[derive(Debug, Clone)]
pub struct BoundOutcome {
    pub report: BoundReport,
    pub template: Template,
    pub plan: BoundPlan,
    pub validation: Validation,
    pub dissociation: DissociationResult,
    /// Input probabilities extended with the copies' probabilities.
    pub dissociated_probs: ProbAssignment,
}

/// Dissociates `var` along its template and evaluates both expressions.
pub fn compute_bound(
    expr: &Expr,
    var: &str,
    direction: Direction,
    probs: &ProbAssignment,
    plan: &PlanChoice,
) -> Result<BoundOutcome> {
    let template = extract_template(expr, var)?;
    let n = template.n();
    let p = probs.require(var)?.clone();
    let assignments = match plan {
        PlanChoice::Symmetric => assign_symmetric(template.kind, direction, &p, n),
        PlanChoice::Explicit(list) => {
            if list.len() != n {
                return Err(Error::PlanMismatch(format!(
                    "plan has {} entries but the {} template has {n} parts",
                    list.len(),
                    template.kind
                )));
            }
            list.clone()
        }
    };
    let validation = validate_assignment(template.kind, direction, &p, &assignments);
    if !validation.is_valid() {
        return Err(Error::InvalidPlan(format!(
            "{} {direction} bound {}",
            template.kind, validation.reason
        )));
    }
    let plan = BoundPlan {
        kind: template.kind,
        direction,
        p,
        assignments,
    };

    let dissociation = dissociate(expr, var, &Grouping::Groups(template.occurrence_groups.clone()))?;
    let mut dissociated_probs = probs.clone();
    for (name, value) in dissociation.fresh_names.iter().zip(&plan.assignments) {
        dissociated_probs.set(name.clone(), value.clone())?;
    }
    let exact = eval_shannon(expr, probs)?;
    let bound = eval_shannon(&dissociation.dissociated, &dissociated_probs)?;
    let report = BoundReport::new(exact, bound, direction);
    if !report.is_consistent() {
        return Err(Error::InvariantBreach(format!(
            "{direction} bound {} vs exact {} for `{var}`",
            report.bound, report.exact
        )));
    }
    Ok(BoundOutcome {
        report,
        template,
        plan,
        validation,
        dissociation,
        dissociated_probs,
    })
}

#[derive(Debug, Clone)]
pub struct BoundStep {
    pub var: String,
    pub report: BoundReport,
    pub plan: BoundPlan,
    /// Expression after this step.
    pub expr: Expr,
}

#[derive(Debug, Clone)]
pub struct MultiBoundReport {
    pub direction: Direction,
    /// Probability of the input expression.
    pub exact: Prob,
    pub steps: Vec<BoundStep>,
    pub final_expr: Expr,
    pub final_probs: ProbAssignment,
    /// Overall report: input probability against the last bound.
    pub overall: BoundReport,
}

/// Dissociates `vars` one after another, each step bounding the previous one.
pub fn dissociate_bound_multi(
    expr: &Expr,
    vars: &[String],
    direction: Direction,
    probs: &ProbAssignment,
) -> Result<MultiBoundReport> {
    let exact = eval_shannon(expr, probs)?;
    let mut current = expr.clone();
    let mut current_probs = probs.clone();
    let mut steps = Vec::with_capacity(vars.len());
    for (index, var) in vars.iter().enumerate() {
        let outcome = compute_bound(&current, var, direction, &current_probs, &PlanChoice::Symmetric)
            .map_err(|e| Error::Step {
                index,
                var: var.clone(),
                source: Box::new(e),
            })?;
        current = outcome.dissociation.dissociated.clone();
        current_probs = outcome.dissociated_probs;
        steps.push(BoundStep {
            var: var.clone(),
            report: outcome.report,
            plan: outcome.plan,
            expr: current.clone(),
        });
    }
    let last = steps
        .last()
        .map(|s| s.report.bound.clone())
        .unwrap_or_else(|| exact.clone());
    let overall = BoundReport::new(exact.clone(), last, direction);
    if !overall.is_consistent() {
        return Err(Error::InvariantBreach(format!(
            "chained {direction} bound {} vs exact {}",
            overall.bound, overall.exact
        )));
    }
    Ok(MultiBoundReport {
        direction,
        exact,
        steps,
        final_expr: current,
        final_probs: current_probs,
        overall,
    })
}

/// A concrete choice of events `A_1..A_n` used by the refuter.
#[derive(Debug, Clone)]
pub struct Instance {
    pub family: &'static str,
    pub q: Prob,
    pub rho: Option<Prob>,
    pub parts: Vec<Expr>,
    pub probs: ProbAssignment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Worse {
    /// The candidate is not a bound in the requested direction.
    WrongSide,
    /// The candidate is a bound but farther from the exact value.
    Looser,
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub instance: Instance,
    pub exact: Prob,
    pub tight_bound: Prob,
    pub candidate_bound: Prob,
    pub worse: Worse,
}

/// Anchor event families for `n` parts: identical, pairwise disjoint and
/// independent events over a grid of marginals, plus correlated pairs at
/// `ρ ∈ {ρ_min, 0, 1}` when `n = 2`.
pub fn anchor_instances(n: usize) -> Vec<Instance> {
    assert!(n >= 1);
    let grid: Vec<Prob> = (1..=9).map(|k| Prob::ratio(k, 10)).collect();
    let mut out = Vec::new();
    for q in &grid {
        let y = Expr::var("_y1");
        out.push(Instance {
            family: "identical",
            q: q.clone(),
            rho: Some(Prob::one()),
            parts: vec![y; n],
            probs: ProbAssignment::new().with("_y1", q.clone()),
        });

        let mass = q * Prob::ratio(n as i64, 1);
        if mass <= Prob::one() {
            let mut probs = vec![q.clone(); n];
            probs.push(mass.complement());
            let decl = DisjointDeclaration::unlabeled(probs.iter().map(|p| p.as_rational().unwrap().clone()).collect());
            let enc = encode_disjoint(&decl).expect("grid masses sum to one");
            out.push(Instance {
                family: "disjoint",
                q: q.clone(),
                rho: None,
                parts: enc.events[..n].to_vec(),
                probs: enc.assignment(),
            });
        }

        let mut probs = ProbAssignment::new();
        let parts = (1..=n)
            .map(|i| {
                let name = format!("_y{i}");
                probs.set(name.clone(), q.clone()).unwrap();
                Expr::var(name)
            })
            .collect();
        out.push(Instance {
            family: "independent",
            q: q.clone(),
            rho: Some(Prob::zero()),
            parts,
            probs,
        });
    }
    if n == 2 {
        for q in &grid {
            let low = rho_min(q).expect("grid is inside (0, 1)");
            for rho in [low, Prob::zero(), Prob::one()] {
                let pair = correlated_pair(q, &rho).expect("anchor correlations are feasible");
                out.push(Instance {
                    family: "correlated",
                    q: q.clone(),
                    rho: Some(rho),
                    parts: vec![pair.a.clone(), pair.b.clone()],
                    probs: pair.assignment(),
                });
            }
        }
    }
    out
}

/// Searches the anchor families for an instance on which `candidate` gives a
/// strictly worse bound than the symmetric statically-tight assignment.
///
/// This is a falsifier: `None` means no witness was found, not that none exists.
pub fn refute_better_assignment(
    kind: TemplateKind,
    direction: Direction,
    p: &Prob,
    n: usize,
    candidate: &[Prob],
) -> Option<Witness> {
    assert_eq!(candidate.len(), n, "candidate must have n entries");
    let tight = assign_symmetric(kind, direction, p, n);
    let names: Vec<String> = (1..=n).map(|i| format!("x#{i}")).collect();
    for instance in anchor_instances(n) {
        let template = Template {
            kind,
            var: "x".into(),
            a0: None,
            parts: instance.parts.clone(),
            occurrence_groups: (0..n).map(|i| vec![i]).collect(),
        };
        let original = template.assemble();
        let dissociated = template.assemble_with(&names);
        let mut base = instance.probs.clone();
        base.set("x", p.clone()).unwrap();
        let with = |values: &[Prob]| {
            let mut probs = base.clone();
            for (name, v) in names.iter().zip(values) {
                probs.set(name.clone(), v.clone()).unwrap();
            }
            eval_shannon(&dissociated, &probs).expect("all variables assigned")
        };
        let exact = eval_shannon(&original, &base).expect("all variables assigned");
        let tight_bound = with(&tight);
        let candidate_bound = with(candidate);
        let worse = match direction {
            Direction::Upper if !candidate_bound.ge_tol(&exact, DIRECTION_SLACK) => Some(Worse::WrongSide),
            Direction::Upper if !candidate_bound.le_tol(&tight_bound, APPROX_TOL) => Some(Worse::Looser),
            Direction::Lower if !candidate_bound.le_tol(&exact, DIRECTION_SLACK) => Some(Worse::WrongSide),
            Direction::Lower if !candidate_bound.ge_tol(&tight_bound, APPROX_TOL) => Some(Worse::Looser),
            _ => None,
        };
        if let Some(worse) = worse {
            return Some(Witness {
                instance,
                exact,
                tight_bound,
                candidate_bound,
                worse,
            });
        }
    }
    None
}
