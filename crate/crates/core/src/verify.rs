//! Randomized property suites, shared by the `verify` subcommand and tests.
//!
//! All generators draw from a seeded ChaCha stream, so a run is a pure
//! function of `(seed, cases)`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{compute_bound, validate_assignment, Direction, PlanChoice};
use crate::dissociation::{check_dissociation, dissociate, Grouping, Template, TemplateKind};
use crate::error::Error;
use crate::eval::{eval_enumerate, eval_shannon};
use crate::expr::{complement, Expr};
use crate::identities::verify_identities;
use crate::parser::{format_expr, parse_expr};
use crate::prob::{Prob, ProbAssignment};

/// Probabilities used by the randomized suites.
pub fn grid() -> [Prob; 5] {
    [
        Prob::zero(),
        Prob::ratio(1, 4),
        Prob::half(),
        Prob::ratio(3, 4),
        Prob::one(),
    ]
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn var_names(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}

/// Random expression over `vars` with nesting depth at most `depth`.
pub fn random_expr<R: Rng>(rng: &mut R, vars: &[String], depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.92) {
            Expr::Var(vars.choose(rng).unwrap().clone())
        } else {
            Expr::Const(rng.gen())
        };
    }
    match rng.gen_range(0..5) {
        0 => Expr::not(random_expr(rng, vars, depth - 1)),
        1 | 2 => {
            let k = rng.gen_range(2..=3);
            Expr::And((0..k).map(|_| random_expr(rng, vars, depth - 1)).collect())
        }
        _ => {
            let k = rng.gen_range(2..=3);
            Expr::Or((0..k).map(|_| random_expr(rng, vars, depth - 1)).collect())
        }
    }
}

/// Random negation-free expression.
pub fn random_monotone_expr<R: Rng>(rng: &mut R, vars: &[String], depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return Expr::Var(vars.choose(rng).unwrap().clone());
    }
    let k = rng.gen_range(2..=3);
    let children = (0..k).map(|_| random_monotone_expr(rng, vars, depth - 1)).collect();
    if rng.gen_bool(0.5) {
        Expr::And(children)
    } else {
        Expr::Or(children)
    }
}

pub fn random_grid_probs<R: Rng>(rng: &mut R, vars: &[String]) -> ProbAssignment {
    let grid = grid();
    vars.iter()
        .map(|v| (v.clone(), grid.choose(rng).unwrap().clone()))
        .collect()
}

/// A valid plan drawn from the grid for the given cell.
pub fn random_valid_plan<R: Rng>(
    rng: &mut R,
    kind: TemplateKind,
    direction: Direction,
    p: &Prob,
    n: usize,
) -> Vec<Prob> {
    let grid = grid();
    let above: Vec<&Prob> = grid.iter().filter(|v| *v >= p).collect();
    let below: Vec<&Prob> = grid.iter().filter(|v| *v <= p).collect();
    let pool = match direction {
        Direction::Upper => &above,
        Direction::Lower => &below,
    };
    for _ in 0..32 {
        let plan: Vec<Prob> = (0..n).map(|_| (*pool.choose(rng).unwrap()).clone()).collect();
        if validate_assignment(kind, direction, p, &plan).is_valid() {
            return plan;
        }
    }
    // Always-valid fallbacks: the copies' extreme values.
    match (kind, direction) {
        (TemplateKind::Disjunctive, Direction::Lower) => vec![Prob::zero(); n],
        (TemplateKind::Conjunctive, Direction::Upper) => vec![Prob::one(); n],
        _ => vec![p.clone(); n],
    }
}

#[derive(Debug, Clone)]
pub struct TemplateInstance {
    pub template: Template,
    pub expr: Expr,
    pub direction: Direction,
    pub probs: ProbAssignment,
    pub plan: Vec<Prob>,
}

/// Random template with `n ≤ 3` parts over at most six variables `y1..y6`,
/// grid probabilities and a random valid plan.
pub fn random_template_instance<R: Rng>(rng: &mut R) -> TemplateInstance {
    let kind = if rng.gen_bool(0.5) {
        TemplateKind::Disjunctive
    } else {
        TemplateKind::Conjunctive
    };
    let direction = if rng.gen_bool(0.5) {
        Direction::Upper
    } else {
        Direction::Lower
    };
    let n = rng.gen_range(1..=3);
    let vars = var_names("y", rng.gen_range(1..=6));
    let parts: Vec<Expr> = (0..n).map(|_| random_expr(rng, &vars, 2)).collect();
    let neutral = Expr::Const(kind == TemplateKind::Conjunctive);
    let a0 = if rng.gen_bool(0.5) {
        Some(random_expr(rng, &vars, 2))
    } else if n == 1 {
        // Keeps the top-level connective, so the kind is recovered.
        Some(neutral)
    } else {
        None
    };
    let template = Template {
        kind,
        var: "x".into(),
        a0,
        parts,
        occurrence_groups: (0..n).map(|i| vec![i]).collect(),
    };
    let expr = template.assemble();
    let mut probs = random_grid_probs(rng, &vars);
    let p = grid().choose(rng).unwrap().clone();
    probs.set("x", p.clone()).unwrap();
    let plan = random_valid_plan(rng, kind, direction, &p, n);
    TemplateInstance {
        template,
        expr,
        direction,
        probs,
        plan,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    /// Descriptions of the first few failures.
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn collect(name: &'static str, outcomes: Vec<Result<(), String>>) -> Self {
        let failures: Vec<String> = outcomes.iter().filter_map(|o| o.clone().err()).collect();
        SuiteResult {
            name,
            passed: outcomes.len() - failures.len(),
            failed: failures.len(),
            failures: failures.into_iter().take(5).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub seed: u64,
    pub cases: usize,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.failed == 0)
    }
}

type Case = fn(&mut ChaCha8Rng) -> Result<(), String>;

const SUITES: &[(&str, Case)] = &[
    ("shannon-vs-enumeration", case_shannon),
    ("complement", case_complement),
    ("identities", case_identities),
    ("soundness", case_soundness),
    ("dissociation-roundtrip", case_dissociation),
    ("format-roundtrip", case_format),
];

/// Runs each suite for `cases` random instances.
pub fn run_all(seed: u64, cases: usize) -> VerifyReport {
    let suites = SUITES
        .iter()
        .enumerate()
        .map(|(i, (name, case))| run_suite(name, *case, seed, i as u64, cases))
        .collect();
    VerifyReport { seed, cases, suites }
}

fn run_suite(name: &'static str, case: Case, seed: u64, stream: u64, cases: usize) -> SuiteResult {
    let outcomes = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed.wrapping_add(i as u64), stream);
            case(&mut rng).map_err(|e| format!("case {i}: {e}"))
        })
        .collect();
    SuiteResult::collect(name, outcomes)
}

pub fn case_shannon(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let vars = var_names("v", rng.gen_range(1..=12));
    let e = random_expr(rng, &vars, 4);
    let probs = random_grid_probs(rng, &vars);
    let a = eval_enumerate(&e, &probs).map_err(|x| x.to_string())?;
    let b = eval_shannon(&e, &probs).map_err(|x| x.to_string())?;
    if a.is_exact() && b.is_exact() && a == b {
        Ok(())
    } else {
        Err(format!("{e}: enumeration {a}, shannon {b}"))
    }
}

pub fn case_complement(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let vars = var_names("v", rng.gen_range(1..=8));
    let e = random_expr(rng, &vars, 4);
    let probs = random_grid_probs(rng, &vars);
    let c = complement(&e);
    let total = eval_shannon(&e, &probs).map_err(|x| x.to_string())?
        + eval_shannon(&c, &probs).map_err(|x| x.to_string())?;
    if c.is_nnf() && total == Prob::one() && total.is_exact() {
        Ok(())
    } else {
        Err(format!("{e}: P + P[complement] = {total}"))
    }
}

pub fn case_identities(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let vars = var_names("v", rng.gen_range(1..=8));
    let a = random_expr(rng, &vars, 3);
    let b = random_expr(rng, &vars, 3);
    let probs = random_grid_probs(rng, &vars);
    let r = verify_identities(&a, &b, &probs).map_err(|x| x.to_string())?;
    if r.residuals().iter().all(|x| x.is_exact() && x.is_zero()) {
        Ok(())
    } else {
        Err(format!("A={a}, B={b}: residuals {:?}", r.residuals()))
    }
}

pub fn case_soundness(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let inst = random_template_instance(rng);
    let outcome = compute_bound(
        &inst.expr,
        "x",
        inst.direction,
        &inst.probs,
        &PlanChoice::Explicit(inst.plan.clone()),
    );
    let outcome = match outcome {
        Ok(o) => o,
        Err(Error::InvariantBreach(msg)) => return Err(format!("{}: {msg}", inst.expr)),
        Err(e) => return Err(format!("{}: unexpected error {e}", inst.expr)),
    };
    if outcome.template.kind != inst.template.kind {
        return Err(format!("{}: recovered kind {}", inst.expr, outcome.template.kind));
    }
    let exact = eval_enumerate(&inst.expr, &inst.probs).map_err(|x| x.to_string())?;
    let bound = eval_enumerate(&outcome.dissociation.dissociated, &outcome.dissociated_probs)
        .map_err(|x| x.to_string())?;
    let ok = match inst.direction {
        Direction::Upper => bound >= exact,
        Direction::Lower => bound <= exact,
    };
    if ok && exact.is_exact() && bound.is_exact() {
        Ok(())
    } else {
        Err(format!(
            "{} {} plan {:?}: exact {exact}, bound {bound}",
            inst.expr,
            inst.direction,
            inst.plan.iter().map(Prob::to_string).collect::<Vec<_>>()
        ))
    }
}

pub fn case_dissociation(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let vars = var_names("v", rng.gen_range(1..=5));
    let e = random_monotone_expr(rng, &vars, 4);
    let var = vars.choose(rng).unwrap();
    let (count, _) = e.occurrences(var);
    if count == 0 {
        return Ok(());
    }
    // Random partition of the occurrences.
    let buckets = rng.gen_range(1..=count);
    let mut groups = vec![Vec::new(); buckets];
    for i in 0..count {
        let b = if i < buckets { i } else { rng.gen_range(0..buckets) };
        groups[b].push(i);
    }
    let r = dissociate(&e, var, &Grouping::Groups(groups)).map_err(|x| x.to_string())?;
    let fresh: Vec<_> = r.fresh_names.clone();
    let original_vars = e.free_vars();
    let ok = check_dissociation(&r)
        && fresh.len() == buckets
        && fresh.iter().all(|n| !original_vars.contains(n) && r.dissociated.contains_var(n));
    if ok {
        Ok(())
    } else {
        Err(format!("{e} on {var}: {}", r.dissociated))
    }
}

pub fn case_format(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let vars = var_names("v", rng.gen_range(1..=6));
    let e = random_expr(rng, &vars, 5);
    let text = format_expr(&e);
    match parse_expr(&text) {
        Ok(back) if back == e => Ok(()),
        Ok(back) => Err(format!("{text} re-parsed as {back:?}")),
        Err(err) => Err(format!("{text}: {err}")),
    }
}
