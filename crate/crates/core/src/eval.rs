//! Exact probability of an expression over independent variables.
//!
//! Two evaluators: [`eval_enumerate`] sums the weight of every satisfying
//! total assignment and serves as the oracle; [`eval_shannon`] conditions on
//! one variable at a time, memoizing on the conditioned sub-expression.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::prob::{Prob, ProbAssignment};

pub const ENUMERATION_CAP: usize = 20;
pub const SHANNON_CAP: usize = 64;

/// Expression compiled to variable indices.
#[derive(Debug, Clone)]
pub(crate) enum Node {
    Var(usize),
    Const(bool),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
}

impl Node {
    pub(crate) fn compile(expr: &Expr, index: &BTreeMap<&str, usize>) -> Node {
        match expr {
            Expr::Var(n) => Node::Var(index[n.as_str()]),
            Expr::Const(b) => Node::Const(*b),
            Expr::Not(c) => Node::Not(Box::new(Node::compile(c, index))),
            Expr::And(cs) => Node::And(cs.iter().map(|c| Node::compile(c, index)).collect()),
            Expr::Or(cs) => Node::Or(cs.iter().map(|c| Node::compile(c, index)).collect()),
        }
    }

    pub(crate) fn eval(&self, values: &[bool]) -> bool {
        match self {
            Node::Var(i) => values[*i],
            Node::Const(b) => *b,
            Node::Not(c) => !c.eval(values),
            Node::And(cs) => cs.iter().all(|c| c.eval(values)),
            Node::Or(cs) => cs.iter().any(|c| c.eval(values)),
        }
    }
}

fn check_vars(vars: &BTreeSet<String>, probs: &ProbAssignment, cap: usize) -> Result<()> {
    if let Some(missing) = vars.iter().find(|v| !probs.contains(v)) {
        return Err(Error::MissingProbability(missing.clone()));
    }
    if vars.len() > cap {
        return Err(Error::TooManyVariables {
            count: vars.len(),
            cap,
        });
    }
    Ok(())
}

/// `P[expr]` by enumerating all total assignments of its free variables.
pub fn eval_enumerate(expr: &Expr, probs: &ProbAssignment) -> Result<Prob> {
    eval_enumerate_with_cap(expr, probs, ENUMERATION_CAP)
}

pub fn eval_enumerate_with_cap(expr: &Expr, probs: &ProbAssignment, cap: usize) -> Result<Prob> {
    let vars = expr.free_vars();
    check_vars(&vars, probs, cap)?;
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let node = Node::compile(expr, &index);
    let p: Vec<Prob> = names.iter().map(|n| probs.get(n).unwrap().clone()).collect();
    let q: Vec<Prob> = p.iter().map(Prob::complement).collect();
    let mut values = vec![false; names.len()];
    let mut total = Prob::zero();
    enumerate(&node, &p, &q, 0, Prob::one(), &mut values, &mut total);
    Ok(total)
}

// Depth-first over assignments; `weight` is the product of the factors fixed so far.
fn enumerate(
    node: &Node,
    p: &[Prob],
    q: &[Prob],
    depth: usize,
    weight: Prob,
    values: &mut [bool],
    total: &mut Prob,
) {
    if weight.is_zero() {
        return;
    }
    if depth == values.len() {
        if node.eval(values) {
            *total = &*total + &weight;
        }
        return;
    }
    values[depth] = true;
    enumerate(node, p, q, depth + 1, &weight * &p[depth], values, total);
    values[depth] = false;
    enumerate(node, p, q, depth + 1, &weight * &q[depth], values, total);
}

/// Fast `f64` enumeration over compiled nodes, used in inner numeric loops.
pub(crate) fn enumerate_f64(node: &Node, p: &[f64]) -> f64 {
    let k = p.len();
    let mut values = vec![false; k];
    let mut total = 0.0;
    for mask in 0u64..(1u64 << k) {
        let mut w = 1.0;
        for (i, v) in values.iter_mut().enumerate() {
            *v = mask >> i & 1 == 1;
            w *= if *v { p[i] } else { 1.0 - p[i] };
        }
        if w != 0.0 && node.eval(&values) {
            total += w;
        }
    }
    total
}

/// `P[expr]` by recursive conditioning with memoization.
pub fn eval_shannon(expr: &Expr, probs: &ProbAssignment) -> Result<Prob> {
    eval_shannon_with_cap(expr, probs, SHANNON_CAP)
}

pub fn eval_shannon_with_cap(expr: &Expr, probs: &ProbAssignment, cap: usize) -> Result<Prob> {
    let vars = expr.free_vars();
    check_vars(&vars, probs, cap)?;
    let mut ctx = Shannon {
        probs,
        memo: HashMap::new(),
    };
    Ok(ctx.prob(&simplify(expr)))
}

struct Shannon<'a> {
    probs: &'a ProbAssignment,
    memo: HashMap<Expr, Prob>,
}

impl Shannon<'_> {
    fn prob(&mut self, e: &Expr) -> Prob {
        match e {
            Expr::Const(b) => return Prob::from_bool(*b),
            Expr::Var(n) => return self.probs.get(n).unwrap().clone(),
            Expr::Not(c) => return self.prob(c).complement(),
            _ => {}
        }
        if let Some(p) = self.memo.get(e) {
            return p.clone();
        }
        let result = match independent_components(e) {
            Some(parts) => match e {
                Expr::And(_) => parts.iter().map(|c| self.prob(c)).product(),
                _ => parts
                    .iter()
                    .map(|c| self.prob(c).complement())
                    .product::<Prob>()
                    .complement(),
            },
            None => {
                let x = pivot(e);
                let p = self.probs.get(&x).unwrap().clone();
                let hi = self.prob(&condition(e, &x, true));
                let lo = self.prob(&condition(e, &x, false));
                &p * hi + p.complement() * lo
            }
        };
        self.memo.insert(e.clone(), result.clone());
        result
    }
}

// Splits the children of an And/Or into groups with pairwise disjoint
// variables. Returns None when there is only one group.
fn independent_components(e: &Expr) -> Option<Vec<Expr>> {
    let (children, is_and) = match e {
        Expr::And(cs) => (cs, true),
        Expr::Or(cs) => (cs, false),
        _ => return None,
    };
    let vars: Vec<BTreeSet<String>> = children.iter().map(Expr::free_vars).collect();
    let mut parent: Vec<usize> = (0..children.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..children.len() {
        for j in (i + 1)..children.len() {
            if !vars[i].is_disjoint(&vars[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<Expr>> = BTreeMap::new();
    for (i, c) in children.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(c.clone());
    }
    if groups.len() < 2 {
        return None;
    }
    Some(
        groups
            .into_values()
            .map(|g| if is_and { Expr::and(g) } else { Expr::or(g) })
            .collect(),
    )
}

// Most frequent variable, ties broken by name.
fn pivot(e: &Expr) -> String {
    fn count<'a>(e: &'a Expr, acc: &mut BTreeMap<&'a str, usize>) {
        match e {
            Expr::Var(n) => *acc.entry(n).or_default() += 1,
            _ => e.children().iter().for_each(|c| count(c, acc)),
        }
    }
    let mut acc = BTreeMap::new();
    count(e, &mut acc);
    let best = acc.values().copied().max().unwrap_or(0);
    acc.into_iter()
        .find(|(_, c)| *c == best)
        .map(|(n, _)| n.to_string())
        .expect("pivot on a variable-free expression")
}

/// Restricts `var` to `value` and folds constants.
pub(crate) fn condition(e: &Expr, var: &str, value: bool) -> Expr {
    match e {
        Expr::Var(n) if n == var => Expr::Const(value),
        Expr::Var(_) | Expr::Const(_) => e.clone(),
        Expr::Not(c) => fold_not(condition(c, var, value)),
        Expr::And(cs) => fold_nary(cs.iter().map(|c| condition(c, var, value)), true),
        Expr::Or(cs) => fold_nary(cs.iter().map(|c| condition(c, var, value)), false),
    }
}

/// Constant folding without any other rewriting.
pub(crate) fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Var(_) | Expr::Const(_) => e.clone(),
        Expr::Not(c) => fold_not(simplify(c)),
        Expr::And(cs) => fold_nary(cs.iter().map(simplify), true),
        Expr::Or(cs) => fold_nary(cs.iter().map(simplify), false),
    }
}

fn fold_not(c: Expr) -> Expr {
    match c {
        Expr::Const(b) => Expr::Const(!b),
        Expr::Not(inner) => *inner,
        other => Expr::not(other),
    }
}

// `is_and` selects the identity (true) and absorbing (false) constants.
fn fold_nary(children: impl Iterator<Item = Expr>, is_and: bool) -> Expr {
    let mut kept = Vec::new();
    for c in children {
        match c {
            Expr::Const(b) if b == is_and => {}
            Expr::Const(_) => return Expr::Const(!is_and),
            other => kept.push(other),
        }
    }
    if is_and {
        Expr::and(kept)
    } else {
        Expr::or(kept)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expr;

    fn e(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    fn halves(expr: &Expr) -> ProbAssignment {
        let vars = expr.free_vars();
        ProbAssignment::uniform(vars.iter().map(String::as_str), Prob::half())
    }

    #[test]
    fn single_variable() {
        let p = ProbAssignment::new().with("x", Prob::approx(0.3));
        assert_eq!(eval_enumerate(&e("x"), &p).unwrap().to_f64(), 0.3);
        assert_eq!(eval_shannon(&e("x"), &p).unwrap().to_f64(), 0.3);
    }

    #[test]
    fn tautology() {
        let p = ProbAssignment::new().with("x", Prob::approx(0.3));
        let v = eval_enumerate(&e("x | !x"), &p).unwrap();
        assert!((v.to_f64() - 1.0).abs() < 1e-15);
        let v = eval_shannon(&e("x | !x"), &p).unwrap();
        assert!((v.to_f64() - 1.0).abs() < 1e-15);
        let exact = ProbAssignment::new().with("x", Prob::ratio(3, 10));
        assert_eq!(eval_enumerate(&e("x | !x"), &exact).unwrap(), Prob::one());
    }

    #[test]
    fn example_dnf_is_one_half() {
        let phi = e("x1&x3 | x1&x4 | x2&x4");
        let p = halves(&phi);
        let a = eval_enumerate(&phi, &p).unwrap();
        let b = eval_shannon(&phi, &p).unwrap();
        assert!(a.is_exact() && b.is_exact());
        assert_eq!(a, Prob::half());
        assert_eq!(b, Prob::half());
    }

    #[test]
    fn constant_false() {
        let p = ProbAssignment::new();
        assert_eq!(eval_shannon(&Expr::Const(false), &p).unwrap(), Prob::zero());
        assert_eq!(eval_enumerate(&Expr::Const(true), &p).unwrap(), Prob::one());
    }

    #[test]
    fn conjunctive_with_identical_events() {
        let phi = e("(x | y) & (x | y)");
        let p = halves(&phi);
        assert_eq!(eval_shannon(&phi, &p).unwrap(), Prob::ratio(3, 4));
        assert_eq!(eval_enumerate(&phi, &p).unwrap(), Prob::ratio(3, 4));
    }

    #[test]
    fn missing_probability() {
        let p = ProbAssignment::new().with("x", Prob::half());
        assert_eq!(
            eval_enumerate(&e("x & y"), &p),
            Err(Error::MissingProbability("y".into()))
        );
        assert_eq!(
            eval_shannon(&e("x & y"), &p),
            Err(Error::MissingProbability("y".into()))
        );
    }

    #[test]
    fn too_many_variables() {
        let big = Expr::or((0..21).map(|i| Expr::var(format!("v{i}"))));
        let p = halves(&big);
        assert_eq!(
            eval_enumerate(&big, &p),
            Err(Error::TooManyVariables { count: 21, cap: 20 })
        );
        // Shannon handles it through independent components.
        let v = eval_shannon(&big, &p).unwrap();
        assert_eq!(v, Prob::one() - Prob::ratio(1, 1 << 21));
    }

    #[test]
    fn shannon_cap() {
        let big = Expr::and((0..65).map(|i| Expr::var(format!("v{i}"))));
        let p = halves(&big);
        assert!(matches!(
            eval_shannon(&big, &p),
            Err(Error::TooManyVariables { count: 65, cap: 64 })
        ));
    }

    #[test]
    fn condition_folds_constants() {
        assert_eq!(condition(&e("x & y | z"), "x", false), e("z"));
        assert_eq!(condition(&e("x & y | z"), "x", true), e("y | z"));
        assert_eq!(condition(&e("!(x | y)"), "x", true), Expr::Const(false));
    }

    #[test]
    fn f64_enumeration_matches() {
        let phi = e("a&b | !a&c");
        let idx: BTreeMap<&str, usize> = [("a", 0), ("b", 1), ("c", 2)].into_iter().collect();
        let node = Node::compile(&phi, &idx);
        let v = enumerate_f64(&node, &[0.3, 0.6, 0.2]);
        assert!((v - (0.3 * 0.6 + 0.7 * 0.2)).abs() < 1e-15);
    }
}
