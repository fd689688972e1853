//! Boolean expression trees over named variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A Boolean expression.
///
/// `And` and `Or` always hold at least two children and `Not` exactly one.
/// Child order is significant: it defines structural equality and the
/// left-to-right occurrence order used by dissociation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var(String),
    Const(bool),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        let name = name.into();
        assert!(!name.is_empty(), "variable names must be nonempty");
        Expr::Var(name)
    }

    pub fn constant(value: bool) -> Expr {
        Expr::Const(value)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(child: Expr) -> Expr {
        Expr::Not(Box::new(child))
    }

    /// Conjunction of `children`. Zero children give `true`, one child is
    /// returned as is; nested conjunctions are kept as written.
    pub fn and(children: impl IntoIterator<Item = Expr>) -> Expr {
        let mut children: Vec<Expr> = children.into_iter().collect();
        match children.len() {
            0 => Expr::Const(true),
            1 => children.pop().unwrap(),
            _ => Expr::And(children),
        }
    }

    /// Disjunction of `children`. Zero children give `false`.
    pub fn or(children: impl IntoIterator<Item = Expr>) -> Expr {
        let mut children: Vec<Expr> = children.into_iter().collect();
        match children.len() {
            0 => Expr::Const(false),
            1 => children.pop().unwrap(),
            _ => Expr::Or(children),
        }
    }

    pub fn children(&self) -> &[Expr] {
        match self {
            Expr::And(cs) | Expr::Or(cs) => cs,
            Expr::Not(c) => std::slice::from_ref(c),
            Expr::Var(_) | Expr::Const(_) => &[],
        }
    }

    /// Checks the arity invariants over the whole tree.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Expr::Var(n) => !n.is_empty(),
            Expr::Const(_) => true,
            Expr::Not(c) => c.is_well_formed(),
            Expr::And(cs) | Expr::Or(cs) => cs.len() >= 2 && cs.iter().all(Expr::is_well_formed),
        }
    }

    /// Names of all variables appearing in the tree.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(n) => {
                out.insert(n.clone());
            }
            Expr::Const(_) => {}
            _ => self.children().iter().for_each(|c| c.collect_vars(out)),
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Expr::Var(n) => n == name,
            Expr::Const(_) => false,
            _ => self.children().iter().any(|c| c.contains_var(name)),
        }
    }

    /// Counts occurrences of `name`, split into (positive, negated) by the
    /// parity of enclosing `Not` nodes.
    pub fn occurrences(&self, name: &str) -> (usize, usize) {
        fn walk(e: &Expr, name: &str, negated: bool, acc: &mut (usize, usize)) {
            match e {
                Expr::Var(n) if n == name => {
                    if negated {
                        acc.1 += 1
                    } else {
                        acc.0 += 1
                    }
                }
                Expr::Var(_) | Expr::Const(_) => {}
                Expr::Not(c) => walk(c, name, !negated, acc),
                Expr::And(cs) | Expr::Or(cs) => cs.iter().for_each(|c| walk(c, name, negated, acc)),
            }
        }
        let mut acc = (0, 0);
        walk(self, name, false, &mut acc);
        acc
    }

    /// True if `name` appears anywhere below a `Not`.
    pub fn occurs_under_not(&self, name: &str) -> bool {
        match self {
            Expr::Not(c) => c.contains_var(name),
            Expr::Var(_) | Expr::Const(_) => false,
            Expr::And(cs) | Expr::Or(cs) => cs.iter().any(|c| c.occurs_under_not(name)),
        }
    }

    /// True if the tree contains no `Not` node.
    pub fn is_negation_free(&self) -> bool {
        match self {
            Expr::Not(_) => false,
            Expr::Var(_) | Expr::Const(_) => true,
            Expr::And(cs) | Expr::Or(cs) => cs.iter().all(Expr::is_negation_free),
        }
    }

    /// True if every `Not` sits directly on a variable.
    pub fn is_nnf(&self) -> bool {
        match self {
            Expr::Not(c) => matches!(**c, Expr::Var(_)),
            Expr::Var(_) | Expr::Const(_) => true,
            Expr::And(cs) | Expr::Or(cs) => cs.iter().all(Expr::is_nnf),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Expr::size).sum::<usize>()
    }
}

/// Negation of `expr` pushed down to the literals with De Morgan's laws.
pub fn complement(expr: &Expr) -> Expr {
    nnf(expr, true)
}

/// Negation-normal form of `expr` (negated when `negate` is set).
pub fn nnf(expr: &Expr, negate: bool) -> Expr {
    match expr {
        Expr::Var(_) if negate => Expr::not(expr.clone()),
        Expr::Var(_) => expr.clone(),
        Expr::Const(b) => Expr::Const(*b ^ negate),
        Expr::Not(c) => nnf(c, !negate),
        Expr::And(cs) => {
            let cs = cs.iter().map(|c| nnf(c, negate)).collect();
            if negate {
                Expr::Or(cs)
            } else {
                Expr::And(cs)
            }
        }
        Expr::Or(cs) => {
            let cs = cs.iter().map(|c| nnf(c, negate)).collect();
            if negate {
                Expr::And(cs)
            } else {
                Expr::Or(cs)
            }
        }
    }
}

/// Renames every variable found in `theta`; the tree shape is unchanged.
pub fn substitute(expr: &Expr, theta: &BTreeMap<String, String>) -> Expr {
    match expr {
        Expr::Var(n) => match theta.get(n) {
            Some(m) => Expr::Var(m.clone()),
            None => expr.clone(),
        },
        Expr::Const(_) => expr.clone(),
        Expr::Not(c) => Expr::not(substitute(c, theta)),
        Expr::And(cs) => Expr::And(cs.iter().map(|c| substitute(c, theta)).collect()),
        Expr::Or(cs) => Expr::Or(cs.iter().map(|c| substitute(c, theta)).collect()),
    }
}

/// Prints with raw variable names (generated names keep their `#`). Use
/// [`crate::parser::format_expr`] for text that must re-parse.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::render(self, false))
    }
}
