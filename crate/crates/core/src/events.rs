//! Complex events built from independent Boolean variables: disjoint
//! multi-valued variables and pairs of events with a prescribed marginal and
//! correlation.
//!
//! Generated variables use the reserved prefix `_y`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::eval::{enumerate_f64, eval_enumerate, eval_shannon, Node};
use crate::expr::Expr;
use crate::figures::rho_min;
use crate::prob::{Prob, ProbAssignment};

pub const RESERVED_PREFIX: &str = "_y";

/// Tolerance on the achieved marginal and correlation of a correlated pair.
pub const PAIR_TOL: f64 = 1e-9;
const BISECTION_TOL: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 80;

fn y_name(i: usize) -> String {
    format!("{RESERVED_PREFIX}{i}")
}

/// A multi-valued variable taking value `values[i]` with probability `probs[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjointDeclaration {
    pub values: Vec<String>,
    pub probs: Vec<BigRational>,
}

impl DisjointDeclaration {
    pub fn new(values: Vec<String>, probs: Vec<BigRational>) -> Self {
        assert_eq!(values.len(), probs.len(), "one probability per value");
        DisjointDeclaration { values, probs }
    }

    /// Labels the values `v1..vk`.
    pub fn unlabeled(probs: Vec<BigRational>) -> Self {
        let values = (1..=probs.len()).map(|i| format!("v{i}")).collect();
        DisjointDeclaration { values, probs }
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDisjoint {
    /// Names `_y1.._y{k-1}`.
    pub y_names: Vec<String>,
    pub y_probs: Vec<Prob>,
    /// `events[i]` is true exactly when the variable takes `values[i]`.
    pub events: Vec<Expr>,
}

impl EncodedDisjoint {
    pub fn assignment(&self) -> ProbAssignment {
        self.y_names
            .iter()
            .cloned()
            .zip(self.y_probs.iter().cloned())
            .collect()
    }
}

/// Encodes a disjoint declaration with `k − 1` independent Booleans.
///
/// Events follow the chain `y1`, `¬y1 y2`, …, `¬y1…¬y_{k−1}`; each `y_i`
/// gets `p_i / (1 − Σ_{j<i} p_j)`, or 0 once the remaining mass is 0.
pub fn encode_disjoint(decl: &DisjointDeclaration) -> Result<EncodedDisjoint> {
    if decl.probs.is_empty() {
        return Err(Error::ProbSumNotOne("0 (no values)".into()));
    }
    if let Some((i, p)) = decl.probs.iter().enumerate().find(|(_, p)| p.is_negative()) {
        return Err(Error::OutOfRange {
            name: decl.values.get(i).cloned().unwrap_or_default(),
            value: p.to_string(),
        });
    }
    let sum: BigRational = decl.probs.iter().sum();
    if !sum.is_one() {
        return Err(Error::ProbSumNotOne(sum.to_string()));
    }
    let k = decl.k();
    let y_names: Vec<String> = (1..k).map(y_name).collect();
    let mut y_probs = Vec::with_capacity(k - 1);
    let mut remaining = BigRational::one();
    for p in &decl.probs[..k - 1] {
        y_probs.push(if remaining.is_zero() {
            Prob::zero()
        } else {
            Prob::Exact(p / &remaining)
        });
        remaining -= p;
    }
    let events = (0..k)
        .map(|i| {
            let mut lits: Vec<Expr> = y_names[..i.min(k - 1)]
                .iter()
                .map(|n| Expr::not(Expr::var(n.clone())))
                .collect();
            if i < k - 1 {
                lits.push(Expr::var(y_names[i].clone()));
            }
            Expr::and(lits)
        })
        .collect();
    Ok(EncodedDisjoint {
        y_names,
        y_probs,
        events,
    })
}

/// Two events `A = y1y2 ∨ y3 ∨ y4`, `B = ¬y1y2 ∨ y3 ∨ y5` realizing a
/// marginal `q` and a correlation `rho`.
#[derive(Debug, Clone)]
pub struct CorrelatedPair {
    pub q: Prob,
    pub rho: Prob,
    pub y_probs: [Prob; 5],
    pub a: Expr,
    pub b: Expr,
    pub achieved_a: Prob,
    pub achieved_b: Prob,
    pub achieved_ab: Prob,
    pub achieved_rho: Prob,
}

impl CorrelatedPair {
    pub fn assignment(&self) -> ProbAssignment {
        pair_assignment(&self.y_probs)
    }
}

fn pair_assignment(y: &[Prob; 5]) -> ProbAssignment {
    y.iter()
        .enumerate()
        .map(|(i, p)| (y_name(i + 1), p.clone()))
        .collect()
}

/// The fixed expressions `(A, B)` over `_y1.._y5`.
pub fn pair_events() -> (Expr, Expr) {
    let y = |i: usize| Expr::var(y_name(i));
    let a = Expr::Or(vec![Expr::And(vec![y(1), y(2)]), y(3), y(4)]);
    let b = Expr::Or(vec![Expr::And(vec![Expr::not(y(1)), y(2)]), y(3), y(5)]);
    (a, b)
}

/// Builds a correlated pair. The anchors `rho = 1`, `rho = 0` and
/// `rho = ρ_min(q)` use closed-form probabilities; other correlations are
/// found by bisection within the family `(1/2, u, s, t, t)`.
pub fn correlated_pair(q: &Prob, rho: &Prob) -> Result<CorrelatedPair> {
    let low = rho_min(q)?;
    if !rho.ge_tol(&low, BISECTION_TOL) || !rho.le_tol(&Prob::one(), BISECTION_TOL) {
        return Err(Error::RhoOutOfRange {
            q: q.to_string(),
            rho: rho.to_string(),
            min: low.to_string(),
        });
    }
    let zero = Prob::zero;
    let half = Prob::half();
    let y: [Prob; 5] = if rho.eq_tol(&Prob::one(), BISECTION_TOL) {
        [zero(), zero(), q.clone(), zero(), zero()]
    } else if rho.eq_tol(&zero(), BISECTION_TOL) {
        [zero(), zero(), zero(), q.clone(), q.clone()]
    } else if rho.eq_tol(&low, BISECTION_TOL) {
        if *q <= half {
            [half, q * Prob::ratio(2, 1), zero(), zero(), zero()]
        } else {
            let t = q * Prob::ratio(2, 1) - Prob::one();
            [half, Prob::one(), zero(), t.clone(), t]
        }
    } else {
        bisect_family(q.to_f64(), rho.to_f64(), low.to_f64())?
    };

    let (a, b) = pair_events();
    let probs = pair_assignment(&y);
    let achieved_a = eval_enumerate(&a, &probs)?;
    let achieved_b = eval_enumerate(&b, &probs)?;
    let achieved_ab = eval_enumerate(&Expr::And(vec![a.clone(), b.clone()]), &probs)?;
    let achieved_rho = correlation_from_parts(&achieved_a, &achieved_b, &achieved_ab)?;
    let close = |x: &Prob, target: &Prob| x.eq_tol(target, PAIR_TOL);
    if !close(&achieved_a, q) || !close(&achieved_b, q) || !close(&achieved_rho, rho) {
        return Err(Error::NoConvergence(format!(
            "target q={q}, rho={rho}; achieved P[A]={achieved_a}, P[B]={achieved_b}, rho={achieved_rho}"
        )));
    }
    Ok(CorrelatedPair {
        q: q.clone(),
        rho: rho.clone(),
        y_probs: y,
        a,
        b,
        achieved_a,
        achieved_b,
        achieved_ab,
        achieved_rho,
    })
}

// Positive correlations blend s = λq (with u = 0); negative ones blend
// u = λ·min(2q, 1) (with s = 0). In both cases t keeps P[A] = q.
fn family_point(q: f64, negative: bool, lambda: f64) -> [f64; 5] {
    if negative {
        let u = lambda * (2.0 * q).min(1.0);
        let t = 1.0 - (1.0 - q) / (1.0 - u / 2.0);
        [0.5, u, 0.0, t.max(0.0), t.max(0.0)]
    } else {
        let s = lambda * q;
        let t = 1.0 - (1.0 - q) / (1.0 - s);
        [0.5, 0.0, s, t.max(0.0), t.max(0.0)]
    }
}

fn bisect_family(q: f64, rho: f64, low: f64) -> Result<[Prob; 5]> {
    let (a, b) = pair_events();
    let index: BTreeMap<&str, usize> = [("_y1", 0), ("_y2", 1), ("_y3", 2), ("_y4", 3), ("_y5", 4)]
        .into_iter()
        .collect();
    let node_a = Node::compile(&a, &index);
    let node_b = Node::compile(&b, &index);
    let node_ab = Node::compile(&Expr::And(vec![a, b]), &index);
    let achieved = |y: &[f64; 5]| {
        let pa = enumerate_f64(&node_a, y);
        let pb = enumerate_f64(&node_b, y);
        let pab = enumerate_f64(&node_ab, y);
        (pab - pa * pb) / ((pa - pa * pa) * (pb - pb * pb)).sqrt()
    };
    let negative = rho < 0.0;
    // rho moves monotonically from 0 (λ = 0) to the branch end (λ = 1).
    let end = if negative { low } else { 1.0 };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = family_point(q, negative, 0.5);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        best = family_point(q, negative, mid);
        let r = achieved(&best);
        if (r - rho).abs() <= BISECTION_TOL {
            break;
        }
        // Past the target when r lies between rho and the branch end.
        if (r - rho) * (end - rho) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(best.map(Prob::approx))
}

/// Correlation of two events: `cov(A,B) / √(var(A)·var(B))`.
///
/// Exact when the probabilities are exact and the variances agree.
pub fn correlation_of(a: &Expr, b: &Expr, probs: &ProbAssignment) -> Result<Prob> {
    let pa = eval_shannon(a, probs)?;
    let pb = eval_shannon(b, probs)?;
    let pab = eval_shannon(&Expr::And(vec![a.clone(), b.clone()]), probs)?;
    correlation_from_parts(&pa, &pb, &pab)
}

fn correlation_from_parts(pa: &Prob, pb: &Prob, pab: &Prob) -> Result<Prob> {
    let var_a = pa - pa * pa;
    let var_b = pb - pb * pb;
    if var_a.to_f64() <= 0.0 || var_a.is_zero() {
        return Err(Error::TrivialEvent("A".into()));
    }
    if var_b.to_f64() <= 0.0 || var_b.is_zero() {
        return Err(Error::TrivialEvent("B".into()));
    }
    let cov = pab - pa * pb;
    if var_a.is_exact() && var_b.is_exact() && var_a == var_b {
        return Ok(cov / var_a);
    }
    let rho = cov.to_f64() / (var_a.to_f64() * var_b.to_f64()).sqrt();
    Ok(Prob::approx(rho.clamp(-1.0, 1.0)))
}
