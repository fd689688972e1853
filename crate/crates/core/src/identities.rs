//! Residuals of the inclusion-exclusion and event-splitting identities for a
//! pair of events.

use crate::error::Result;
use crate::eval::eval_shannon;
use crate::expr::Expr;
use crate::prob::{Prob, ProbAssignment};

/// Float tolerance for identity residuals.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub p_a: Prob,
    pub p_b: Prob,
    pub p_and: Prob,
    pub p_or: Prob,
    /// `P[A∨B] − (P[A] + P[B] − P[AB])`
    pub inclusion_exclusion: Prob,
    /// `P[AB] − (P[A] + P[B] − P[A∨B])`
    pub conjunctive_inclusion_exclusion: Prob,
    /// `P[A∨B] − (P[A¬B] + P[B])`
    pub disjunctive_splitting: Prob,
    /// `P[AB] − (P[A∨¬B] + P[B] − 1)`
    pub conjunctive_splitting: Prob,
}

impl IdentityReport {
    pub fn residuals(&self) -> [&Prob; 4] {
        [
            &self.inclusion_exclusion,
            &self.conjunctive_inclusion_exclusion,
            &self.disjunctive_splitting,
            &self.conjunctive_splitting,
        ]
    }

    /// Exactly zero for rationals, within [`IDENTITY_TOL`] for floats.
    pub fn holds(&self) -> bool {
        self.residuals()
            .iter()
            .all(|r| r.eq_tol(&Prob::zero(), IDENTITY_TOL))
    }
}

pub fn verify_identities(a: &Expr, b: &Expr, probs: &ProbAssignment) -> Result<IdentityReport> {
    let not_b = Expr::not(b.clone());
    let p = |e: &Expr| eval_shannon(e, probs);
    let p_a = p(a)?;
    let p_b = p(b)?;
    let p_and = p(&Expr::And(vec![a.clone(), b.clone()]))?;
    let p_or = p(&Expr::Or(vec![a.clone(), b.clone()]))?;
    let p_a_not_b = p(&Expr::And(vec![a.clone(), not_b.clone()]))?;
    let p_a_or_not_b = p(&Expr::Or(vec![a.clone(), not_b]))?;

    let inclusion_exclusion = &p_or - (&p_a + &p_b - &p_and);
    let conjunctive_inclusion_exclusion = &p_and - (&p_a + &p_b - &p_or);
    let disjunctive_splitting = &p_or - (&p_a_not_b + &p_b);
    let conjunctive_splitting = &p_and - (p_a_or_not_b + &p_b - Prob::one());
    Ok(IdentityReport {
        p_a,
        p_b,
        p_and,
        p_or,
        inclusion_exclusion,
        conjunctive_inclusion_exclusion,
        disjunctive_splitting,
        conjunctive_splitting,
    })
}
