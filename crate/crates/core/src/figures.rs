//! Closed forms for `xA ∨ xB` and `(x∨A)(x∨B)` with `P[A] = P[B] = q`, and a
//! sweep over the correlation of `A` and `B` checked against enumeration.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::bounds::{assign_symmetric, Direction};
use crate::dissociation::TemplateKind;
use crate::error::{Error, Result};
use crate::eval::eval_enumerate;
use crate::events::{correlated_pair, CorrelatedPair};
use crate::expr::Expr;
use crate::prob::{Prob, APPROX_TOL};

pub const CSV_HEADER: &str = "p,q,rho,pab,exact_disj,upper_disj,lower_disj,exact_conj,upper_conj,lower_conj";

fn check_marginal(q: &Prob) -> Result<()> {
    if q.to_f64() <= 0.0 || q.to_f64() >= 1.0 || q.is_zero() || q.is_one() {
        return Err(Error::MarginalOutOfRange(q.to_string()));
    }
    Ok(())
}

/// Smallest feasible correlation of two events with marginal `q`:
/// `max(−q/(1−q), −(1−q)/q)`.
pub fn rho_min(q: &Prob) -> Result<Prob> {
    check_marginal(q)?;
    let co = q.complement();
    let a = -(q / &co);
    let b = -(&co / q);
    Ok(a.max(b))
}

/// `P[AB] = ρ·(q − q²) + q²`.
pub fn pab_from_rho(rho: &Prob, q: &Prob) -> Result<Prob> {
    let low = rho_min(q)?;
    if !rho.ge_tol(&low, 1e-12) || !rho.le_tol(&Prob::one(), 1e-12) {
        return Err(Error::RhoOutOfRange {
            q: q.to_string(),
            rho: rho.to_string(),
            min: low.to_string(),
        });
    }
    let q2 = q * q;
    Ok(rho * (q - &q2) + q2)
}

/// `(P[xA ∨ xB], P[x1A ∨ x2B])` with `P[x] = p` and `P[x1] = P[x2] = p_i`.
pub fn closed_form_disjunctive(p: &Prob, p_i: &Prob, q: &Prob, pab: &Prob) -> (Prob, Prob) {
    let two = Prob::ratio(2, 1);
    let exact = &two * p * q - p * pab;
    let dissociated = two * p_i * q - p_i * p_i * pab;
    (exact, dissociated)
}

/// `(P[(x∨A)(x∨B)], P[(x1∨A)(x2∨B)])`.
///
/// Conditioning on `(x1, x2)` gives `p_i² + 2p_i(1−p_i)q + (1−p_i)²·P[AB]`.
pub fn closed_form_conjunctive(p: &Prob, p_i: &Prob, q: &Prob, pab: &Prob) -> (Prob, Prob) {
    let exact = p + p.complement() * pab;
    let co = p_i.complement();
    let dissociated = p_i * p_i + Prob::ratio(2, 1) * p_i * &co * q + &co * &co * pab;
    (exact, dissociated)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub q: f64,
    pub rho: f64,
    pub pab: f64,
    pub exact_disj: f64,
    pub upper_disj: f64,
    pub lower_disj: f64,
    pub exact_conj: f64,
    pub upper_conj: f64,
    pub lower_conj: f64,
}

impl SweepRow {
    fn values(&self) -> [f64; 10] {
        [
            self.p,
            self.q,
            self.rho,
            self.pab,
            self.exact_disj,
            self.upper_disj,
            self.lower_disj,
            self.exact_conj,
            self.upper_conj,
            self.lower_conj,
        ]
    }

    /// `lower ≤ exact ≤ upper` for both expressions, within `tol`.
    pub fn is_ordered(&self, tol: f64) -> bool {
        self.lower_disj <= self.exact_disj + tol
            && self.exact_disj <= self.upper_disj + tol
            && self.lower_conj <= self.exact_conj + tol
            && self.exact_conj <= self.upper_conj + tol
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    /// Largest |closed form − enumeration| over all rows and columns.
    pub max_discrepancy: f64,
}

/// `steps` evenly spaced correlations from `ρ_min(q)` to 1.
pub fn rho_grid(q: &Prob, steps: usize) -> Result<Vec<Prob>> {
    assert!(steps >= 2, "need at least two steps");
    let low = rho_min(q)?;
    let span = Prob::one() - &low;
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                Prob::one()
            } else {
                &low + &span * Prob::ratio(i as i64, (steps - 1) as i64)
            }
        })
        .collect())
}

/// Computes every `(p, q, ρ)` row both by closed form and by enumeration over
/// a realizing event pair; fails if the two disagree by more than `1e-9`.
/// Rows come out in `(p, q, ρ)` order.
pub fn sweep_correlation(p_values: &[Prob], q_values: &[Prob], rho_steps: usize) -> Result<Sweep> {
    if rho_steps < 2 {
        return Err(Error::InvalidPlan(format!("rho_steps must be at least 2, got {rho_steps}")));
    }
    for v in p_values {
        if !v.in_unit_interval() || v.is_zero() || v.is_one() {
            return Err(Error::MarginalOutOfRange(v.to_string()));
        }
    }
    // Event pairs depend on (q, ρ) only.
    let pairs: Vec<Vec<CorrelatedPair>> = q_values
        .par_iter()
        .map(|q| {
            rho_grid(q, rho_steps)?
                .par_iter()
                .map(|rho| correlated_pair(q, rho))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(&Prob, &CorrelatedPair)> = p_values
        .iter()
        .flat_map(|p| pairs.iter().flatten().map(move |pair| (p, pair)))
        .collect();
    let computed: Vec<(SweepRow, f64)> = jobs
        .par_iter()
        .map(|(p, pair)| sweep_row(p, pair))
        .collect::<Result<Vec<_>>>()?;
    let max_discrepancy = computed.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    Ok(Sweep {
        rows: computed.into_iter().map(|(r, _)| r).collect(),
        max_discrepancy,
    })
}

fn sweep_row(p: &Prob, pair: &CorrelatedPair) -> Result<(SweepRow, f64)> {
    let q = &pair.q;
    let pab = pab_from_rho(&pair.rho, q)?;
    let sym = |kind, dir| assign_symmetric(kind, dir, p, 2).remove(0);
    let up_d = sym(TemplateKind::Disjunctive, Direction::Upper);
    let lo_d = sym(TemplateKind::Disjunctive, Direction::Lower);
    let up_c = sym(TemplateKind::Conjunctive, Direction::Upper);
    let lo_c = sym(TemplateKind::Conjunctive, Direction::Lower);

    let (exact_d, upper_d) = closed_form_disjunctive(p, &up_d, q, &pab);
    let (_, lower_d) = closed_form_disjunctive(p, &lo_d, q, &pab);
    let (exact_c, upper_c) = closed_form_conjunctive(p, &up_c, q, &pab);
    let (_, lower_c) = closed_form_conjunctive(p, &lo_c, q, &pab);
    let closed = [&pab, &exact_d, &upper_d, &lower_d, &exact_c, &upper_c, &lower_c].map(Prob::to_f64);

    // The same quantities by enumeration over x, x1, x2 and the pair's y's.
    let x = || Expr::var("x");
    let (x1, x2) = (Expr::var("x#1"), Expr::var("x#2"));
    let (a, b) = (pair.a.clone(), pair.b.clone());
    let and = |l: Expr, r: Expr| Expr::And(vec![l, r]);
    let or = |l: Expr, r: Expr| Expr::Or(vec![l, r]);
    let phi_d = or(and(x(), a.clone()), and(x(), b.clone()));
    let phi_d2 = or(and(x1.clone(), a.clone()), and(x2.clone(), b.clone()));
    let phi_c = and(or(x(), a.clone()), or(x(), b.clone()));
    let phi_c2 = and(or(x1, a.clone()), or(x2, b.clone()));
    let base = pair.assignment();
    let eval = |e: &Expr, copies: Option<&Prob>| -> Result<f64> {
        let mut probs = base.clone();
        probs.set("x", p.clone())?;
        if let Some(v) = copies {
            probs.set("x#1", v.clone())?;
            probs.set("x#2", v.clone())?;
        }
        Ok(eval_enumerate(e, &probs)?.to_f64())
    };
    let enumerated = [
        eval_enumerate(&and(a.clone(), b.clone()), &base)?.to_f64(),
        eval(&phi_d, None)?,
        eval(&phi_d2, Some(&up_d))?,
        eval(&phi_d2, Some(&lo_d))?,
        eval(&phi_c, None)?,
        eval(&phi_c2, Some(&up_c))?,
        eval(&phi_c2, Some(&lo_c))?,
    ];
    let discrepancy = closed
        .iter()
        .zip(&enumerated)
        .map(|(c, e)| (c - e).abs())
        .fold(0.0, f64::max);
    if discrepancy > APPROX_TOL {
        return Err(Error::OracleMismatch {
            discrepancy,
            context: format!("p={p}, q={q}, rho={}", pair.rho),
        });
    }
    let [pab, exact_disj, upper_disj, lower_disj, exact_conj, upper_conj, lower_conj] = enumerated;
    Ok((
        SweepRow {
            p: p.to_f64(),
            q: q.to_f64(),
            rho: pair.rho.to_f64(),
            pab,
            exact_disj,
            upper_disj,
            lower_disj,
            exact_conj,
            upper_conj,
            lower_conj,
        },
        discrepancy,
    ))
}

/// Formats like C's `%.12g`.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    const DIGITS: i32 = 12;
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim(&format!("{v:.decimals$}"))
    }
}

/// Writes the header and one line per row, LF-terminated.
pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        let fields: Vec<String> = row.values().iter().map(|v| format_sig12(*v)).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pab_examples() {
        let q = Prob::ratio(1, 3);
        assert_eq!(pab_from_rho(&Prob::one(), &q).unwrap(), q);
        assert_eq!(pab_from_rho(&Prob::zero(), &q).unwrap(), Prob::ratio(1, 9));
        assert_eq!(pab_from_rho(&Prob::ratio(-1, 3), &Prob::ratio(1, 4)).unwrap(), Prob::zero());
        assert!(matches!(
            pab_from_rho(&Prob::ratio(-1, 2), &Prob::ratio(1, 4)),
            Err(Error::RhoOutOfRange { .. })
        ));
    }

    #[test]
    fn rho_min_examples() {
        assert_eq!(rho_min(&Prob::half()).unwrap(), Prob::ratio(-1, 1));
        assert_eq!(rho_min(&Prob::ratio(1, 4)).unwrap(), Prob::ratio(-1, 3));
        assert_eq!(rho_min(&Prob::ratio(3, 4)).unwrap(), Prob::ratio(-1, 3));
        assert!(matches!(rho_min(&Prob::zero()), Err(Error::MarginalOutOfRange(_))));
        assert!(matches!(rho_min(&Prob::one()), Err(Error::MarginalOutOfRange(_))));
    }

    #[test]
    fn disjunctive_closed_form() {
        let h = Prob::half();
        let (exact, diss) = closed_form_disjunctive(&h, &h, &h, &Prob::ratio(1, 4));
        assert_eq!(exact, Prob::ratio(3, 8));
        assert_eq!(diss, Prob::ratio(7, 16));
        let (p, q) = (Prob::ratio(2, 7), Prob::ratio(3, 5));
        let (exact, diss) = closed_form_disjunctive(&p, &p, &q, &q);
        assert_eq!(exact, &p * &q);
        assert_eq!(diss, Prob::ratio(72, 245));
        let z = Prob::zero();
        assert_eq!(closed_form_disjunctive(&z, &z, &q, &q), (Prob::zero(), Prob::zero()));
    }

    #[test]
    fn conjunctive_closed_form() {
        let h = Prob::half();
        let (exact, diss) = closed_form_conjunctive(&h, &h.sqrt(), &h, &h);
        assert_eq!(exact, Prob::ratio(3, 4));
        assert!((diss.to_f64() - 0.75).abs() < 1e-15);
        let (exact, diss) = closed_form_conjunctive(&h, &h, &h, &Prob::ratio(1, 4));
        assert_eq!(exact, Prob::ratio(5, 8));
        assert_eq!(diss, Prob::ratio(9, 16));
        let one = Prob::one();
        assert_eq!(closed_form_conjunctive(&one, &one, &h, &h), (Prob::one(), Prob::one()));
    }

    #[test]
    fn small_sweep() {
        let s = sweep_correlation(&[Prob::approx(0.5)], &[Prob::approx(0.5)], 3).unwrap();
        assert_eq!(s.rows.len(), 3);
        let rhos: Vec<f64> = s.rows.iter().map(|r| r.rho).collect();
        assert_eq!(rhos, vec![-1.0, 0.0, 1.0]);
        let last = &s.rows[2];
        assert!((last.upper_conj - last.exact_conj).abs() < 1e-9);
        assert!((last.lower_disj - last.exact_disj).abs() < 1e-9);
        let first = &s.rows[0];
        assert!((first.upper_disj - first.exact_disj).abs() < 1e-9);
        assert!(s.rows.iter().all(|r| r.is_ordered(1e-9)));
        assert!(s.max_discrepancy <= 1e-9);
    }

    #[test]
    fn empty_sweep() {
        let s = sweep_correlation(&[Prob::approx(0.5)], &[], 5).unwrap();
        assert!(s.rows.is_empty());
    }

    #[test]
    fn sig12_formatting() {
        assert_eq!(format_sig12(0.5), "0.5");
        assert_eq!(format_sig12(-1.0), "-1");
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(0.29289321881345254), "0.292893218813");
        assert_eq!(format_sig12(1e-7), "1e-07");
        assert_eq!(format_sig12(-0.0416666666666667), "-0.0416666666667");
    }

    #[test]
    fn csv_layout() {
        let s = sweep_correlation(&[Prob::approx(0.5)], &[Prob::approx(0.5)], 2).unwrap();
        let mut buf = Vec::new();
        write_csv(&s.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0.5,0.5,-1,0,"));
        assert!(!text.contains('\r'));
    }
}
