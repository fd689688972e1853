//! Probability values with a dual numeric backend.
//!
//! A [`Prob`] is either an exact rational or a binary64 number. Arithmetic
//! between two exact values stays exact; as soon as an approximate value is
//! involved the result is approximate.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Tolerance for equality of approximate values.
pub const APPROX_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum Prob {
    Exact(BigRational),
    Approx(f64),
}

impl Prob {
    pub fn zero() -> Self {
        Prob::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Prob::Exact(BigRational::one())
    }

    pub fn half() -> Self {
        Prob::ratio(1, 2)
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        Prob::Exact(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn approx(v: f64) -> Self {
        Prob::Approx(v)
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Prob::one()
        } else {
            Prob::zero()
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Prob::Exact(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Prob::Exact(r) => Some(r),
            Prob::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Prob::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Prob::Approx(v) => *v,
        }
    }

    /// `1 - self`.
    pub fn complement(&self) -> Prob {
        &Prob::one() - self
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Prob::Exact(r) => r.is_zero(),
            Prob::Approx(v) => *v == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Prob::Exact(r) => r.is_one(),
            Prob::Approx(v) => *v == 1.0,
        }
    }

    pub fn abs(&self) -> Prob {
        match self {
            Prob::Exact(r) => Prob::Exact(r.abs()),
            Prob::Approx(v) => Prob::Approx(v.abs()),
        }
    }

    pub fn in_unit_interval(&self) -> bool {
        match self {
            Prob::Exact(r) => !r.is_negative() && *r <= BigRational::one(),
            Prob::Approx(v) => (0.0..=1.0).contains(v),
        }
    }

    /// Integer power, exact when `self` is exact.
    pub fn powi(&self, exp: u32) -> Prob {
        match self {
            Prob::Exact(r) => Prob::Exact(num_traits::pow(r.clone(), exp as usize)),
            Prob::Approx(v) => Prob::Approx(v.powi(exp as i32)),
        }
    }

    /// `n`-th root. Exact only for `n == 1`; otherwise an approximate value.
    pub fn nth_root(&self, n: u32) -> Prob {
        assert!(n >= 1, "root degree must be positive");
        if n == 1 {
            return self.clone();
        }
        Prob::Approx(self.to_f64().powf(1.0 / n as f64))
    }

    pub fn sqrt(&self) -> Prob {
        self.nth_root(2)
    }

    pub fn max(self, other: Prob) -> Prob {
        if self.total_cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Prob) -> Prob {
        if self.total_cmp(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    fn total_cmp(&self, other: &Prob) -> Ordering {
        match (self, other) {
            (Prob::Exact(a), Prob::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }

    /// Equality: exact for two rationals, within `tol` otherwise.
    pub fn eq_tol(&self, other: &Prob, tol: f64) -> bool {
        match (self, other) {
            (Prob::Exact(a), Prob::Exact(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= tol,
        }
    }

    /// `self >= other`, allowing `tol` slack when either side is approximate.
    pub fn ge_tol(&self, other: &Prob, tol: f64) -> bool {
        match (self, other) {
            (Prob::Exact(a), Prob::Exact(b)) => a >= b,
            _ => self.to_f64() >= other.to_f64() - tol,
        }
    }

    /// `self <= other`, allowing `tol` slack when either side is approximate.
    pub fn le_tol(&self, other: &Prob, tol: f64) -> bool {
        other.ge_tol(self, tol)
    }
}

impl PartialEq for Prob {
    fn eq(&self, other: &Self) -> bool {
        self.total_cmp(other) == Ordering::Equal
    }
}

impl PartialOrd for Prob {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl From<f64> for Prob {
    fn from(v: f64) -> Self {
        Prob::Approx(v)
    }
}

impl From<BigRational> for Prob {
    fn from(r: BigRational) -> Self {
        Prob::Exact(r)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Prob> for &Prob {
            type Output = Prob;
            fn $method(self, rhs: &Prob) -> Prob {
                match (self, rhs) {
                    (Prob::Exact(a), Prob::Exact(b)) => Prob::Exact(a $op b),
                    _ => Prob::Approx(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl $trait<Prob> for Prob {
            type Output = Prob;
            fn $method(self, rhs: Prob) -> Prob {
                &self $op &rhs
            }
        }
        impl $trait<&Prob> for Prob {
            type Output = Prob;
            fn $method(self, rhs: &Prob) -> Prob {
                &self $op rhs
            }
        }
        impl $trait<Prob> for &Prob {
            type Output = Prob;
            fn $method(self, rhs: Prob) -> Prob {
                self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for Prob {
    type Output = Prob;
    fn neg(self) -> Prob {
        match self {
            Prob::Exact(r) => Prob::Exact(-r),
            Prob::Approx(v) => Prob::Approx(-v),
        }
    }
}

impl std::iter::Sum for Prob {
    fn sum<I: Iterator<Item = Prob>>(iter: I) -> Prob {
        iter.fold(Prob::zero(), |acc, p| acc + p)
    }
}

impl std::iter::Product for Prob {
    fn product<I: Iterator<Item = Prob>>(iter: I) -> Prob {
        iter.fold(Prob::one(), |acc, p| acc * p)
    }
}

/// Rationals print as `a/b` (or `a` for integers); approximate values use the
/// shortest round-tripping decimal.
impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prob::Exact(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            Prob::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Prob::Approx(v) => write!(f, "{v}"),
        }
    }
}

/// Error payload for [`Prob::from_str`]; the caller attaches location info.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbParseError(pub String);

impl fmt::Display for ProbParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ProbParseError {}

/// Parses `a/b` and bare integers as exact rationals, anything else as a
/// decimal. The range is not checked here.
impl FromStr for Prob {
    type Err = ProbParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ProbParseError("empty value".into()));
        }
        let is_int = |t: &str| {
            let t = t.strip_prefix(['-', '+']).unwrap_or(t);
            !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())
        };
        if let Some((n, d)) = s.split_once('/') {
            let (n, d) = (n.trim(), d.trim());
            if !is_int(n) || !is_int(d) {
                return Err(ProbParseError(format!("malformed rational `{s}`")));
            }
            let n: BigInt = n.parse().map_err(|_| ProbParseError(format!("bad numerator `{n}`")))?;
            let d: BigInt = d.parse().map_err(|_| ProbParseError(format!("bad denominator `{d}`")))?;
            if d.is_zero() {
                return Err(ProbParseError(format!("zero denominator in `{s}`")));
            }
            return Ok(Prob::Exact(BigRational::new(n, d)));
        }
        if is_int(s) {
            let n: BigInt = s.parse().map_err(|_| ProbParseError(format!("bad integer `{s}`")))?;
            return Ok(Prob::Exact(BigRational::from_integer(n)));
        }
        let v: f64 = s
            .parse()
            .map_err(|_| ProbParseError(format!("malformed number `{s}`")))?;
        if !v.is_finite() {
            return Err(ProbParseError(format!("non-finite number `{s}`")));
        }
        Ok(Prob::Approx(v))
    }
}

/// Map from variable name to probability.
///
/// The assignment is exact iff every value is an exact rational.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProbAssignment {
    values: BTreeMap<String, Prob>,
}

impl ProbAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces a value, rejecting anything outside `[0, 1]`.
    pub fn set(&mut self, name: impl Into<String>, value: Prob) -> Result<()> {
        let name = name.into();
        if !value.in_unit_interval() {
            return Err(Error::OutOfRange {
                name,
                value: value.to_string(),
            });
        }
        self.values.insert(name, value);
        Ok(())
    }

    /// Builder-style [`set`](Self::set); panics on out-of-range values.
    pub fn with(mut self, name: impl Into<String>, value: Prob) -> Self {
        self.set(name, value).expect("probability out of range");
        self
    }

    /// Assigns `value` to every name in `names`.
    pub fn uniform<'a>(names: impl IntoIterator<Item = &'a str>, value: Prob) -> Self {
        let mut out = Self::new();
        for n in names {
            out.set(n, value.clone()).expect("probability out of range");
        }
        out
    }

    pub fn get(&self, name: &str) -> Option<&Prob> {
        self.values.get(name)
    }

    pub fn require(&self, name: &str) -> Result<&Prob> {
        self.get(name)
            .ok_or_else(|| Error::MissingProbability(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn is_exact(&self) -> bool {
        self.values.values().all(Prob::is_exact)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Prob)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    /// Tolerance to use when comparing results computed from this assignment.
    pub fn tolerance(&self) -> f64 {
        if self.is_exact() {
            0.0
        } else {
            APPROX_TOL
        }
    }

    /// Approximate equality of two assignments (exact when both are exact).
    pub fn eq_tol(&self, other: &ProbAssignment) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(other.values.iter())
                .all(|((ka, va), (kb, vb))| ka == kb && va.eq_tol(vb, APPROX_TOL))
    }
}

impl FromIterator<(String, Prob)> for ProbAssignment {
    fn from_iter<I: IntoIterator<Item = (String, Prob)>>(iter: I) -> Self {
        ProbAssignment {
            values: iter.into_iter().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Prob::ratio(1, 3);
        let b = Prob::ratio(1, 6);
        let s = &a + &b;
        assert!(s.is_exact());
        assert_eq!(s, Prob::half());
        assert_eq!(s.to_string(), "1/2");
    }

    #[test]
    fn mixing_demotes_to_approx() {
        let s = Prob::half() + Prob::approx(0.25);
        assert!(!s.is_exact());
        assert_eq!(s.to_f64(), 0.75);
    }

    #[test]
    fn parse_forms() {
        assert_eq!("1/4".parse::<Prob>().unwrap(), Prob::ratio(1, 4));
        assert!("1/4".parse::<Prob>().unwrap().is_exact());
        assert!("1".parse::<Prob>().unwrap().is_exact());
        assert!(!"0.25".parse::<Prob>().unwrap().is_exact());
        assert!("1/0".parse::<Prob>().is_err());
        assert!("abc".parse::<Prob>().is_err());
        assert!("1/x".parse::<Prob>().is_err());
    }

    #[test]
    fn integer_display() {
        assert_eq!(Prob::one().to_string(), "1");
        assert_eq!(Prob::zero().to_string(), "0");
        assert_eq!(Prob::ratio(17, 32).to_string(), "17/32");
    }

    #[test]
    fn tolerant_comparisons() {
        let a = Prob::approx(0.5 + 1e-12);
        assert!(a.eq_tol(&Prob::half(), APPROX_TOL));
        assert!(Prob::half().ge_tol(&a, APPROX_TOL));
        assert!(!Prob::ratio(1, 3).ge_tol(&Prob::half(), APPROX_TOL));
    }

    #[test]
    fn assignment_rejects_out_of_range() {
        let mut p = ProbAssignment::new();
        assert!(matches!(
            p.set("x", Prob::ratio(3, 2)),
            Err(Error::OutOfRange { .. })
        ));
        p.set("x", Prob::half()).unwrap();
        assert!(p.is_exact());
        p.set("y", Prob::approx(0.25)).unwrap();
        assert!(!p.is_exact());
    }

    #[test]
    fn roots_are_approximate() {
        assert!(Prob::ratio(1, 4).nth_root(1).is_exact());
        let r = Prob::ratio(1, 4).sqrt();
        assert!(!r.is_exact());
        assert!((r.to_f64() - 0.5).abs() < 1e-15);
    }
}
