use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{fmt_rational, parse_rational, Field, Hermitian, Scalar};
use crate::Rational;

/// Default truncation order; supports six infinitesimal levels.
pub const DEFAULT_TRUNCATION: u32 = 63;

/// Truncation order from `NCSOS_TRUNCATION`, falling back to the default.
pub fn truncation_from_env() -> u32 {
    std::env::var("NCSOS_TRUNCATION")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_TRUNCATION)
}

/// Exponent of the `i`-th infinitesimal level, `2^i − 1`.
pub fn level_exponent(i: u32) -> u32 {
    (1u32 << i) - 1
}

/// Polynomial in one positive infinitesimal `ε` with rational coefficients,
/// truncated above exponent `order`.
///
/// Ordered lexicographically from the lowest exponent: the sign of an
/// element is the sign of its lowest-order coefficient.
#[derive(Clone, Debug)]
pub struct RcfScalar {
    terms: BTreeMap<u32, Rational>,
    order: u32,
    truncated: bool,
}

impl RcfScalar {
    pub fn zero_with_order(order: u32) -> Self {
        RcfScalar {
            terms: BTreeMap::new(),
            order,
            truncated: false,
        }
    }

    pub fn from_rational(q: Rational, order: u32) -> Self {
        let mut s = Self::zero_with_order(order);
        if !q.is_zero() {
            s.terms.insert(0, q);
        }
        s
    }

    /// `c · ε^e`.
    pub fn monomial(c: Rational, exponent: u32, order: u32) -> Result<Self> {
        if exponent > order {
            return Err(Error::TruncationExceeded { exponent, order });
        }
        let mut s = Self::zero_with_order(order);
        if !c.is_zero() {
            s.terms.insert(exponent, c);
        }
        Ok(s)
    }

    pub fn from_terms(
        terms: impl IntoIterator<Item = (u32, Rational)>,
        order: u32,
    ) -> Result<Self> {
        let mut s = Self::zero_with_order(order);
        for (e, c) in terms {
            if e > order {
                return Err(Error::TruncationExceeded { exponent: e, order });
            }
            s.add_term(e, c);
        }
        Ok(s)
    }

    fn add_term(&mut self, e: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        if e > self.order {
            self.truncated = true;
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Whether some product discarded terms above the truncation order.
    pub fn was_truncated(&self) -> bool {
        self.truncated
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coefficient(&self, e: u32) -> Rational {
        self.terms.get(&e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_exponent(&self) -> Option<u32> {
        self.terms.keys().next().copied()
    }

    pub fn sign(&self) -> i8 {
        match self.terms.values().next() {
            None => 0,
            Some(c) if c.is_positive() => 1,
            Some(_) => -1,
        }
    }

    /// Coefficient at `ε^0`: the residue map on finite elements.
    pub fn standard_part(&self) -> Rational {
        self.coefficient(0)
    }

    pub fn is_infinitesimal(&self) -> bool {
        self.standard_part().is_zero()
    }

    pub fn compare(&self, other: &Self) -> Ordering {
        match (self.clone() - other.clone()).sign() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }

    /// Product that fails instead of truncating.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let p = self.clone() * other.clone();
        if p.truncated && !(self.truncated || other.truncated) {
            let max = self.terms.keys().last().copied().unwrap_or(0)
                + other.terms.keys().last().copied().unwrap_or(0);
            return Err(Error::TruncationExceeded {
                exponent: max,
                order: p.order,
            });
        }
        Ok(p)
    }

    /// Inverse of a unit (nonzero standard part) by geometric series up to
    /// the truncation order.
    pub fn inverse(&self) -> Result<Self> {
        let a0 = self.standard_part();
        if a0.is_zero() {
            return Err(Error::NonUnitDivision {
                leading: self.leading_exponent().map_or(-1, i64::from),
            });
        }
        let inv0 = a0.recip();
        // self = a0 (1 + u), u purely infinitesimal
        let mut u = Self::zero_with_order(self.order);
        for (e, c) in self.terms.iter().filter(|(e, _)| **e > 0) {
            u.add_term(*e, c * &inv0);
        }
        let mut result = Self::from_rational(Rational::one(), self.order);
        let mut power = Self::from_rational(Rational::one(), self.order);
        let neg_u = -u;
        loop {
            power = power * neg_u.clone();
            if power.terms.is_empty() {
                break;
            }
            result = result + power.clone();
        }
        result.truncated = false;
        Ok(result.scale(&inv0))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.clone() * other.inverse()?)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        let mut s = Self::zero_with_order(self.order);
        s.truncated = self.truncated;
        for (e, c) in &self.terms {
            s.add_term(*e, c * q);
        }
        s
    }

    /// Substitutes a numeric value for `ε`.
    pub fn eval_f64(&self, eps: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| crate::scalar::to_f64(c) * eps.powi(*e as i32))
            .sum()
    }

    pub fn with_order(mut self, order: u32) -> Self {
        self.order = order;
        let over: Vec<u32> = self.terms.keys().copied().filter(|e| *e > order).collect();
        for e in over {
            self.terms.remove(&e);
            self.truncated = true;
        }
        self
    }
}

impl PartialEq for RcfScalar {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl PartialOrd for RcfScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.compare(other))
    }
}

impl Add for RcfScalar {
    type Output = RcfScalar;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        out.order = out.order.min(rhs.order);
        out.truncated |= rhs.truncated;
        for (e, c) in rhs.terms {
            out.add_term(e, c);
        }
        out.with_order_in_place();
        out
    }
}

impl RcfScalar {
    fn with_order_in_place(&mut self) {
        let order = self.order;
        if self.terms.keys().any(|e| *e > order) {
            let taken = std::mem::take(self);
            *self = taken.with_order(order);
        }
    }
}

impl Default for RcfScalar {
    fn default() -> Self {
        Self::zero_with_order(DEFAULT_TRUNCATION)
    }
}

impl Neg for RcfScalar {
    type Output = RcfScalar;
    fn neg(mut self) -> Self {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Sub for RcfScalar {
    type Output = RcfScalar;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for RcfScalar {
    type Output = RcfScalar;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero_with_order(self.order.min(rhs.order));
        out.truncated = self.truncated || rhs.truncated;
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }
}

impl Zero for RcfScalar {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for RcfScalar {
    fn one() -> Self {
        Self::from_rational(Rational::one(), DEFAULT_TRUNCATION)
    }
}

impl Scalar for RcfScalar {
    fn from_i64(n: i64) -> Self {
        Self::from_rational(crate::scalar::rint(n), DEFAULT_TRUNCATION)
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn div_int(&self, n: i64) -> Self {
        self.scale(&crate::scalar::rat(1, n))
    }
}

impl Field for RcfScalar {
    fn try_inv(&self) -> Option<Self> {
        self.inverse().ok()
    }
}

impl Hermitian for RcfScalar {
    type Real = RcfScalar;
    fn real_part(&self) -> Self {
        self.clone()
    }
    fn is_real(&self) -> bool {
        true
    }
    fn sign_of_real(x: &Self) -> Ordering {
        x.sign().cmp(&0)
    }
}

impl fmt::Display for RcfScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if *e == 0 {
                write!(f, "{}", fmt_rational(&abs))?;
            } else {
                write!(f, "{}*e^{}", fmt_rational(&abs), e)?;
            }
        }
        Ok(())
    }
}

impl FromStr for RcfScalar {
    type Err = Error;

    /// Parses sums of terms `c`, `c*e^k`, `e^k`, `e` (signs between terms).
    fn from_str(s: &str) -> Result<Self> {
        let order = truncation_from_env();
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(Error::Parse("empty infinitesimal expression".into()));
        }
        // split into signed terms, keeping '/' and '^' intact
        let mut pieces = Vec::new();
        let mut current = String::new();
        for (i, ch) in cleaned.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && !current.ends_with('^') {
                pieces.push(std::mem::take(&mut current));
            }
            current.push(ch);
        }
        pieces.push(current);
        let mut out = Self::zero_with_order(order);
        for piece in pieces {
            let (sign, body) = match piece.strip_prefix('-') {
                Some(rest) => (-1, rest),
                None => (1, piece.strip_prefix('+').unwrap_or(&piece)),
            };
            let (coef, exp) = if let Some((c, e)) = body.split_once("*e") {
                (parse_rational(c)?, parse_exponent(e)?)
            } else if let Some(e) = body.strip_prefix('e') {
                (Rational::one(), parse_exponent(e)?)
            } else {
                (parse_rational(body)?, 0)
            };
            if exp > order {
                return Err(Error::TruncationExceeded { exponent: exp, order });
            }
            out.add_term(exp, if sign < 0 { -coef } else { coef });
        }
        Ok(out)
    }
}

fn parse_exponent(s: &str) -> Result<u32> {
    if s.is_empty() {
        return Ok(1);
    }
    s.strip_prefix('^')
        .and_then(|e| e.parse().ok())
        .ok_or_else(|| Error::Parse(format!("invalid exponent {s:?}")))
}

/// `ε_i = ε^(2^i − 1)`: every rational multiple of `ε_i` is below
/// `ε_{i−1}`, and `ε_i < ε_{i−1}²`.
pub fn level_infinitesimal(i: u32, order: u32) -> Result<RcfScalar> {
    if i == 0 {
        return Err(Error::Precondition("levels start at 1".into()));
    }
    if i >= 32 || level_exponent(i) > order {
        return Err(Error::TruncationExceeded {
            exponent: if i >= 32 { u32::MAX } else { level_exponent(i) },
            order,
        });
    }
    RcfScalar::monomial(Rational::one(), level_exponent(i), order)
}
