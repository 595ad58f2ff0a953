use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::scalar::RcfScalar;
use crate::error::Result;
use crate::scalar::{Field, Hermitian, Scalar};
use crate::{CRational, Rational};

/// Element of `R[i]` for the truncated infinitesimal field `R`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RcfComplex {
    pub re: RcfScalar,
    pub im: RcfScalar,
}

impl RcfComplex {
    pub fn new(re: RcfScalar, im: RcfScalar) -> Self {
        RcfComplex { re, im }
    }

    pub fn real(re: RcfScalar) -> Self {
        let order = re.order();
        RcfComplex {
            re,
            im: RcfScalar::zero_with_order(order),
        }
    }

    pub fn from_crational(z: &CRational, order: u32) -> Self {
        RcfComplex {
            re: RcfScalar::from_rational(z.re.clone(), order),
            im: RcfScalar::from_rational(z.im.clone(), order),
        }
    }

    /// `re² + im²`, a sum of squares and hence nonnegative.
    pub fn modulus_sq(&self) -> RcfScalar {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    pub fn scale(&self, q: &Rational) -> Self {
        RcfComplex::new(self.re.scale(q), self.im.scale(q))
    }

    pub fn mul_scalar(&self, s: &RcfScalar) -> Self {
        RcfComplex::new(self.re.clone() * s.clone(), self.im.clone() * s.clone())
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.modulus_sq().inverse()?;
        Ok(RcfComplex::new(
            self.re.clone() * inv.clone(),
            -(self.im.clone() * inv),
        ))
    }
}

impl Add for RcfComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        RcfComplex::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for RcfComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        RcfComplex::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Neg for RcfComplex {
    type Output = Self;
    fn neg(self) -> Self {
        RcfComplex::new(-self.re, -self.im)
    }
}

impl Mul for RcfComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let re = self.re.clone() * rhs.re.clone() - self.im.clone() * rhs.im.clone();
        let im = self.re * rhs.im + self.im * rhs.re;
        RcfComplex::new(re, im)
    }
}

impl Zero for RcfComplex {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for RcfComplex {
    fn one() -> Self {
        RcfComplex::real(RcfScalar::one())
    }
}

impl Scalar for RcfComplex {
    fn from_i64(n: i64) -> Self {
        RcfComplex::real(RcfScalar::from_i64(n))
    }
    fn conj(&self) -> Self {
        RcfComplex::new(self.re.clone(), -self.im.clone())
    }
    fn div_int(&self, n: i64) -> Self {
        RcfComplex::new(self.re.div_int(n), self.im.div_int(n))
    }
}

impl Field for RcfComplex {
    fn try_inv(&self) -> Option<Self> {
        self.inverse().ok()
    }
}

impl Hermitian for RcfComplex {
    type Real = RcfScalar;
    fn real_part(&self) -> RcfScalar {
        self.re.clone()
    }
    fn is_real(&self) -> bool {
        self.im.is_zero()
    }
    fn sign_of_real(x: &RcfScalar) -> Ordering {
        x.sign().cmp(&0)
    }
}

impl fmt::Display for RcfComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "({}) + i*({})", self.re, self.im)
        }
    }
}
