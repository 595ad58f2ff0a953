//! Scalar abstractions shared by the exact and floating-point code paths.
//!
//! The dense linear algebra in [`crate::linalg`] is written once against
//! [`Scalar`]/[`Field`] and instantiated with `f64`, exact rationals,
//! complex rationals, and the infinitesimal field elements of [`crate::rcf`].

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_complex::Complex;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::{CRational, Rational};

/// Commutative ring with an involution and exact division by integers.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(n: i64) -> Self;

    fn conj(&self) -> Self;

    /// `self / n` for a nonzero integer `n`.
    fn div_int(&self, n: i64) -> Self;
}

/// A [`Scalar`] where nonzero elements may be inverted.
///
/// `try_inv` returns `None` for zero and for non-units (the truncated
/// infinitesimal ring only inverts elements with nonzero standard part).
pub trait Field: Scalar {
    fn try_inv(&self) -> Option<Self>;
}

/// Scalars whose self-adjoint elements carry an order.
pub trait Hermitian: Scalar {
    type Real: Scalar + PartialOrd;

    fn real_part(&self) -> Self::Real;

    fn is_real(&self) -> bool;

    fn sign_of_real(x: &Self::Real) -> Ordering;
}

impl Scalar for f64 {
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn conj(&self) -> Self {
        *self
    }
    fn div_int(&self, n: i64) -> Self {
        self / n as f64
    }
}

impl Field for f64 {
    fn try_inv(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }
}

impl Hermitian for f64 {
    type Real = f64;
    fn real_part(&self) -> f64 {
        *self
    }
    fn is_real(&self) -> bool {
        true
    }
    fn sign_of_real(x: &f64) -> Ordering {
        x.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    }
}

impl Scalar for Rational {
    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn div_int(&self, n: i64) -> Self {
        self / Rational::from_integer(BigInt::from(n))
    }
}

impl Field for Rational {
    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
}

impl Hermitian for Rational {
    type Real = Rational;
    fn real_part(&self) -> Rational {
        self.clone()
    }
    fn is_real(&self) -> bool {
        true
    }
    fn sign_of_real(x: &Rational) -> Ordering {
        x.cmp(&Rational::zero())
    }
}

impl Scalar for CRational {
    fn from_i64(n: i64) -> Self {
        Complex::new(Rational::from_i64(n), Rational::zero())
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn div_int(&self, n: i64) -> Self {
        Complex::new(self.re.div_int(n), self.im.div_int(n))
    }
}

impl Field for CRational {
    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Complex::new(Rational::one(), Rational::zero()) / self.clone())
        }
    }
}

impl Hermitian for CRational {
    type Real = Rational;
    fn real_part(&self) -> Rational {
        self.re.clone()
    }
    fn is_real(&self) -> bool {
        self.im.is_zero()
    }
    fn sign_of_real(x: &Rational) -> Ordering {
        x.cmp(&Rational::zero())
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rint(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn creal(q: Rational) -> CRational {
    Complex::new(q, Rational::zero())
}

pub fn cint(re: i64, im: i64) -> CRational {
    Complex::new(rint(re), rint(im))
}

pub fn modulus_sq(z: &CRational) -> Rational {
    &z.re * &z.re + &z.im * &z.im
}

/// Renders a rational as `"p/q"` (or `"p"` when integral).
pub fn fmt_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        Ok(Rational::new(p, q))
    } else if let Some((int, frac)) = s.split_once('.') {
        // plain decimals are accepted for convenience
        let neg = int.trim_start().starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let digits: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mut v = Rational::from_integer(int.abs()) + Rational::new(digits, scale);
        if neg {
            v = -v;
        }
        Ok(v)
    } else {
        let p: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Rational::from_integer(p))
    }
}

/// Exact square root when `x` is the square of a rational.
pub fn exact_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let (n, d) = (x.numer(), x.denom());
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(Rational::new(rn, rd))
    } else {
        None
    }
}

/// Smallest rational with denominator `2^bits` that is ≥ √x (exact when
/// `x` is a rational square).
pub fn sqrt_upper(x: &Rational, bits: u32) -> Rational {
    assert!(!x.is_negative(), "sqrt of a negative rational");
    if let Some(r) = exact_sqrt(x) {
        return r;
    }
    let scale = BigInt::one() << (2 * bits as usize);
    // ceil(x * 4^bits)
    let scaled = x * Rational::from_integer(scale);
    let ceil = scaled.ceil().to_integer();
    let mut s = ceil.sqrt();
    if &s * &s < ceil {
        s += 1;
    }
    Rational::new(s, BigInt::one() << bits as usize)
}

/// Rational upper bound on `|z|`.
pub fn modulus_upper(z: &CRational) -> Rational {
    if z.im.is_zero() {
        return z.re.abs();
    }
    if z.re.is_zero() {
        return z.im.abs();
    }
    sqrt_upper(&modulus_sq(z), 40)
}

/// Exact rational value of a finite double.
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued fractions).
pub fn approx_rational(x: f64, max_den: i64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut h0, mut h1): (i128, i128) = (0, 1);
    let (mut k0, mut k1): (i128, i128) = (1, 0);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let a_i = a as i128;
        let h2 = a_i * h1 + h0;
        let k2 = a_i * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 == 0 {
        return Rational::zero();
    }
    let q = Rational::new(BigInt::from(h1), BigInt::from(k1));
    if neg {
        -q
    } else {
        q
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // very large numerators: fall back to a scaled division
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn sign_of(q: &Rational) -> Ordering {
    match q.numer().sign() {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        let q = parse_rational("-6/4").unwrap();
        assert_eq!(fmt_rational(&q), "-3/2");
        assert_eq!(fmt_rational(&parse_rational("7").unwrap()), "7");
        assert_eq!(parse_rational("0.7072").unwrap(), rat(884, 1250));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn sqrt_bounds() {
        assert_eq!(sqrt_upper(&rat(9, 4), 20), rat(3, 2));
        let two = rint(2);
        let r = sqrt_upper(&two, 30);
        assert!(&r * &r >= two);
        assert!(&r * &r - &two < rat(1, 1 << 28));
        assert_eq!(modulus_upper(&cint(3, 4)), rint(5));
    }

    #[test]
    fn continued_fractions() {
        assert_eq!(approx_rational(0.333333333, 100), rat(1, 3));
        assert_eq!(approx_rational(-1.5000000001, 10), rat(-3, 2));
        assert_eq!(approx_rational(1e-14, 1000), rint(0));
    }
}
