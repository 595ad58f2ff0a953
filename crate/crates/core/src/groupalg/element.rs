use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use super::spec::{AlgebraSpec, Word};
use crate::error::{Error, Result};
use crate::scalar::{creal, fmt_rational, modulus_sq, modulus_upper};
use crate::{CRational, Rational};

/// Finitely supported `Σ a_w w` with complex rational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    spec: Arc<AlgebraSpec>,
    terms: BTreeMap<Word, CRational>,
}

impl AlgebraElement {
    pub fn zero(spec: &Arc<AlgebraSpec>) -> Self {
        AlgebraElement {
            spec: spec.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(spec: &Arc<AlgebraSpec>) -> Self {
        Self::monomial(spec, spec.identity(), creal(Rational::from_integer(1.into())))
    }

    pub fn scalar(spec: &Arc<AlgebraSpec>, c: CRational) -> Self {
        Self::monomial(spec, spec.identity(), c)
    }

    pub fn monomial(spec: &Arc<AlgebraSpec>, w: Word, c: CRational) -> Self {
        let mut e = Self::zero(spec);
        e.add_term(w, c);
        e
    }

    pub fn word(spec: &Arc<AlgebraSpec>, w: Word) -> Self {
        Self::monomial(spec, w, creal(Rational::from_integer(1.into())))
    }

    /// Parses a word and returns it as an element with coefficient 1.
    pub fn parse_word(spec: &Arc<AlgebraSpec>, s: &str) -> Result<Self> {
        Ok(Self::word(spec, spec.parse_word(s)?))
    }

    pub fn from_terms(spec: &Arc<AlgebraSpec>, terms: impl IntoIterator<Item = (Word, CRational)>) -> Result<Self> {
        let mut e = Self::zero(spec);
        for (w, c) in terms {
            spec.validate(&w)?;
            e.add_term(w, c);
        }
        Ok(e)
    }

    /// Builds an element from `(word text, integer real coefficient)` pairs.
    pub fn from_int_terms(spec: &Arc<AlgebraSpec>, terms: &[(&str, i64)]) -> Result<Self> {
        let mut e = Self::zero(spec);
        for (w, c) in terms {
            e.add_term(spec.parse_word(w)?, creal(Rational::from_integer((*c).into())));
        }
        Ok(e)
    }

    pub fn spec(&self) -> &Arc<AlgebraSpec> {
        &self.spec
    }

    pub fn terms(&self) -> &BTreeMap<Word, CRational> {
        &self.terms
    }

    pub fn coefficient(&self, w: &Word) -> CRational {
        self.terms.get(w).cloned().unwrap_or_else(CRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &Word> {
        self.terms.keys()
    }

    pub fn add_term(&mut self, w: Word, c: CRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(w.clone()).or_insert_with(CRational::zero);
        *slot = &*slot + c;
        if slot.is_zero() {
            self.terms.remove(&w);
        }
    }

    fn same_spec(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.spec, &other.spec) || self.spec == other.spec {
            Ok(())
        } else {
            Err(Error::SpecMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_spec(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    /// Exact convolution product.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same_spec(other)?;
        let mut out = Self::zero(&self.spec);
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                out.add_term(self.spec.mul(u, v), a * b);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.scale_complex(&-CRational::from(Rational::from_integer(1.into())))
    }

    pub fn scale(&self, q: &Rational) -> Self {
        self.scale_complex(&creal(q.clone()))
    }

    pub fn scale_complex(&self, z: &CRational) -> Self {
        let mut out = Self::zero(&self.spec);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c * z);
        }
        out
    }

    /// `(Σ a_w w)* = Σ conj(a_w) w*`.
    pub fn involution(&self) -> Self {
        let mut out = Self::zero(&self.spec);
        for (w, c) in &self.terms {
            out.add_term(self.spec.star(w), c.conj());
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        self.involution() == *self
    }

    /// Coefficient at the identity.
    pub fn trace(&self) -> CRational {
        self.coefficient(&self.spec.identity())
    }

    /// Sum of all coefficients.
    pub fn augmentation(&self) -> CRational {
        self.terms.values().fold(CRational::zero(), |acc, c| acc + c)
    }

    /// `Σ |a_w|²`.
    pub fn l2_norm_sq(&self) -> Rational {
        self.terms.values().map(modulus_sq).sum()
    }

    /// Rational upper bound on `‖a‖₁²`; exact for real or purely imaginary
    /// coefficients.
    pub fn l1_norm_sq_bound(&self) -> Rational {
        let s: Rational = self.terms.values().map(modulus_upper).sum();
        &s * &s
    }

    /// Rational upper bound on `‖a‖₁`.
    pub fn l1_norm_bound(&self) -> Rational {
        self.terms.values().map(modulus_upper).sum()
    }

    /// Largest word length in the support.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|w| self.spec.length(w)).max().unwrap_or(0)
    }

    pub fn has_real_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.im.is_zero())
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let coef = if c.im.is_zero() {
                fmt_rational(&c.re)
            } else {
                format!("({} + {}i)", fmt_rational(&c.re), fmt_rational(&c.im))
            };
            let word = self.spec.format_word(w);
            if self.spec.is_identity(w) {
                write!(f, "{coef}")?;
            } else {
                write!(f, "{coef}*{word}")?;
            }
        }
        Ok(())
    }
}

impl std::ops::Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: Self) -> AlgebraElement {
        self.try_add(rhs).expect("algebra specs differ")
    }
}

impl std::ops::Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: Self) -> AlgebraElement {
        self.try_sub(rhs).expect("algebra specs differ")
    }
}

impl std::ops::Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: Self) -> AlgebraElement {
        self.multiply(rhs).expect("algebra specs differ")
    }
}

impl std::ops::Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement::neg(self)
    }
}
