use num_bigint::BigInt;
use num_traits::Zero;

use super::complex::RcfComplex;
use super::scalar::{level_exponent, RcfScalar};
use crate::error::{Error, Result};
use crate::linalg::{psd_by_charpoly, Matrix};
use crate::scalar::{creal, Scalar};
use crate::{CRational, Rational};

/// Univariate polynomial `Σ c_k t^k` over complex rationals, with the
/// involution `t* = t` acting by conjugating coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly {
    coefficients: Vec<CRational>,
}

impl UniPoly {
    pub fn new(mut coefficients: Vec<CRational>) -> Self {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        UniPoly { coefficients }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| creal(Rational::from_i64(c))).collect())
    }

    pub fn coefficients(&self) -> &[CRational] {
        &self.coefficients
    }

    pub fn coefficient(&self, k: usize) -> CRational {
        self.coefficients.get(k).cloned().unwrap_or_else(CRational::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn adjoint(&self) -> Self {
        UniPoly::new(self.coefficients.iter().map(|c| c.conj()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return UniPoly::new(Vec::new());
        }
        let mut out = vec![CRational::zero(); self.coefficients.len() + other.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                out[i + j] = &out[i + j] + a * b;
            }
        }
        UniPoly::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coefficients.len().max(other.coefficients.len());
        UniPoly::new((0..n).map(|k| self.coefficient(k) + other.coefficient(k)).collect())
    }

    /// `p^{(k)}(0) = k! · c_k`.
    pub fn derivative_at_zero(&self, k: usize) -> CRational {
        let fact: BigInt = (1..=k as u64).map(BigInt::from).product();
        self.coefficient(k) * creal(Rational::from_integer(fact))
    }
}

/// Linear functionals `C[t] → R[i]` used to probe (complete) positivity.
pub trait PolyFunctional {
    fn apply(&self, p: &UniPoly) -> Result<RcfComplex>;

    fn order(&self) -> u32;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeMode {
    /// `p ↦ p(0) + ε·p''(0)`.
    SingleLevel,
    /// `p ↦ Σ_i ε_i·p^{(2i)}(0)` with `ε_0 = 1`.
    FullSeries,
}

/// Positive functionals built from even derivatives at the origin; positive
/// on squares but not completely positive.
#[derive(Clone, Copy, Debug)]
pub struct DerivativeFunctional {
    pub mode: DerivativeMode,
    pub order: u32,
}

impl DerivativeFunctional {
    pub fn new(mode: DerivativeMode, order: u32) -> Self {
        DerivativeFunctional { mode, order }
    }
}

impl PolyFunctional for DerivativeFunctional {
    fn apply(&self, p: &UniPoly) -> Result<RcfComplex> {
        let order = self.order;
        let lift = |z: &CRational, e: u32| -> Result<RcfComplex> {
            Ok(RcfComplex::new(
                RcfScalar::monomial(z.re.clone(), e, order)?,
                RcfScalar::monomial(z.im.clone(), e, order)?,
            ))
        };
        let mut acc = RcfComplex::real(RcfScalar::zero_with_order(order));
        match self.mode {
            DerivativeMode::SingleLevel => {
                acc = acc + lift(&p.derivative_at_zero(0), 0)?;
                let d2 = p.derivative_at_zero(2);
                if !d2.is_zero() {
                    acc = acc + lift(&d2, 1)?;
                }
            }
            DerivativeMode::FullSeries => {
                let deg = p.degree().unwrap_or(0);
                for i in 0..=deg / 2 {
                    let d = p.derivative_at_zero(2 * i);
                    if d.is_zero() {
                        continue;
                    }
                    if i >= 32 || level_exponent(i as u32) > order {
                        return Err(Error::TruncationExceeded {
                            exponent: if i >= 32 { u32::MAX } else { level_exponent(i as u32) },
                            order,
                        });
                    }
                    acc = acc + lift(&d, level_exponent(i as u32))?;
                }
            }
        }
        Ok(acc)
    }

    fn order(&self) -> u32 {
        self.order
    }
}

/// `p ↦ Σ_j w_j p(x_j)` with nonnegative weights and real points; a
/// completely positive functional.
#[derive(Clone, Debug)]
pub struct EvaluationFunctional {
    pub nodes: Vec<(Rational, Rational)>,
    pub order: u32,
}

impl PolyFunctional for EvaluationFunctional {
    fn apply(&self, p: &UniPoly) -> Result<RcfComplex> {
        let mut total = CRational::zero();
        for (w, x) in &self.nodes {
            let mut value = CRational::zero();
            for c in p.coefficients().iter().rev() {
                value = value * creal(x.clone()) + c.clone();
            }
            total = total + value * creal(w.clone());
        }
        Ok(RcfComplex::from_crational(&total, self.order))
    }

    fn order(&self) -> u32 {
        self.order
    }
}

/// Entry-point form of the derivative functionals.
pub fn eval_derivative_functional(p: &UniPoly, mode: DerivativeMode, order: u32) -> Result<RcfComplex> {
    DerivativeFunctional::new(mode, order).apply(p)
}

/// Exact PSD decision for a hermitian matrix over `R[i]`.
pub fn hermitian_psd_check(m: &Matrix<RcfComplex>) -> Result<bool> {
    if !m.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    Ok(psd_by_charpoly(m))
}

/// Determinant of a square matrix over `R[i]`, read off the characteristic
/// polynomial.
pub fn determinant(m: &Matrix<RcfComplex>) -> RcfComplex {
    let n = m.rows();
    let c0 = m.charpoly()[0].clone();
    if n % 2 == 1 {
        -c0
    } else {
        c0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CauchySchwarz {
    Holds,
    Violated { excess: RcfScalar },
}

/// Compares `|φ(a*b)|²` with `φ(a*a)·φ(b*b)`.
pub fn cauchy_schwarz_check(
    phi: &dyn PolyFunctional,
    a: &UniPoly,
    b: &UniPoly,
) -> Result<CauchySchwarz> {
    let ab = phi.apply(&a.adjoint().mul(b))?;
    let aa = phi.apply(&a.adjoint().mul(a))?.re;
    let bb = phi.apply(&b.adjoint().mul(b))?.re;
    let lhs = ab.modulus_sq();
    let rhs = aa.checked_mul(&bb)?;
    let excess = lhs - rhs;
    Ok(if excess.sign() > 0 {
        CauchySchwarz::Violated { excess }
    } else {
        CauchySchwarz::Holds
    })
}

/// The matrix `(φ(a_i* a_j))_{i,j}`.
pub fn functional_matrix(phi: &dyn PolyFunctional, rows: &[UniPoly]) -> Result<Matrix<RcfComplex>> {
    let m = rows.len();
    let mut out = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            out[(i, j)] = phi.apply(&rows[i].adjoint().mul(&rows[j]))?;
        }
    }
    Ok(out)
}

/// Level-`m` complete positivity probe on the rank-one square built from
/// `rows`.
pub fn cp_level_check(phi: &dyn PolyFunctional, rows: &[UniPoly], m: usize) -> Result<bool> {
    if rows.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: rows.len(),
        });
    }
    hermitian_psd_check(&functional_matrix(phi, rows)?)
}

/// Squared gauge triangle inequality: `φ((a+b)*(a+b)) ≤ φ(a*a) + φ(b*b) + 2s`
/// for the supplied `s` (the caller guarantees `s ≥ 0` and
/// `s² ≥ φ(a*a)·φ(b*b)`).
pub fn gauge_triangle_holds(
    phi: &dyn PolyFunctional,
    a: &UniPoly,
    b: &UniPoly,
    s: &RcfScalar,
) -> Result<bool> {
    let sum = a.add(b);
    let lhs = phi.apply(&sum.adjoint().mul(&sum))?.re;
    let aa = phi.apply(&a.adjoint().mul(a))?.re;
    let bb = phi.apply(&b.adjoint().mul(b))?.re;
    let rhs = aa + bb + s.clone() + s.clone();
    Ok(lhs.compare(&rhs) != std::cmp::Ordering::Greater)
}
