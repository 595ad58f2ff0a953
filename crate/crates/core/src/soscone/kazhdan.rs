use std::sync::Arc;

use num_traits::{Signed, Zero};

use super::certificate::DualWitness;
use crate::error::{Error, Result};
use crate::groupalg::{laplacian, AlgebraElement, AlgebraSpec, Backend, Word};
use crate::linalg::Matrix;
use crate::scalar::{approx_rational, rint, to_f64};
use crate::Rational;

/// Enclosure of the spectral gap `ε` of `Δ(S)` on `ℓ²(G) ⊖ ℂ·1`.
#[derive(Clone, Debug, PartialEq)]
pub struct KazhdanConstant {
    pub lower: Rational,
    pub upper: Rational,
    /// Set when the gap is rational and was hit exactly.
    pub exact: Option<Rational>,
}

impl KazhdanConstant {
    pub fn value(&self) -> f64 {
        match &self.exact {
            Some(e) => to_f64(e),
            None => 0.5 * (to_f64(&self.lower) + to_f64(&self.upper)),
        }
    }
}

type Poly = Vec<Rational>;

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn eval(p: &Poly, x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

fn derivative(p: &Poly) -> Poly {
    trim(p.iter().enumerate().skip(1).map(|(k, c)| c * rint(k as i64)).collect())
}

fn rem(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1;
        let f = &r[k] / &lead;
        for (i, c) in b.iter().enumerate() {
            r[k - db + i] -= &f * c;
        }
        r = trim(r);
    }
    r
}

fn quotient(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let db = b.len() - 1;
    let mut q = vec![Rational::zero(); a.len().saturating_sub(db)];
    while r.len() > db {
        let k = r.len() - 1;
        let f = &r[k] / &b[db];
        for (i, c) in b.iter().enumerate() {
            r[k - db + i] -= &f * c;
        }
        q[k - db] = f;
        r.pop();
    }
    q
}

fn gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let r = rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![p.clone(), derivative(p)];
    while chain.last().is_some_and(|q| q.len() > 1) {
        let n = chain.len();
        let r = rem(&chain[n - 2], &chain[n - 1]);
        if r.is_empty() {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    chain
}

fn sign_changes(chain: &[Poly], x: &Rational) -> usize {
    let signs: Vec<bool> = chain
        .iter()
        .map(|p| eval(p, x))
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Smallest nonzero eigenvalue of `Δ(S)` in the regular representation.
pub fn kazhdan_constant_finite(spec: &Arc<AlgebraSpec>, s: &[Word]) -> Result<KazhdanConstant> {
    let Backend::Finite(g) = &spec.backend else {
        return Err(Error::UnsupportedBackend(format!(
            "{} (Kazhdan constants are computed for finite groups)",
            spec.name()
        )));
    };
    laplacian(spec, s)?;
    let n = g.order();
    if n == 1 {
        return Err(Error::NoNonzeroModes);
    }
    let deg = rint(s.len() as i64);
    let mut l = Matrix::<Rational>::zeros(n, n);
    for x in 0..n {
        l[(x, x)] = deg.clone();
        for w in s {
            let y = g.mul(x, w.0[0] as usize);
            l[(x, y)] -= rint(1);
        }
    }
    let cp = trim(l.charpoly());
    let k = cp.iter().take_while(|c| c.is_zero()).count();
    if k > 1 {
        return Err(Error::NotGenerating { kernel_dim: k });
    }
    let p: Poly = cp[k..].to_vec();
    let sq = quotient(&p, &gcd(&p, &derivative(&p)));
    let chain = sturm_chain(&sq);
    let count = |a: &Rational, b: &Rational| sign_changes(&chain, a) - sign_changes(&chain, b);

    let mut lo = Rational::zero();
    let mut hi = rint(2) * &deg + rint(1);
    let width = Rational::new(1.into(), num_bigint::BigInt::from(1u64) << 50);
    while &hi - &lo > width {
        let mid = (&lo + &hi) / rint(2);
        if eval(&sq, &mid).is_zero() && count(&lo, &mid) == 1 {
            return Ok(exact(mid));
        }
        if count(&lo, &mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let guess = approx_rational(0.5 * (to_f64(&lo) + to_f64(&hi)), 1_000_000);
    if guess > lo && guess <= hi && eval(&sq, &guess).is_zero() {
        return Ok(exact(guess));
    }
    Ok(KazhdanConstant {
        lower: lo,
        upper: hi,
        exact: None,
    })
}

fn exact(x: Rational) -> KazhdanConstant {
    KazhdanConstant {
        lower: x.clone(),
        upper: x.clone(),
        exact: Some(x),
    }
}

/// Checks `ε·φ(b) < 2‖b‖₁·φ(Δ(S))` exactly, taking the side of the `ε`
/// enclosure that makes the check conservative.
pub fn kazhdan_margin_check(
    spec: &Arc<AlgebraSpec>,
    s: &[Word],
    b: &AlgebraElement,
    phi: &DualWitness,
) -> Result<bool> {
    let eps = kazhdan_constant_finite(spec, s)?;
    let delta = laplacian(spec, s)?;
    let phi_delta = phi.value(&delta).re;
    if !phi_delta.is_positive() {
        return Err(Error::TrivialFunctional);
    }
    let phi_b = phi.value(b).re;
    let e = if phi_b.is_positive() { &eps.upper } else { &eps.lower };
    let lhs = e * &phi_b;
    let rhs = rint(2) * b.l1_norm_bound() * phi_delta;
    Ok(lhs < rhs)
}
