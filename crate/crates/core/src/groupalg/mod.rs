//! Group algebras `ℂ[Γ]` (free, free abelian, finite) and free *-algebras.
//!
//! Elements are finitely supported maps from normal-form words to complex
//! rationals. The augmentation ideal `ω(Γ)` is spanned by `c(g) = g − 1`.

mod element;
mod spec;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

pub use element::AlgebraElement;
pub use spec::{AlgebraSpec, Backend, FiniteGroup, Word};

use crate::error::{Error, Result};
use crate::linalg::{solve, Matrix};
use crate::scalar::creal;
use crate::Rational;

/// `c(g) = g − 1`.
pub fn c_of(spec: &Arc<AlgebraSpec>, g: &Word) -> AlgebraElement {
    let mut e = AlgebraElement::word(spec, g.clone());
    e.add_term(spec.identity(), creal(-Rational::one()));
    e
}

/// `Δ(S) = |S| − Σ_{s∈S} s` for a symmetric set `S` not containing `e`.
pub fn laplacian(spec: &Arc<AlgebraSpec>, s: &[Word]) -> Result<AlgebraElement> {
    for w in s {
        spec.validate(w)?;
        if spec.is_identity(w) {
            return Err(Error::IdentityInGenerators);
        }
        if !s.contains(&spec.star(w)) {
            return Err(Error::NotSymmetric(spec.format_word(w)));
        }
    }
    let mut out = AlgebraElement::scalar(spec, creal(Rational::from_integer((s.len() as i64).into())));
    for w in s {
        out.add_term(w.clone(), creal(-Rational::one()));
    }
    Ok(out)
}

/// Laplacian of the standard symmetric generating set.
pub fn standard_laplacian(spec: &Arc<AlgebraSpec>) -> AlgebraElement {
    laplacian(spec, &spec.symmetric_generators()).expect("standard generators are symmetric")
}

pub fn ball(spec: &Arc<AlgebraSpec>, d: usize) -> Vec<Word> {
    spec.ball(d)
}

pub fn is_in_augmentation_ideal(a: &AlgebraElement) -> bool {
    a.augmentation().is_zero()
}

/// Whether `a` is a linear combination of `c(g)*c(h)` with `g, h` in the ball
/// of radius `deg a`.
pub fn is_in_omega_squared_span(a: &AlgebraElement) -> bool {
    omega_squared_coefficients(a, a.degree().max(1)).is_some()
}

/// Coefficients `λ_{g,h}` (real and imaginary parts) with
/// `a = Σ λ_{g,h} c(g)*c(h)` over the ball of radius `radius`.
pub fn omega_squared_coefficients(
    a: &AlgebraElement,
    radius: usize,
) -> Option<Vec<((Word, Word), crate::CRational)>> {
    let spec = a.spec();
    let words: Vec<Word> = spec
        .ball(radius)
        .into_iter()
        .filter(|w| !spec.is_identity(w))
        .collect();
    let mut pairs = Vec::new();
    let mut columns = Vec::new();
    for g in &words {
        for h in &words {
            pairs.push((g.clone(), h.clone()));
            columns.push(c_of(spec, g).involution().multiply(&c_of(spec, h)).ok()?);
        }
    }
    let mut index: BTreeMap<Word, usize> = BTreeMap::new();
    for col in columns.iter().chain(std::iter::once(a)) {
        for w in col.support() {
            let next = index.len();
            index.entry(w.clone()).or_insert(next);
        }
    }
    let mut m = Matrix::<Rational>::zeros(index.len(), columns.len());
    for (j, col) in columns.iter().enumerate() {
        for (w, c) in col.terms() {
            m[(index[w], j)] = c.re.clone();
        }
    }
    let mut re = vec![Rational::zero(); index.len()];
    let mut im = vec![Rational::zero(); index.len()];
    for (w, c) in a.terms() {
        re[index[w]] = c.re.clone();
        im[index[w]] = c.im.clone();
    }
    let x_re = solve(&m, &re)?;
    let x_im = solve(&m, &im)?;
    Some(
        pairs
            .into_iter()
            .zip(x_re.into_iter().zip(x_im))
            .filter(|(_, (r, i))| !r.is_zero() || !i.is_zero())
            .map(|(p, (r, i))| (p, crate::CRational::new(r, i)))
            .collect(),
    )
}
