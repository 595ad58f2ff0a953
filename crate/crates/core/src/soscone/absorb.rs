use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::certificate::{Mode, SosCertificate};
use super::exact::{certificate_from_gram, certify_sos, rounded_psd_gram};
use super::gram::{solve_margin, Feasibility, GramBasis, GramSystem};
use crate::error::{Error, Result};
use crate::groupalg::{AlgebraElement, Word};
use crate::scalar::{creal, fmt_rational, modulus_sq, modulus_upper, rint};
use crate::{CRational, Rational};

/// Exact squares for `λ·1 − h`, pairing `z·w + z̄·w*` with
/// `ρ·(1 − (z/ρ)w)*(1 − (z/ρ)w)` and putting the leftover mass on `1`.
pub fn l1_absorption_certificate(h: &AlgebraElement, lambda: &Rational) -> Result<SosCertificate> {
    absorb_with_bounds(h, lambda, |_, z| modulus_upper(z))
}

fn absorb_with_bounds(
    h: &AlgebraElement,
    lambda: &Rational,
    bound: impl Fn(&Word, &CRational) -> Rational,
) -> Result<SosCertificate> {
    let spec = h.spec();
    if !spec.is_group() {
        return Err(Error::UnsupportedBackend(
            "absorption needs a group algebra (w*w = 1)".into(),
        ));
    }
    if !h.is_hermitian() {
        return Err(Error::NonHermitianElement);
    }
    let one = AlgebraElement::one(spec);
    let target = one.scale(lambda).try_sub(h)?;
    let mut cert = SosCertificate::new(target, Mode::Full);
    let mut needed = h.trace().re;
    let mut constant = lambda - &needed;
    for (w, z) in h.terms() {
        if spec.is_identity(w) {
            continue;
        }
        let ws = spec.star(w);
        if ws < *w {
            continue;
        }
        if ws == *w {
            // w = w⁻¹: |z| − z w = (|z|/2)(1 − sgn(z) w)*(1 − sgn(z) w)
            let m = z.re.abs();
            let sign = if z.re.is_negative() { rint(1) } else { rint(-1) };
            let mut a = one.clone();
            a.add_term(w.clone(), creal(sign));
            cert.push(&m / rint(2), a);
            needed += &m;
            constant -= &m;
        } else {
            let rho = bound(w, z);
            if rho.is_zero() {
                continue;
            }
            let mut a = one.clone();
            a.add_term(w.clone(), -(z / creal(rho.clone())));
            needed += &rho * rint(2);
            constant -= &rho + modulus_sq(z) / &rho;
            cert.push(rho, a);
        }
    }
    if needed > *lambda {
        return Err(Error::Precondition(format!(
            "λ = {} is below the certified l1 bound {}",
            fmt_rational(lambda),
            fmt_rational(&needed)
        )));
    }
    cert.push(constant, one);
    Ok(cert)
}

/// Certificate for `λ − a*a`, valid whenever `λ ≥ ‖a‖₁²`.
pub fn lemma_bounded_certificate(a: &AlgebraElement, lambda: &Rational) -> Result<SosCertificate> {
    let bound = a.l1_norm_sq_bound();
    if *lambda < bound {
        return Err(Error::Precondition(format!(
            "λ = {} is below the bound {} on ‖a‖₁²",
            fmt_rational(lambda),
            fmt_rational(&bound)
        )));
    }
    let spec = a.spec();
    let h = a.involution().multiply(a)?;
    // ρ_w ≤ Σ_{u*v = w} |a_u||a_v| keeps the total below (Σ |a_u|)²
    let mu: Vec<(Word, Rational)> = a.terms().iter().map(|(w, c)| (w.clone(), modulus_upper(c))).collect();
    let mut products: BTreeMap<Word, Rational> = BTreeMap::new();
    for (u, mu_u) in &mu {
        let us = spec.star(u);
        for (v, mu_v) in &mu {
            *products.entry(spec.mul(&us, v)).or_insert_with(Rational::zero) += mu_u * mu_v;
        }
    }
    absorb_with_bounds(&h, lambda, |w, z| {
        let m = modulus_upper(z);
        match products.get(w) {
            Some(p) if *p < m => p.clone(),
            _ => m,
        }
    })
}

/// Certificate for `b + η·1`: a rounded Gram solution for `b + η/2`
/// with its residual absorbed into the other `η/2`, or an exact solve for
/// `b + η` when that fails.
pub fn interior_shift_certificate(
    b: &AlgebraElement,
    eta: &Rational,
    basis: &GramBasis,
) -> Result<SosCertificate> {
    if !b.is_hermitian() {
        return Err(Error::NonHermitianElement);
    }
    if !eta.is_positive() {
        return Err(Error::Precondition("η must be positive".into()));
    }
    let spec = b.spec();
    let one = AlgebraElement::one(spec);
    let shifted = b.try_add(&one.scale(eta))?;
    if b.is_zero() {
        let mut cert = SosCertificate::new(shifted, Mode::Full);
        cert.push(eta.clone(), one);
        return Ok(cert);
    }
    let half = eta / rint(2);
    let mut residual_error = None;
    if spec.is_group() {
        let target = b.try_add(&one.scale(&half))?;
        let sys = GramSystem::new(basis.columns(), &target, basis.mode)?;
        if let Feasibility::Feasible(gram) = solve_margin(&sys)? {
            if let Some((g, sum)) = rounded_psd_gram(&sys, &gram) {
                let r = target.try_sub(&sum)?;
                let bound = r.l1_norm_bound();
                match l1_absorption_certificate(&r.neg(), &half) {
                    Ok(absorb) => {
                        let mut cert = certificate_from_gram(&sys.columns, &g, &shifted, Mode::Full)
                            .expect("rounded Gram matrix was checked PSD");
                        cert.squares.extend(absorb.squares);
                        return Ok(cert);
                    }
                    Err(_) => {
                        residual_error = Some(Error::ResidualTooLarge {
                            bound: fmt_rational(&bound),
                            available: fmt_rational(&half),
                        })
                    }
                }
            }
        }
    }
    match certify_sos(&shifted, basis) {
        Ok(mut cert) => {
            cert.mode = if basis.mode == Mode::Augmentation && shifted.augmentation().is_zero() {
                Mode::Augmentation
            } else {
                Mode::Full
            };
            Ok(cert)
        }
        Err(e) => Err(residual_error.unwrap_or(e)),
    }
}
