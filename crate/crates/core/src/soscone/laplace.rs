use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use super::certificate::{Mode, SosCertificate};
use super::exact::certify_sos;
use super::gram::{solve_margin, GramBasis, GramSystem};
use crate::error::{Error, Result};
use crate::groupalg::{c_of, laplacian, omega_squared_coefficients, AlgebraElement, AlgebraSpec, Word};
use crate::lp::{LinearProgram, Relation};
use crate::scalar::{fmt_rational, modulus_upper, rat, rint};
use crate::Rational;

/// Rational upper bound for `1/√2` used on cross terms.
pub fn cross_term_constant() -> Rational {
    rat(884, 1250)
}

/// `ν(e) = 0`, `ν(s) = 2` on `S`, and `ν(w) = min 2(ν(u) + ν(v))` over
/// splits `w = uv` into shorter nontrivial words, for the ball of `radius`.
pub fn nu_table(spec: &Arc<AlgebraSpec>, s: &[Word], radius: usize) -> BTreeMap<Word, Rational> {
    let words = spec.ball(radius);
    let mut nu: BTreeMap<Word, Rational> = BTreeMap::new();
    for w in &words {
        if spec.is_identity(w) {
            nu.insert(w.clone(), Rational::zero());
            continue;
        }
        let mut best: Option<Rational> = s.contains(w).then(|| rint(2));
        let len = spec.length(w);
        for u in &words {
            let lu = spec.length(u);
            if lu == 0 || lu >= len {
                continue;
            }
            let v = spec.mul(&spec.star(u), w);
            if spec.is_identity(&v) || spec.length(&v) >= len {
                continue;
            }
            if let (Some(a), Some(b)) = (nu.get(u), nu.get(&v)) {
                let c = (a + b) * rint(2);
                if best.as_ref().is_none_or(|x| c < *x) {
                    best = Some(c);
                }
            }
        }
        if let Some(b) = best {
            nu.insert(w.clone(), b);
        }
    }
    nu
}

fn pair_cost(nu: &BTreeMap<Word, Rational>, g: &Word, h: &Word) -> Option<Rational> {
    let (a, b) = (nu.get(g)?, nu.get(h)?);
    Some(if g == h {
        a.clone()
    } else {
        cross_term_constant() * (a + b)
    })
}

/// `C(b)` with `|φ(b)| ≤ C(b)·φ(Δ(S))` for every positive `φ` on `ω`.
///
/// For real `b` the representation `b = Σ β_gh c(g)*c(h)` is chosen by an
/// exact LP minimizing the bound; otherwise a basic solution is used.
pub fn laplacian_bound(b: &AlgebraElement, s: &[Word]) -> Result<Rational> {
    let spec = b.spec();
    if !b.is_hermitian() {
        return Err(Error::NonHermitianElement);
    }
    laplacian(spec, s)?;
    if b.is_zero() {
        return Ok(Rational::zero());
    }
    let deg = b.degree();
    let mut radii = vec![deg.div_ceil(2).max(1)];
    if deg > radii[0] {
        radii.push(deg);
    }
    for &radius in &radii {
        let nu = nu_table(spec, s, radius);
        if b.has_real_coefficients() {
            if let Some(c) = lp_bound(b, &nu, radius)? {
                return Ok(c);
            }
            continue;
        }
        let Some(beta) = omega_squared_coefficients(b, radius) else {
            continue;
        };
        let mut total = Rational::zero();
        for ((g, h), z) in &beta {
            let cost = pair_cost(&nu, g, h).ok_or_else(|| unreachable_word(spec, g, h))?;
            total += modulus_upper(z) * cost;
        }
        return Ok(total);
    }
    Err(Error::NotInOmegaSquared {
        radius: *radii.last().unwrap(),
    })
}

fn unreachable_word(spec: &AlgebraSpec, g: &Word, h: &Word) -> Error {
    Error::Precondition(format!(
        "no ν value for {} or {} (generating set does not reach them by splits)",
        spec.format_word(g),
        spec.format_word(h)
    ))
}

fn lp_bound(b: &AlgebraElement, nu: &BTreeMap<Word, Rational>, radius: usize) -> Result<Option<Rational>> {
    let spec = b.spec();
    let words: Vec<Word> = spec
        .ball(radius)
        .into_iter()
        .filter(|w| !spec.is_identity(w))
        .collect();
    let mut pairs = Vec::new();
    let mut costs = Vec::new();
    let mut products = Vec::new();
    for g in &words {
        let cg = c_of(spec, g).involution();
        for h in &words {
            let cost = pair_cost(nu, g, h).ok_or_else(|| unreachable_word(spec, g, h))?;
            pairs.push((g.clone(), h.clone()));
            costs.push(cost);
            products.push(cg.multiply(&c_of(spec, h))?);
        }
    }
    let mut index: BTreeMap<Word, usize> = BTreeMap::new();
    for p in products.iter().chain(std::iter::once(b)) {
        for w in p.support() {
            let next = index.len();
            index.entry(w.clone()).or_insert(next);
        }
    }
    let np = pairs.len();
    // β = β⁺ − β⁻, both nonnegative
    let mut lp = LinearProgram::new(2 * np);
    let mut rows = vec![vec![Rational::zero(); 2 * np]; index.len()];
    for (j, p) in products.iter().enumerate() {
        for (w, c) in p.terms() {
            rows[index[w]][j] = c.re.clone();
            rows[index[w]][np + j] = -c.re.clone();
        }
    }
    let mut rhs = vec![Rational::zero(); index.len()];
    for (w, c) in b.terms() {
        rhs[index[w]] = c.re.clone();
    }
    for (row, r) in rows.into_iter().zip(rhs) {
        lp.add(row, Relation::Eq, r);
    }
    lp.set_objective(costs.iter().chain(&costs).map(|c| -c.clone()).collect());
    Ok(lp.solve().optimal().map(|(_, v)| -v))
}

/// Smallest `C` (up to a relative bracket of `2⁻¹⁰`) with
/// `C·Δ(S) + b ∈ Σ²ω` at the given basis, with an exact certificate.
/// `S` is the standard symmetric generating set.
pub fn delta_interior_shift(b: &AlgebraElement, basis: &GramBasis) -> Result<(Rational, SosCertificate)> {
    let spec = b.spec();
    let s = spec.symmetric_generators();
    let delta = laplacian(spec, &s)?;
    let basis = GramBasis {
        spec: spec.clone(),
        mode: Mode::Augmentation,
        words: basis.words.iter().filter(|w| !spec.is_identity(w)).cloned().collect(),
    };
    if b.is_zero() {
        // Δ = ½ Σ c(s)*c(s)
        let mut cert = SosCertificate::new(delta, Mode::Augmentation);
        for w in &s {
            cert.push(rat(1, 2), c_of(spec, w));
        }
        return Ok((Rational::zero(), cert));
    }
    let cap = laplacian_bound(b, &s)?;
    let target = |c: &Rational| b.try_add(&delta.scale(c));
    let numeric_ok = |c: &Rational| -> Result<bool> {
        let sys = match GramSystem::new(basis.columns(), &target(c)?, Mode::Augmentation) {
            Ok(sys) => sys,
            Err(Error::Infeasible) | Err(Error::BasisDoesNotCover(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        Ok(solve_margin(&sys)?.is_feasible())
    };
    let exact = |c: &Rational| -> Option<SosCertificate> {
        let t = target(c).ok()?;
        certify_sos(&t, &basis).ok()
    };
    let zero = Rational::zero();
    if numeric_ok(&zero)? {
        if let Some(cert) = exact(&zero) {
            return Ok((zero, cert));
        }
    }
    let no_constant = || Error::NoFeasibleConstant {
        cap: fmt_rational(&cap),
        radius: basis.words.iter().map(|w| spec.length(w)).max().unwrap_or(0),
    };
    if !cap.is_positive() || !numeric_ok(&cap)? {
        return Err(no_constant());
    }
    let (mut lo, mut hi) = (zero, cap.clone());
    let width = &cap / rint(1024);
    while &hi - &lo > width {
        let mid = (&lo + &hi) / rint(2);
        if numeric_ok(&mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    for c in [hi.clone(), (&hi + &cap) / rint(2), cap.clone()] {
        if let Some(cert) = exact(&c) {
            return Ok((c, cert));
        }
    }
    Err(no_constant())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupalg::standard_laplacian;
    use crate::soscone::verify_certificate;

    #[test]
    fn nu_values() {
        let f2 = AlgebraSpec::free(2);
        let s = f2.symmetric_generators();
        let nu = nu_table(&f2, &s, 2);
        assert_eq!(nu[&f2.parse_word("a").unwrap()], rint(2));
        assert_eq!(nu[&f2.parse_word("ab").unwrap()], rint(8));
        assert_eq!(nu[&f2.identity()], rint(0));
    }

    #[test]
    fn bound_examples() {
        let f2 = AlgebraSpec::free(2);
        let s = f2.symmetric_generators();
        let a = f2.parse_word("a").unwrap();
        let ca = c_of(&f2, &a);
        let b = &ca.involution() * &ca;
        assert_eq!(laplacian_bound(&b, &s).unwrap(), rint(2));
        assert_eq!(laplacian_bound(&AlgebraElement::zero(&f2), &s).unwrap(), rint(0));
        let cb = c_of(&f2, &f2.parse_word("b").unwrap());
        let mixed = &(&ca.involution() * &cb) + &(&cb.involution() * &ca);
        let c = laplacian_bound(&mixed, &s).unwrap();
        assert!(c <= rat(566, 100));
        assert!(matches!(laplacian_bound(&ca, &s), Err(Error::NonHermitianElement)));
    }

    #[test]
    fn delta_shift_examples() {
        let f2 = AlgebraSpec::free(2);
        let basis = GramBasis::with_radius(&f2, Mode::Augmentation, 1);
        let (c, cert) = delta_interior_shift(&AlgebraElement::zero(&f2), &basis).unwrap();
        assert!(c.is_zero() && verify_certificate(&cert));
        assert_eq!(cert.target, standard_laplacian(&f2));

        let (c, cert) = delta_interior_shift(&standard_laplacian(&f2), &basis).unwrap();
        assert!(c.is_zero() && verify_certificate(&cert));

        let ca = c_of(&f2, &f2.parse_word("a").unwrap());
        let cb = c_of(&f2, &f2.parse_word("b").unwrap());
        let mixed = &(&ca.involution() * &cb) + &(&cb.involution() * &ca);
        let cap = laplacian_bound(&mixed, &f2.symmetric_generators()).unwrap();
        let (c, cert) = delta_interior_shift(&mixed, &basis).unwrap();
        assert!(verify_certificate(&cert));
        assert!(c <= cap);
        let (c2, cert2) = delta_interior_shift(&mixed.neg(), &basis).unwrap();
        assert!(verify_certificate(&cert2) && c2 <= cap);
    }
}
