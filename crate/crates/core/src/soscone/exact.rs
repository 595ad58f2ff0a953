use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::certificate::{moment_matrix, DualWitness, Mode, SosCertificate};
use super::gram::{realify, solve_margin, Feasibility, GramBasis, GramSystem, NumericGram, NumericWitness};
use crate::error::{Error, Result};
use crate::groupalg::{AlgebraElement, AlgebraSpec, Backend, Word};
use crate::linalg::{ldl_psd, nullspace, solve, Matrix};
use crate::scalar::{approx_rational, creal, rint, to_f64};
use crate::{CQMatrix, CRational, Rational};

const DENOMINATORS: [i64; 10] = [
    10,
    100,
    1_000,
    10_000,
    100_000,
    1_000_000,
    10_000_000,
    100_000_000,
    1_000_000_000,
    1 << 30,
];

/// Exact orthogonal projection onto `{x : A x = b}` for the retained rows.
struct Projector<'a> {
    sys: &'a GramSystem,
    aat: Matrix<Rational>,
}

impl<'a> Projector<'a> {
    fn new(sys: &'a GramSystem) -> Self {
        let k = sys.rows.len();
        let dense: Vec<BTreeMap<usize, Rational>> =
            sys.rows.iter().map(|r| r.coeffs.iter().cloned().collect()).collect();
        let mut aat = Matrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let (small, large) = if dense[i].len() <= dense[j].len() {
                    (&dense[i], &dense[j])
                } else {
                    (&dense[j], &dense[i])
                };
                let v: Rational = small
                    .iter()
                    .filter_map(|(s, a)| large.get(s).map(|b| a * b))
                    .sum();
                aat[(i, j)] = v.clone();
                aat[(j, i)] = v;
            }
        }
        Projector { sys, aat }
    }

    fn project(&self, mut x: Vec<Rational>) -> Option<Vec<Rational>> {
        let ax = self.sys.apply_exact(&x);
        let r: Vec<Rational> = ax
            .iter()
            .zip(&self.sys.rows)
            .map(|(v, row)| v - &row.rhs)
            .collect();
        if r.iter().all(Zero::is_zero) {
            return Some(x);
        }
        let u = solve(&self.aat, &r)?;
        for (row, uk) in self.sys.rows.iter().zip(&u) {
            if uk.is_zero() {
                continue;
            }
            for (s, a) in &row.coeffs {
                x[*s] -= a * uk;
            }
        }
        Some(x)
    }
}

/// Squares `a = Σ_j conj(l_j) e_j` from `G = Σ d l l*`.
pub fn certificate_from_gram(
    columns: &[AlgebraElement],
    g: &CQMatrix,
    target: &AlgebraElement,
    mode: Mode,
) -> Option<SosCertificate> {
    let terms = ldl_psd(g)?;
    let mut cert = SosCertificate::new(target.clone(), mode);
    for t in terms {
        let mut a = AlgebraElement::zero(target.spec());
        for (l, col) in t.vector.iter().zip(columns) {
            if !l.is_zero() {
                a = &a + &col.scale_complex(&l.conj());
            }
        }
        cert.push(t.weight, a);
    }
    Some(cert)
}

fn min_eigenvalue(g: &NumericGram, complex: bool) -> f64 {
    if g.a.nrows() == 0 {
        return 0.0;
    }
    realify(&g.a, &g.b, complex).symmetric_eigenvalues().min()
}

pub(crate) fn round_and_project_system(gram: &NumericGram, sys: &GramSystem) -> Result<SosCertificate> {
    let vars = sys.vars_from_gram(&gram.a, &gram.b);
    let projector = Projector::new(sys);
    let scale = vars.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for den in DENOMINATORS {
        let x: Vec<Rational> = vars.iter().map(|v| approx_rational(*v, den)).collect();
        // coarse rounding may only snap away solver noise
        if x.iter().zip(&vars).any(|(q, v)| (to_f64(q) - v).abs() > 1e-4 * scale) {
            continue;
        }
        let Some(x) = projector.project(x) else {
            return Err(Error::Infeasible);
        };
        let g = sys.exact_gram(&x);
        if let Some(cert) = certificate_from_gram(&sys.columns, &g, &sys.target, sys.mode) {
            return Ok(cert);
        }
    }
    Err(Error::ProjectionNotPsd {
        min_eigenvalue: min_eigenvalue(gram, sys.complex),
    })
}

/// Rounds a numeric Gram matrix, projects it exactly onto the constraints
/// and extracts squares from an exact LDL* factorization.
pub fn round_and_project(gram: &NumericGram, b: &AlgebraElement, basis: &GramBasis) -> Result<SosCertificate> {
    let sys = GramSystem::new(basis.columns(), b, basis.mode)?;
    if gram.a.nrows() != sys.n() {
        return Err(Error::DimensionMismatch {
            expected: sys.n(),
            got: gram.a.nrows(),
        });
    }
    round_and_project_system(gram, &sys)
}

/// Outcome of [`decide_sos`].
#[derive(Clone, Debug)]
pub enum SosVerdict {
    Certified(SosCertificate),
    Refuted(DualWitness),
}

/// Certificate for `b` over `basis`, reducing to a face of the PSD cone
/// whenever the numeric Gram matrix is singular.
pub fn certify_sos(b: &AlgebraElement, basis: &GramBasis) -> Result<SosCertificate> {
    match decide_sos(b, basis)? {
        SosVerdict::Certified(c) => Ok(c),
        SosVerdict::Refuted(_) => Err(Error::Infeasible),
    }
}

/// Exact verdict at the given basis: a certificate or a rational witness.
pub fn decide_sos(b: &AlgebraElement, basis: &GramBasis) -> Result<SosVerdict> {
    decide_sos_seeded(b, basis, DEFAULT_SEED)
}

/// Seed of the random reference state used for free *-algebras.
pub const DEFAULT_SEED: u64 = 7;

/// [`decide_sos`] with an explicit seed for the witness reference state.
pub fn decide_sos_seeded(b: &AlgebraElement, basis: &GramBasis, seed: u64) -> Result<SosVerdict> {
    let mut sys = GramSystem::new(basis.columns(), b, basis.mode)?;
    let mut first = true;
    loop {
        let gram = match solve_margin(&sys)? {
            Feasibility::Infeasible(w) => {
                if !first {
                    return Err(Error::ProjectionNotPsd { min_eigenvalue: w.value });
                }
                return Ok(SosVerdict::Refuted(rationalize_witness_seeded(&w, b, basis, seed)?));
            }
            Feasibility::Feasible(g) => g,
        };
        first = false;
        let err = match round_and_project_system(&gram, &sys) {
            Ok(c) => return Ok(SosVerdict::Certified(c)),
            Err(e) => e,
        };
        let kernel = numeric_kernel(&gram, sys.complex);
        if kernel.is_empty() {
            return Err(err);
        }
        let k = match rationalize_rows(&kernel) {
            Some(k) if k.rows() < sys.n() => k,
            _ => return Err(err),
        };
        let w = nullspace(&k);
        let columns: Vec<AlgebraElement> = w
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&sys.columns)
                    .filter(|(c, _)| !c.is_zero())
                    .fold(AlgebraElement::zero(b.spec()), |acc, (c, col)| {
                        &acc + &col.scale_complex(&c.conj())
                    })
            })
            .collect();
        sys = GramSystem::new(columns, b, basis.mode)?;
    }
}

/// Complex kernel vectors of a numeric hermitian Gram matrix.
fn numeric_kernel(g: &NumericGram, complex: bool) -> Vec<Vec<Complex<f64>>> {
    let n = g.a.nrows();
    let z = realify(&g.a, &g.b, complex);
    let eig = z.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::new();
    for (k, v) in eig.eigenvalues.iter().enumerate() {
        if v.abs() > 1e-6 * top {
            continue;
        }
        let col = eig.eigenvectors.column(k);
        let vec: Vec<Complex<f64>> = if complex {
            (0..n).map(|i| Complex::new(col[i], col[n + i])).collect()
        } else {
            (0..n).map(|i| Complex::new(col[i], 0.0)).collect()
        };
        out.push(vec);
    }
    out
}

/// Conjugated, rationalized rows of the RREF of a numeric kernel basis.
fn rationalize_rows(kernel: &[Vec<Complex<f64>>]) -> Option<Matrix<CRational>> {
    let mut m: Vec<Vec<Complex<f64>>> = kernel.to_vec();
    let (rows, cols) = (m.len(), m[0].len());
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let p = (r..rows).max_by(|&a, &b| m[a][c].norm().total_cmp(&m[b][c].norm()))?;
        if m[p][c].norm() < 1e-7 {
            continue;
        }
        m.swap(p, r);
        let inv = Complex::new(1.0, 0.0) / m[r][c];
        for j in 0..cols {
            m[r][j] *= inv;
        }
        for i in 0..rows {
            if i != r {
                let f = m[i][c];
                for j in 0..cols {
                    let v = m[r][j];
                    m[i][j] -= f * v;
                }
            }
        }
        r += 1;
    }
    m.truncate(r);
    // eigenvectors near a boundary are only accurate to ~1e-6, so small
    // denominators are accepted with a coarser tolerance
    let den = DENOMINATORS.iter().copied().find(|&d| {
        let tol = (1e-3 / d as f64).max(1e-7);
        m.iter().flatten().all(|z| {
            (to_f64(&approx_rational(z.re, d)) - z.re).abs() < tol
                && (to_f64(&approx_rational(z.im, d)) - z.im).abs() < tol
        })
    })?;
    // G v = 0 with G = W H W* needs W* v = 0, i.e. conj(v)ᵀ w = 0
    Some(Matrix::from_fn(r, cols, |i, j| {
        CRational::new(approx_rational(m[i][j].re, den), -approx_rational(m[i][j].im, den))
    }))
}

/// Trace state used to push a rounded dual functional into the interior.
pub fn reference_state(spec: &Arc<AlgebraSpec>, words: &[Word], seed: u64) -> BTreeMap<Word, CRational> {
    match &spec.backend {
        Backend::FreeStar { rank, hermitian } => {
            let size = 6;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mats: Vec<Matrix<Rational>> = (0..*rank)
                .map(|_| {
                    let m = Matrix::from_fn(size, size, |_, _| rint(rng.gen_range(-3..=3)));
                    if *hermitian {
                        m.add(&m.transpose())
                    } else {
                        m
                    }
                })
                .collect();
            let size_q = rint(size as i64);
            words
                .iter()
                .map(|w| {
                    let mut acc = Matrix::<Rational>::identity(size);
                    for &l in &w.0 {
                        let x = &mats[l.unsigned_abs() as usize - 1];
                        acc = if l > 0 { acc.mul(x) } else { acc.mul(&x.transpose()) };
                    }
                    (w.clone(), creal(acc.trace() / &size_q))
                })
                .collect()
        }
        _ => words
            .iter()
            .map(|w| {
                let v = if spec.is_identity(w) { rint(1) } else { rint(0) };
                (w.clone(), creal(v))
            })
            .collect(),
    }
}

/// Exact witness from a numeric dual functional: rationalize, then mix in a
/// small multiple of a reference state until the moment matrix is PSD.
pub fn rationalize_witness(w: &NumericWitness, b: &AlgebraElement, basis: &GramBasis) -> Result<DualWitness> {
    rationalize_witness_seeded(w, b, basis, DEFAULT_SEED)
}

pub fn rationalize_witness_seeded(
    w: &NumericWitness,
    b: &AlgebraElement,
    basis: &GramBasis,
    seed: u64,
) -> Result<DualWitness> {
    let spec = b.spec();
    let cols = basis.columns();
    let mut words: Vec<Word> = Vec::new();
    for ci in &cols {
        let cs = ci.involution();
        for cj in &cols {
            words.extend(cs.multiply(cj)?.support().cloned());
        }
    }
    words.extend(b.support().cloned());
    words.sort();
    words.dedup();
    let tau = reference_state(spec, &words, seed);
    let rounded: BTreeMap<Word, CRational> = words
        .iter()
        .map(|u| {
            let z = w.functional.get(u).copied().unwrap_or_default();
            (
                u.clone(),
                CRational::new(approx_rational(z.re, 1 << 30), approx_rational(z.im, 1 << 30)),
            )
        })
        .collect();
    let mut t = Rational::new(1.into(), 100_000_000.into());
    let one = rint(1);
    while t < one {
        let mixed: BTreeMap<Word, CRational> = words
            .iter()
            .map(|u| {
                let v = rounded[u].clone() * creal(&one - &t) + tau[u].clone() * creal(t.clone());
                (u.clone(), v)
            })
            .collect();
        let m = moment_matrix(spec, basis.mode, &basis.words, &mixed)?;
        let value = super::certificate::apply(&mixed, b).re;
        if value.is_negative() && ldl_psd(&m).is_some() {
            // normalize to φ(e) = 1 when possible
            let e = mixed.get(&spec.identity()).map(|z| z.re.clone()).unwrap_or_default();
            let mixed = if e.is_positive() {
                mixed.into_iter().map(|(u, z)| (u, z / creal(e.clone()))).collect()
            } else {
                mixed
            };
            return DualWitness::new(spec, basis.mode, basis.words.clone(), mixed, b);
        }
        t *= rint(4);
    }
    Err(Error::MomentNotPsd)
}


/// Rounds the numeric Gram matrix without projecting; the result is PSD but
/// misses the target by a small residual.
pub(crate) fn rounded_psd_gram(sys: &GramSystem, gram: &NumericGram) -> Option<(CQMatrix, AlgebraElement)> {
    let vars = sys.vars_from_gram(&gram.a, &gram.b);
    for den in [1_000_000, 1_000_000_000] {
        let x: Vec<Rational> = vars.iter().map(|v| approx_rational(*v, den)).collect();
        let g = sys.exact_gram(&x);
        if ldl_psd(&g).is_some() {
            let mut sum = AlgebraElement::zero(sys.target.spec());
            let n = sys.n();
            for i in 0..n {
                let ci = sys.columns[i].involution();
                for j in 0..n {
                    if !g[(i, j)].is_zero() {
                        let p = ci.multiply(&sys.columns[j]).ok()?;
                        sum = &sum + &p.scale_complex(&g[(i, j)]);
                    }
                }
            }
            return Some((g, sum));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupalg::standard_laplacian;
    use crate::soscone::{gram_basis, sos_feasibility, verify_certificate};
    use nalgebra::DMatrix;

    fn el(spec: &Arc<AlgebraSpec>, t: &[(&str, i64)]) -> AlgebraElement {
        AlgebraElement::from_int_terms(spec, t).unwrap()
    }

    #[test]
    fn rank_one_projection() {
        let f1 = AlgebraSpec::free(1);
        let b = el(&f1, &[("", 2), ("a", -1), ("A", -1)]);
        let basis = gram_basis(&b, Mode::Full).unwrap();
        let Feasibility::Feasible(g) = sos_feasibility(&b, &basis).unwrap() else {
            panic!("feasible expected")
        };
        let cert = round_and_project(&g, &b, &basis).unwrap();
        assert!(verify_certificate(&cert));
        // the analytic center mixes (1 − g) and (1 − g⁻¹); every square stays in ω
        assert!(cert.squares.len() <= 2);
        assert!(cert.squares.iter().all(|(_, a)| a.augmentation().is_zero()));
    }

    #[test]
    fn identity_gram_and_perturbation() {
        let f1 = AlgebraSpec::free(1);
        let basis = GramBasis::with_radius(&f1, Mode::Full, 1);
        let mut b = AlgebraElement::zero(&f1);
        for c in basis.columns() {
            b = &b + &(&c.involution() * &c);
        }
        let id = NumericGram {
            a: DMatrix::identity(3, 3),
            b: DMatrix::zeros(3, 3),
            lambda: 1.0,
            iterations: 0,
        };
        let cert = round_and_project(&id, &b, &basis).unwrap();
        assert!(verify_certificate(&cert));
        let mut bad = id.clone();
        bad.a[(0, 0)] = -1e-3;
        bad.a[(1, 1)] = 1.0 + 1e-3;
        let target = el(&f1, &[("", 2)]);
        assert!(matches!(
            round_and_project(&bad, &target, &basis),
            Err(Error::ProjectionNotPsd { .. })
        ));
    }

    #[test]
    fn witness_for_negative_laplacian() {
        let f2 = AlgebraSpec::free(2);
        let b = standard_laplacian(&f2).neg();
        let basis = gram_basis(&b, Mode::Full).unwrap();
        match decide_sos(&b, &basis).unwrap() {
            SosVerdict::Refuted(w) => {
                assert!(w.verify(&b));
                assert!(w.value_at_target.is_negative());
            }
            SosVerdict::Certified(_) => panic!("-Δ is not a sum of squares"),
        }
    }

    #[test]
    fn boundary_target_via_face() {
        let f1 = AlgebraSpec::free(1);
        let b = el(&f1, &[("", 2), ("a", 1), ("A", 1)]);
        let basis = GramBasis::with_radius(&f1, Mode::Full, 1);
        assert!(verify_certificate(&certify_sos(&b, &basis).unwrap()));
        let f2 = AlgebraSpec::free(2);
        let delta = standard_laplacian(&f2);
        let basis = gram_basis(&delta, Mode::Augmentation).unwrap();
        let cert = certify_sos(&delta, &basis).unwrap();
        assert!(verify_certificate(&cert));
        assert_eq!(cert.mode, Mode::Augmentation);
    }

    #[test]
    fn free_star_witness() {
        let fs = AlgebraSpec::free_star(1, true);
        let x = AlgebraElement::parse_word(&fs, "a").unwrap();
        let b = &(&x * &x).neg() + &AlgebraElement::zero(&fs);
        let basis = GramBasis::with_radius(&fs, Mode::Full, 1);
        match decide_sos(&b, &basis).unwrap() {
            SosVerdict::Refuted(w) => assert!(w.verify(&b)),
            SosVerdict::Certified(_) => panic!("-x² is not a sum of squares"),
        }
    }
}
