use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::{One, Zero};

use super::certificate::Mode;
use super::sdp::{SdpOptions, SdpProblem, SparseSym};
use crate::error::{Error, Result};
use crate::groupalg::{AlgebraElement, AlgebraSpec, Word};
use crate::linalg::{independent_rows, Matrix};
use crate::scalar::to_f64;
use crate::{CQMatrix, CRational, Rational};

/// Words indexing the rows/columns of a Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GramBasis {
    pub spec: Arc<AlgebraSpec>,
    pub mode: Mode,
    pub words: Vec<Word>,
}

impl GramBasis {
    pub fn with_radius(spec: &Arc<AlgebraSpec>, mode: Mode, radius: usize) -> Self {
        let mut words = spec.ball(radius);
        if mode == Mode::Augmentation {
            words.retain(|w| !spec.is_identity(w));
        }
        GramBasis {
            spec: spec.clone(),
            mode,
            words,
        }
    }

    pub fn columns(&self) -> Vec<AlgebraElement> {
        self.words.iter().map(|w| self.mode.column(&self.spec, w)).collect()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Ball of radius `⌈deg b / 2⌉` (without `e` in augmentation mode).
pub fn gram_basis(b: &AlgebraElement, mode: Mode) -> Result<GramBasis> {
    if !b.is_hermitian() {
        return Err(Error::NonHermitianElement);
    }
    Ok(GramBasis::with_radius(b.spec(), mode, b.degree().div_ceil(2)))
}

/// Linear constraints `Σ_{ij} G_ij (e_i* e_j)_w = b_w` on a hermitian Gram
/// matrix `G = A + iB` over arbitrary column elements `e_i`.
///
/// Unknowns live in an `n × n` array: slot `(i, j)` with `i ≤ j` holds
/// `A_ij`, slot `(j, i)` with `i < j` holds `B_ij`.
#[derive(Clone, Debug)]
pub struct GramSystem {
    pub spec: Arc<AlgebraSpec>,
    pub mode: Mode,
    pub columns: Vec<AlgebraElement>,
    pub complex: bool,
    pub target: AlgebraElement,
    /// Retained (independent) rows: word, imaginary-part flag, sparse
    /// coefficients, right-hand side.
    pub rows: Vec<GramRow>,
}

#[derive(Clone, Debug)]
pub struct GramRow {
    pub word: Word,
    pub imaginary: bool,
    pub coeffs: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

impl GramSystem {
    pub fn n(&self) -> usize {
        self.columns.len()
    }

    pub fn nvars(&self) -> usize {
        self.n() * self.n()
    }

    pub fn new(columns: Vec<AlgebraElement>, target: &AlgebraElement, mode: Mode) -> Result<Self> {
        if !target.is_hermitian() {
            return Err(Error::NonHermitianElement);
        }
        let spec = target.spec().clone();
        let n = columns.len();
        let mut products = vec![vec![AlgebraElement::zero(&spec); n]; n];
        for i in 0..n {
            let ci = columns[i].involution();
            for j in 0..n {
                products[i][j] = ci.multiply(&columns[j])?;
            }
        }
        let complex = !target.has_real_coefficients()
            || products.iter().flatten().any(|p| !p.has_real_coefficients());

        // word → list of (i, j, coefficient)
        let mut occurrences: BTreeMap<Word, Vec<(usize, usize, CRational)>> = BTreeMap::new();
        for (i, row) in products.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                for (w, c) in p.terms() {
                    occurrences.entry(w.clone()).or_default().push((i, j, c.clone()));
                }
            }
        }
        for w in target.support() {
            if !occurrences.contains_key(w) {
                return Err(Error::BasisDoesNotCover(spec.format_word(w)));
            }
        }

        let mut all_rows = Vec::new();
        for (w, occ) in &occurrences {
            let ws = spec.star(w);
            if ws < *w {
                continue;
            }
            let parts: &[bool] = if complex && ws != *w { &[false, true] } else { &[false] };
            let bw = target.coefficient(w);
            for &imaginary in parts {
                let mut dense: BTreeMap<usize, Rational> = BTreeMap::new();
                let mut add = |slot: usize, v: Rational| {
                    if !v.is_zero() {
                        let e = dense.entry(slot).or_insert_with(Rational::zero);
                        *e += v;
                    }
                };
                for (i, j, c) in occ {
                    let (p, q) = (c.re.clone(), c.im.clone());
                    let (i, j) = (*i, *j);
                    if i == j {
                        add(i * n + i, if imaginary { q } else { p });
                    } else {
                        let (lo, hi) = (i.min(j), i.max(j));
                        let a_slot = lo * n + hi;
                        let b_slot = hi * n + lo;
                        // G_ij = A ± iB with + for i < j
                        let sgn = if i < j { Rational::one() } else { -Rational::one() };
                        if imaginary {
                            add(a_slot, q.clone());
                            add(b_slot, &sgn * p);
                        } else {
                            add(a_slot, p.clone());
                            add(b_slot, -(&sgn * q));
                        }
                    }
                }
                let rhs = if imaginary { bw.im.clone() } else { bw.re.clone() };
                dense.retain(|_, v| !v.is_zero());
                all_rows.push(GramRow {
                    word: w.clone(),
                    imaginary,
                    coeffs: dense.into_iter().collect(),
                    rhs,
                });
            }
        }

        let nvars = n * n;
        let keep = {
            let m = Matrix::from_fn(all_rows.len(), nvars + 1, |r, c| {
                if c == nvars {
                    all_rows[r].rhs.clone()
                } else {
                    Rational::zero()
                }
            });
            let mut m = m;
            for (r, row) in all_rows.iter().enumerate() {
                for (c, v) in &row.coeffs {
                    m[(r, *c)] = v.clone();
                }
            }
            let with_rhs = independent_rows(&m);
            let mut lhs = m;
            for r in 0..all_rows.len() {
                lhs[(r, nvars)] = Rational::zero();
            }
            let without = independent_rows(&lhs);
            if with_rhs.len() != without.len() {
                return Err(Error::Infeasible);
            }
            without
        };
        let rows = keep.into_iter().map(|r| all_rows[r].clone()).collect();
        Ok(GramSystem {
            spec,
            mode,
            columns,
            complex,
            target: target.clone(),
            rows,
        })
    }

    /// Row values of the identity Gram matrix.
    pub fn identity_image(&self) -> Vec<Rational> {
        let n = self.n();
        self.rows
            .iter()
            .map(|r| {
                r.coeffs
                    .iter()
                    .filter(|(s, _)| s / n == s % n)
                    .map(|(_, v)| v.clone())
                    .sum()
            })
            .collect()
    }

    pub fn apply_exact(&self, vars: &[Rational]) -> Vec<Rational> {
        self.rows
            .iter()
            .map(|r| r.coeffs.iter().map(|(s, v)| v * &vars[*s]).sum())
            .collect()
    }

    pub fn exact_gram(&self, vars: &[Rational]) -> CQMatrix {
        let n = self.n();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                CRational::new(vars[i * n + i].clone(), Rational::zero())
            } else {
                let (lo, hi) = (i.min(j), i.max(j));
                let a = vars[lo * n + hi].clone();
                let b = vars[hi * n + lo].clone();
                if i < j {
                    CRational::new(a, b)
                } else {
                    CRational::new(a, -b)
                }
            }
        })
    }

    /// Numeric unknowns from a hermitian Gram matrix `A + iB`.
    pub fn vars_from_gram(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
        let n = self.n();
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                v[i * n + j] = 0.5 * (a[(i, j)] + a[(j, i)]);
                if i < j && self.complex {
                    v[j * n + i] = 0.5 * (b[(i, j)] - b[(j, i)]);
                }
            }
        }
        v
    }

    /// Size of the real PSD block (`n`, or `2n` for the realification).
    pub fn block_size(&self) -> usize {
        if self.complex {
            2 * self.n()
        } else {
            self.n()
        }
    }

    fn sdp_matrix(&self, row: &GramRow) -> SparseSym {
        let n = self.n();
        let mut m = SparseSym::default();
        for (slot, v) in &row.coeffs {
            let c = to_f64(v);
            let (r, s) = (slot / n, slot % n);
            if !self.complex {
                // A_rs = Z_rs
                m.push(r, s, if r == s { c } else { c / 2.0 });
            } else if r <= s {
                // A_rs = (Z_rs + Z_{n+r,n+s}) / 2
                let w = if r == s { c / 2.0 } else { c / 4.0 };
                m.push(r, s, w);
                m.push(n + r, n + s, w);
            } else {
                // slot (r, s) with r > s holds B_sr = (Z_{n+s,r} − Z_{s,n+r}) / 2
                let (i, j) = (s, r);
                m.push(n + i, j, c / 4.0);
                m.push(i, n + j, -c / 4.0);
            }
        }
        m
    }

    /// `(A, B)` with `G = A + iB` from a realified block `Z`.
    pub fn gram_from_block(&self, z: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n();
        if !self.complex {
            return (z.clone(), DMatrix::zeros(n, n));
        }
        let a = DMatrix::from_fn(n, n, |i, j| 0.5 * (z[(i, j)] + z[(n + i, n + j)]));
        let b = DMatrix::from_fn(n, n, |i, j| 0.5 * (z[(n + i, j)] - z[(i, n + j)]));
        (a, b)
    }

    /// Least-squares numeric solution of the constraints.
    fn particular(&self) -> Vec<f64> {
        let nv = self.nvars();
        let k = self.rows.len();
        let mut m = DMatrix::zeros(k, nv);
        for (r, row) in self.rows.iter().enumerate() {
            for (s, v) in &row.coeffs {
                m[(r, *s)] = to_f64(v);
            }
        }
        let rhs = DVector::from_iterator(k, self.rows.iter().map(|r| to_f64(&r.rhs)));
        // minimal-norm solution x = Mᵀ (M Mᵀ)⁻¹ rhs
        let mmt = &m * m.transpose();
        let y = mmt
            .clone()
            .cholesky()
            .map(|c| c.solve(&rhs))
            .unwrap_or_else(|| mmt.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(k)));
        (m.transpose() * y).iter().copied().collect()
    }
}

/// Numeric Gram matrix `A + iB` with its interior margin `λ*`.
#[derive(Clone, Debug)]
pub struct NumericGram {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Largest `λ` with `G − λI ⪰ 0` found by the solver.
    pub lambda: f64,
    pub iterations: usize,
}

/// Numeric dual functional: `φ(w)` on the constraint words, normalized by
/// `tr M(φ) = 1`, with `φ(target) = value < 0`.
#[derive(Clone, Debug)]
pub struct NumericWitness {
    pub functional: BTreeMap<Word, Complex<f64>>,
    pub value: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub enum Feasibility {
    Feasible(NumericGram),
    Infeasible(NumericWitness),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Threshold on the optimal margin `λ*` below which the verdict is
/// infeasible.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-7;

/// Solves `max λ` subject to `Σ G_ij e_i* e_j = b`, `G − λI ⪰ 0`.
pub fn solve_margin(sys: &GramSystem) -> Result<Feasibility> {
    let n = sys.n();
    if n == 0 {
        return if sys.target.is_zero() {
            Ok(Feasibility::Feasible(NumericGram {
                a: DMatrix::zeros(0, 0),
                b: DMatrix::zeros(0, 0),
                lambda: f64::INFINITY,
                iterations: 0,
            }))
        } else {
            Err(Error::BasisDoesNotCover("(empty basis)".into()))
        };
    }
    if sys.rows.is_empty() {
        // the Gram matrix is unconstrained
        let a = DMatrix::identity(n, n);
        return Ok(Feasibility::Feasible(NumericGram {
            a,
            b: DMatrix::zeros(n, n),
            lambda: 1.0,
            iterations: 0,
        }));
    }
    let p = sys.particular();
    let mut ga = DMatrix::zeros(n, n);
    let mut gb = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (lo, hi) = (i.min(j), i.max(j));
            ga[(i, j)] = p[lo * n + hi];
            if i != j && sys.complex {
                let b = p[hi * n + lo];
                gb[(i, j)] = if i < j { b } else { -b };
            }
        }
    }
    let lmin = realify(&ga, &gb, sys.complex).symmetric_eigenvalues().min();
    let lower = (lmin - 1.0).min(-1.0);

    let id = sys.identity_image();
    let big = sys.block_size();
    let problem = SdpProblem {
        n: big,
        c: DMatrix::zeros(big, big),
        c_lp: vec![-1.0],
        a: sys.rows.iter().map(|r| sys.sdp_matrix(r)).collect(),
        a_lp: id.iter().map(|v| vec![to_f64(v)]).collect(),
        b: sys
            .rows
            .iter()
            .zip(&id)
            .map(|(r, i)| to_f64(&r.rhs) - lower * to_f64(i))
            .collect(),
    };
    let sol = problem.solve(&SdpOptions::default())?;
    let lambda = lower + sol.x_lp[0];
    let scale = 1.0 + to_f64(&sys.target.l1_norm_bound());
    if lambda >= -FEASIBILITY_TOLERANCE * scale {
        let z = &sol.x + DMatrix::identity(big, big) * lambda;
        let (a, b) = sys.gram_from_block(&z);
        return Ok(Feasibility::Feasible(NumericGram {
            a,
            b,
            lambda,
            iterations: sol.iterations,
        }));
    }
    // dual variables z = −y give φ on the canonical words
    let mut functional: BTreeMap<Word, Complex<f64>> = BTreeMap::new();
    let mut parts: BTreeMap<Word, (f64, f64)> = BTreeMap::new();
    for (k, row) in sys.rows.iter().enumerate() {
        let e = parts.entry(row.word.clone()).or_insert((0.0, 0.0));
        if row.imaginary {
            e.1 = -sol.y[k];
        } else {
            e.0 = -sol.y[k];
        }
    }
    for (w, (re, im)) in parts {
        let ws = sys.spec.star(&w);
        if ws == w {
            functional.insert(w, Complex::new(re, 0.0));
        } else {
            // φ(w) = conj(ζ)/2, φ(w*) = ζ/2
            functional.insert(w, Complex::new(re / 2.0, -im / 2.0));
            functional.insert(ws, Complex::new(re / 2.0, im / 2.0));
        }
    }
    Ok(Feasibility::Infeasible(NumericWitness {
        functional,
        value: lambda,
        iterations: sol.iterations,
    }))
}

pub(crate) fn realify(a: &DMatrix<f64>, b: &DMatrix<f64>, complex: bool) -> DMatrix<f64> {
    if !complex {
        return (a + a.transpose()) * 0.5;
    }
    let n = a.nrows();
    let mut z = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            z[(i, j)] = a[(i, j)];
            z[(n + i, n + j)] = a[(i, j)];
            z[(i, n + j)] = -b[(i, j)];
            z[(n + i, j)] = b[(i, j)];
        }
    }
    (&z + z.transpose()) * 0.5
}

/// Numeric SOS test of `b` over `basis`.
pub fn sos_feasibility(b: &AlgebraElement, basis: &GramBasis) -> Result<Feasibility> {
    let sys = GramSystem::new(basis.columns(), b, basis.mode)?;
    solve_margin(&sys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(spec: &Arc<AlgebraSpec>, t: &[(&str, i64)]) -> AlgebraElement {
        AlgebraElement::from_int_terms(spec, t).unwrap()
    }

    #[test]
    fn free_group_verdicts() {
        let f1 = AlgebraSpec::free(1);
        let b = el(&f1, &[("", 2), ("a", -1), ("A", -1)]);
        let basis = gram_basis(&b, Mode::Full).unwrap();
        assert_eq!(basis.len(), 3);
        assert!(sos_feasibility(&b, &basis).unwrap().is_feasible());
        let bad = el(&f1, &[("a", 1), ("A", 1)]);
        match sos_feasibility(&bad, &basis).unwrap() {
            Feasibility::Infeasible(w) => {
                assert!(w.value < -1e-3);
                let v = w.functional[&f1.parse_word("a").unwrap()].re;
                assert!(v < 0.0);
            }
            _ => panic!("expected infeasible"),
        }
    }

    #[test]
    fn complex_target() {
        let f1 = AlgebraSpec::free(1);
        let a = AlgebraElement::monomial(&f1, f1.parse_word("a").unwrap(), crate::scalar::cint(0, 1));
        let x = &AlgebraElement::one(&f1) + &a;
        let b = &x.involution() * &x;
        let basis = gram_basis(&b, Mode::Full).unwrap();
        let f = sos_feasibility(&b, &basis).unwrap();
        assert!(f.is_feasible());
    }

    #[test]
    fn uncovered_word() {
        let f2 = AlgebraSpec::free(2);
        let b = el(&f2, &[("aa", 1), ("AA", 1)]);
        let basis = GramBasis::with_radius(&f2, Mode::Augmentation, 0);
        assert!(matches!(
            GramSystem::new(basis.columns(), &b, Mode::Augmentation),
            Err(Error::BasisDoesNotCover(_))
        ));
    }
}
