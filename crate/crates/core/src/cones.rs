//! Lexicographic separation for finitely generated convex cones.
//!
//! A point outside a cone is separated by a functional with values in the
//! infinitesimal field: the leading stage is an ordinary separating covector
//! and every later stage lives one infinitesimal level down, making the
//! functional strictly positive on each generator outside the lineality
//! space. Everything is exact; the LP oracle is [`crate::lp`].

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{independent_rows, solve, Matrix};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::rcf::{level_exponent, truncation_from_env, RcfScalar};
use crate::scalar::rat;
use crate::Rational;

pub type QVector = Vec<Rational>;

/// Cone generated by finitely many rational vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeV {
    dim: usize,
    generators: Vec<QVector>,
}

impl ConeV {
    pub fn new(dim: usize, generators: Vec<QVector>) -> Result<Self> {
        for g in &generators {
            if g.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: g.len(),
                });
            }
            if g.iter().all(Zero::is_zero) {
                return Err(Error::Precondition("zero generator".into()));
            }
        }
        Ok(ConeV { dim, generators })
    }

    pub fn from_ints(dim: usize, generators: &[&[i64]]) -> Result<Self> {
        Self::new(dim, generators.iter().map(|g| ints(g)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[QVector] {
        &self.generators
    }

    fn check(&self, v: &[Rational]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }
}

pub fn ints(v: &[i64]) -> QVector {
    v.iter().map(|&x| Rational::from_integer(x.into())).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Membership {
    /// Nonnegative coefficients with `Σ c_j g_j = x`.
    Inside(Vec<Rational>),
    /// A covector `y` with `y·g ≥ 0` on all generators and `y·x < 0`.
    Outside(QVector),
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside(_))
    }
}

pub fn membership(c: &ConeV, x: &[Rational]) -> Result<Membership> {
    c.check(x)?;
    let m = c.generators.len();
    let mut lp = LinearProgram::new(m);
    for i in 0..c.dim {
        let row = c.generators.iter().map(|g| g[i].clone()).collect();
        lp.add(row, Relation::Eq, x[i].clone());
    }
    if let LpOutcome::Optimal { x: coeffs, .. } = lp.solve() {
        return Ok(Membership::Inside(coeffs));
    }
    // Farkas covector from the dual side
    let n = c.dim;
    let mut lp = LinearProgram::new(n);
    for j in 0..n {
        lp.set_free(j);
        lp.add_bounds(j, -Rational::one(), Rational::one());
    }
    for g in &c.generators {
        lp.add(g.clone(), Relation::Ge, Rational::zero());
    }
    lp.set_objective(x.iter().map(|v| -v.clone()).collect());
    let (y, _) = lp
        .solve()
        .optimal()
        .expect("bounded Farkas program is feasible");
    Ok(Membership::Outside(y))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lineality {
    /// Basis of `C ∩ −C`.
    pub basis: Vec<QVector>,
    /// Generators `g_j` with `−g_j ∈ C`, each with coefficients for `−g_j`.
    pub members: Vec<(usize, Vec<Rational>)>,
}

impl Lineality {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

pub fn lineality(c: &ConeV) -> Lineality {
    let mut members = Vec::new();
    for (j, g) in c.generators.iter().enumerate() {
        let neg: QVector = g.iter().map(|v| -v.clone()).collect();
        if let Ok(Membership::Inside(coeffs)) = membership(c, &neg) {
            members.push((j, coeffs));
        }
    }
    let vectors: Vec<QVector> = members.iter().map(|(j, _)| c.generators[*j].clone()).collect();
    Lineality {
        basis: span_basis(&vectors),
        members,
    }
}

fn span_basis(vectors: &[QVector]) -> Vec<QVector> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = Matrix::from_rows(vectors.to_vec());
    independent_rows(&m).into_iter().map(|i| vectors[i].clone()).collect()
}

/// Functional `Σ ε_i φ_i` with `ε_1 = 1` and later levels given by the
/// infinitesimal schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct LexFunctional {
    pub stages: Vec<QVector>,
    /// Indices of the generators active when each stage was computed.
    pub active_sets: Vec<Vec<usize>>,
}

impl LexFunctional {
    pub fn from_stages(stages: Vec<QVector>) -> Self {
        let active_sets = vec![Vec::new(); stages.len()];
        LexFunctional {
            stages,
            active_sets,
        }
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }
}

/// `Σ_i ε_i⟨φ_i, v⟩`. The truncation window is widened when there are more
/// stages than the configured order admits.
pub fn evaluate_lex(f: &LexFunctional, v: &[Rational]) -> Result<RcfScalar> {
    let k = f.stages.len() as u32;
    if k > 32 {
        return Err(Error::TruncationExceeded {
            exponent: u32::MAX,
            order: truncation_from_env(),
        });
    }
    let order = truncation_from_env().max(if k == 0 { 0 } else { level_exponent(k - 1) });
    let mut out = RcfScalar::zero_with_order(order);
    for (i, phi) in f.stages.iter().enumerate() {
        if phi.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: phi.len(),
                got: v.len(),
            });
        }
        let value = dot(phi, v);
        if !value.is_zero() {
            out = out + RcfScalar::monomial(value, level_exponent(i as u32), order)?;
        }
    }
    Ok(out)
}

/// One covector stage: `φ ≥ 0` on `active`, maximizing the number of strictly
/// positive active generators; if `x` is given, additionally `φ(x) < 0`.
/// Returns `None` when no active generator can be made positive and no
/// point is pending.
fn flag_stage(
    dim: usize,
    gens: &[QVector],
    active: &[usize],
    x: Option<&[Rational]>,
) -> Result<Option<QVector>> {
    let base = |extra: usize| {
        let mut lp = LinearProgram::new(dim + extra);
        for j in 0..dim {
            lp.set_free(j);
            lp.add_bounds(j, -Rational::one(), Rational::one());
        }
        lp
    };
    let pad = |v: &[Rational], extra: usize| {
        let mut row = v.to_vec();
        row.resize(dim + extra, Rational::zero());
        row
    };

    let mut x_margin = None;
    if let Some(x) = x {
        // maximize s subject to φ(x) + s ≤ 0, φ ≥ 0 on active
        let mut lp = base(1);
        for &g in active {
            lp.add(pad(&gens[g], 1), Relation::Ge, Rational::zero());
        }
        let mut row = pad(x, 1);
        row[dim] = Rational::one();
        lp.add(row, Relation::Le, Rational::zero());
        let mut obj = vec![Rational::zero(); dim + 1];
        obj[dim] = Rational::one();
        lp.set_objective(obj);
        let (_, s) = lp.solve().optimal().expect("bounded");
        if !s.is_positive() {
            return Err(Error::PointInCone);
        }
        x_margin = Some(s);
    }

    let k = active.len();
    let mut lp = base(k);
    for (t, &g) in active.iter().enumerate() {
        let mut row = pad(&gens[g], k);
        row[dim + t] = -Rational::one();
        lp.add(row, Relation::Ge, Rational::zero());
        lp.add_bounds(dim + t, Rational::zero(), Rational::one());
    }
    if let (Some(x), Some(s)) = (x, &x_margin) {
        lp.add(pad(x, k), Relation::Le, -(s * rat(1, 2)));
    }
    let mut obj = vec![Rational::zero(); dim + k];
    for o in obj.iter_mut().skip(dim) {
        *o = Rational::one();
    }
    lp.set_objective(obj);
    let (sol, total) = lp.solve().optimal().expect("bounded");
    if total.is_zero() && x.is_none() {
        return Ok(None);
    }
    Ok(Some(sol[..dim].to_vec()))
}

/// Runs the flag construction on `gens` starting from `active`, optionally
/// separating `x`.
fn flag(
    dim: usize,
    gens: &[QVector],
    mut active: Vec<usize>,
    mut x: Option<&[Rational]>,
) -> Result<LexFunctional> {
    let mut out = LexFunctional {
        stages: Vec::new(),
        active_sets: Vec::new(),
    };
    loop {
        if active.is_empty() && x.is_none() {
            break;
        }
        let Some(phi) = flag_stage(dim, gens, &active, x)? else {
            break;
        };
        if x.is_some_and(|x| !dot(&phi, x).is_zero()) {
            x = None;
        }
        let next: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&g| dot(&phi, &gens[g]).is_zero())
            .collect();
        out.stages.push(phi);
        out.active_sets.push(active);
        active = next;
    }
    Ok(out)
}

pub fn separate_point(c: &ConeV, x: &[Rational]) -> Result<LexFunctional> {
    c.check(x)?;
    let active = (0..c.generators.len()).collect();
    flag(c.dim, &c.generators, active, Some(x))
}

/// Extends `φ_H` (values on the basis of `H`) to a functional nonnegative on
/// `C + H`, agreeing with `φ_H` on `H` and strictly positive on every
/// generator of `C` outside `H`.
pub fn extend_functional(c: &ConeV, h: &[QVector], phi_h: &[Rational]) -> Result<LexFunctional> {
    if h.len() != phi_h.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            got: phi_h.len(),
        });
    }
    for v in h {
        c.check(v)?;
    }
    let dim = c.dim;
    let h_basis = span_basis(h);

    let mut gens = c.generators.clone();
    let own = gens.len();
    for v in &h_basis {
        gens.push(v.clone());
        gens.push(v.iter().map(|x| -x.clone()).collect());
    }
    let sum_cone = ConeV { dim, generators: gens.clone() };
    if lineality(&sum_cone).dim() != h_basis.len() {
        return Err(Error::LinealityCondition);
    }

    // minimal-norm extension f = Σ α_j h_j with ⟨f, h_i⟩ = φ_H(h_i)
    let f: QVector = if h.is_empty() {
        vec![Rational::zero(); dim]
    } else {
        let gram = Matrix::from_fn(h.len(), h.len(), |i, j| dot(&h[i], &h[j]));
        let alpha = solve(&gram, phi_h)
            .ok_or_else(|| Error::Precondition("φ_H is inconsistent on the spanning set of H".into()))?;
        (0..dim)
            .map(|k| h.iter().zip(&alpha).map(|(v, a)| &v[k] * a).sum())
            .collect()
    };

    let in_h: Vec<bool> = c
        .generators
        .iter()
        .map(|g| in_span(&h_basis, g))
        .collect();
    for (j, g) in c.generators.iter().enumerate() {
        if in_h[j] && dot(&f, g).is_negative() {
            return Err(Error::NegativeOnSubspace(j));
        }
    }

    let psi = flag(dim, &gens, (0..gens.len()).collect(), None)?;
    let outside: Vec<usize> = (0..own).filter(|&j| !in_h[j]).collect();

    if outside.iter().all(|&j| !dot(&f, &c.generators[j]).is_negative()) {
        let mut stages = vec![f];
        let mut active_sets = vec![(0..own).collect()];
        stages.extend(psi.stages);
        active_sets.extend(psi.active_sets);
        return Ok(LexFunctional { stages, active_sets });
    }

    // collapse ψ to one real covector positive off H, then take f + δψ
    let mut t = Rational::one();
    let flat = loop {
        let mut flat = vec![Rational::zero(); dim];
        let mut w = Rational::one();
        for stage in &psi.stages {
            for (a, b) in flat.iter_mut().zip(stage) {
                *a += &w * b;
            }
            w *= &t;
        }
        if outside.iter().all(|&j| dot(&flat, &c.generators[j]).is_positive()) {
            break flat;
        }
        t *= rat(1, 2);
    };
    let mut delta = Rational::zero();
    for &j in &outside {
        let g = &c.generators[j];
        let fg = dot(&f, g);
        if fg.is_negative() {
            let need = -fg / dot(&flat, g);
            if need > delta {
                delta = need;
            }
        }
    }
    delta += Rational::one();
    let stage: QVector = f.iter().zip(&flat).map(|(a, b)| a + &delta * b).collect();
    Ok(LexFunctional {
        stages: vec![stage],
        active_sets: vec![(0..own).collect()],
    })
}

fn in_span(basis: &[QVector], v: &[Rational]) -> bool {
    if basis.is_empty() {
        return v.iter().all(Zero::is_zero);
    }
    let mut rows = basis.to_vec();
    rows.push(v.to_vec());
    crate::linalg::rank(&Matrix::from_rows(rows)) == basis.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(stages: &[&[i64]]) -> LexFunctional {
        LexFunctional::from_stages(stages.iter().map(|s| ints(s)).collect())
    }

    #[test]
    fn membership_examples() {
        let quad = ConeV::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        assert_eq!(membership(&quad, &ints(&[2, 3])).unwrap(), Membership::Inside(ints(&[2, 3])));
        match membership(&quad, &ints(&[-1, 0])).unwrap() {
            Membership::Outside(y) => {
                assert!(dot(&y, &ints(&[-1, 0])).is_negative());
                assert!(quad.generators().iter().all(|g| !dot(&y, g).is_negative()));
            }
            other => panic!("{other:?}"),
        }
        let half = ConeV::from_ints(2, &[&[1, 0], &[-1, 0], &[0, 1]]).unwrap();
        match membership(&half, &ints(&[-5, 0])).unwrap() {
            Membership::Inside(c) => {
                let sum: Vec<Rational> = (0..2)
                    .map(|i| half.generators().iter().zip(&c).map(|(g, a)| &g[i] * a).sum())
                    .collect();
                assert_eq!(sum, ints(&[-5, 0]));
            }
            other => panic!("{other:?}"),
        }
        assert!(membership(&quad, &ints(&[1])).is_err());
    }

    #[test]
    fn lineality_examples() {
        assert_eq!(lineality(&ConeV::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap()).dim(), 0);
        let half = lineality(&ConeV::from_ints(2, &[&[1, 0], &[-1, 0], &[0, 1]]).unwrap());
        assert_eq!(half.dim(), 1);
        assert_eq!(half.members[0], (0, ints(&[0, 1, 0])));
        let line = lineality(&ConeV::from_ints(2, &[&[1, 1], &[-1, -1]]).unwrap());
        assert_eq!(line.basis, vec![ints(&[1, 1])]);
    }

    #[test]
    fn evaluate_examples() {
        let f = lex(&[&[1, 0], &[0, 1]]);
        assert_eq!(evaluate_lex(&f, &ints(&[0, 1])).unwrap().to_string(), "1*e^1");
        assert_eq!(evaluate_lex(&f, &ints(&[-1, 0])).unwrap().to_string(), "-1");
        assert_eq!(evaluate_lex(&f, &ints(&[2, -3])).unwrap().to_string(), "2 - 3*e^1");
        assert!(evaluate_lex(&f, &ints(&[1])).is_err());
    }

    fn check_separation(c: &ConeV, x: &[Rational], f: &LexFunctional) {
        let lin = lineality(c);
        let in_lin: Vec<usize> = lin.members.iter().map(|m| m.0).collect();
        assert!(evaluate_lex(f, x).unwrap().sign() < 0);
        for (j, g) in c.generators().iter().enumerate() {
            let s = evaluate_lex(f, g).unwrap().sign();
            if in_lin.contains(&j) {
                assert_eq!(s, 0);
            } else {
                assert!(s > 0);
            }
        }
    }

    #[test]
    fn separation_examples() {
        let quad = ConeV::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        let f = separate_point(&quad, &ints(&[-1, 0])).unwrap();
        check_separation(&quad, &ints(&[-1, 0]), &f);

        let half = ConeV::from_ints(2, &[&[1, 0], &[-1, 0], &[0, 1]]).unwrap();
        let f = separate_point(&half, &ints(&[0, -1])).unwrap();
        assert_eq!(f.stages, vec![ints(&[0, 1])]);
        check_separation(&half, &ints(&[0, -1]), &f);

        let ray = ConeV::from_ints(1, &[&[1]]).unwrap();
        assert_eq!(separate_point(&ray, &ints(&[-1])).unwrap().stages, vec![ints(&[1])]);

        assert!(matches!(separate_point(&quad, &ints(&[1, 1])), Err(Error::PointInCone)));
    }

    #[test]
    fn flag_needs_second_stage() {
        // x = (0,0,-1) is separated by z; the generators (1,0,0) and (-1,0,0)
        // plus (0,1,0) require descending into the plane z = 0
        let c = ConeV::from_ints(3, &[&[1, 0, 0], &[-1, 0, 0], &[0, 1, 0], &[0, 1, 1], &[0, 0, 1]]).unwrap();
        let x = ints(&[1, -1, -1]);
        let f = separate_point(&c, &x).unwrap();
        check_separation(&c, &x, &f);
        assert!(f.len() <= 3);
    }

    #[test]
    fn extension_examples() {
        let c = ConeV::from_ints(2, &[&[0, 1]]).unwrap();
        let f = extend_functional(&c, &[ints(&[1, 0])], &ints(&[1])).unwrap();
        assert_eq!(evaluate_lex(&f, &ints(&[1, 0])).unwrap().to_string(), "1");
        let v = evaluate_lex(&f, &ints(&[0, 1])).unwrap();
        assert!(v.sign() > 0 && v.is_infinitesimal());

        let quad = ConeV::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        let f = extend_functional(&quad, &[], &[]).unwrap();
        for g in quad.generators() {
            assert!(evaluate_lex(&f, g).unwrap().sign() > 0);
        }

        let line = ConeV::from_ints(2, &[&[1, 0], &[-1, 0]]).unwrap();
        let f = extend_functional(&line, &[ints(&[1, 0])], &ints(&[0])).unwrap();
        for g in line.generators() {
            assert_eq!(evaluate_lex(&f, g).unwrap().sign(), 0);
        }
    }

    #[test]
    fn extension_with_large_shift() {
        // φ_H pulls (1,1) negative at first order; the single-stage f + δψ fixes it
        let c = ConeV::from_ints(2, &[&[1, 1], &[0, 1]]).unwrap();
        let h = [ints(&[1, 0])];
        let f = extend_functional(&c, &h, &ints(&[-3])).unwrap();
        assert_eq!(evaluate_lex(&f, &h[0]).unwrap().to_string(), "-3");
        for g in c.generators() {
            assert!(evaluate_lex(&f, g).unwrap().sign() > 0);
        }
    }

    #[test]
    fn extension_errors() {
        let c = ConeV::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        // H = span{(1,1)} makes C + H a half-plane with larger lineality
        assert!(matches!(
            extend_functional(&c, &[ints(&[1, 1])], &ints(&[0])),
            Err(Error::LinealityCondition)
        ));
        let c = ConeV::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        assert!(matches!(
            extend_functional(&c, &[ints(&[1, 0])], &ints(&[-1])),
            Err(Error::NegativeOnSubspace(0))
        ));
    }
}
