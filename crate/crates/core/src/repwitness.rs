//! Representations from positive functionals: GNS spaces, compressions,
//! unitary dilations and refutation witnesses, plus the cocycle picture on
//! the augmentation ideal.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::groupalg::{c_of, AlgebraElement, AlgebraSpec, Backend, Word};
use crate::scalar::to_f64;
use crate::soscone::DualWitness;
use crate::CRational;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Clamp threshold for slightly negative eigenvalues.
pub const CLAMP_TOLERANCE: f64 = 1e-9;
pub const UNITARITY_TOLERANCE: f64 = 1e-8;
/// Relative size below which a GNS mode counts as null.
pub const NULL_MODE_CUTOFF: f64 = 1e-6;

fn c64(z: &CRational) -> C64 {
    Complex::new(to_f64(&z.re), to_f64(&z.im))
}

/// Inner product `⟨x, y⟩ = y* x`.
fn inner(x: &CVec, y: &CVec) -> C64 {
    y.dotc(x)
}

/// Table of functional values on words.
pub type Functional = BTreeMap<Word, CRational>;

fn value_of(spec: &AlgebraSpec, phi: &Functional, w: &Word) -> Result<C64> {
    phi.get(w)
        .map(c64)
        .ok_or_else(|| Error::Precondition(format!("functional is not known on {:?}", spec.format_word(w))))
}

fn value_of_element(phi: &Functional, a: &AlgebraElement) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    for (w, c) in a.terms() {
        total += c64(c) * value_of(a.spec(), phi, w)?;
    }
    Ok(total)
}

/// Orthonormal frame of the span of finitely many vectors given by their
/// Gram matrix `K_uv = ⟨u, v⟩`.
#[derive(Clone, Debug)]
pub struct Frame {
    /// `n × r`; column `k` holds the coefficients of the `k`-th orthonormal
    /// vector in terms of the spanning vectors.
    pub coefficients: CMat,
    /// `n × r`; row `u` holds the coordinates of spanning vector `u`.
    pub coordinates: CMat,
}

impl Frame {
    pub fn rank(&self) -> usize {
        self.coefficients.ncols()
    }

    /// Pivoted Cholesky `K ≈ L Lᴴ`; modes whose residual falls below
    /// `NULL_MODE_CUTOFF` of the top eigenvalue are treated as null.
    fn from_gram(k: &CMat) -> Result<Frame> {
        let n = k.nrows();
        let eig = k.clone().symmetric_eigen();
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        if eig.eigenvalues.iter().any(|&v| v < -CLAMP_TOLERANCE * top) {
            return Err(Error::MomentNotPsd);
        }
        let mut residual: Vec<f64> = (0..n).map(|u| k[(u, u)].re).collect();
        let mut pivots: Vec<usize> = Vec::new();
        let mut l = CMat::zeros(n, n);
        loop {
            let next = (0..n)
                .filter(|u| !pivots.contains(u))
                .max_by(|&a, &b| residual[a].total_cmp(&residual[b]));
            let Some(i) = next.filter(|&i| residual[i] > NULL_MODE_CUTOFF * top) else {
                break;
            };
            let c = pivots.len();
            let s = residual[i].sqrt();
            for u in 0..n {
                let mut v = k[(u, i)];
                for j in 0..c {
                    v -= l[(u, j)] * l[(i, j)].conj();
                }
                l[(u, c)] = if u == i { C64::new(s, 0.0) } else { v / s };
            }
            for u in 0..n {
                residual[u] -= l[(u, c)].norm_sqr();
            }
            residual[i] = 0.0;
            pivots.push(i);
        }
        let r = pivots.len();
        if r == 0 {
            return Err(Error::TrivialFunctional);
        }
        let coordinates = l.columns(0, r).into_owned();
        let lp = CMat::from_fn(r, r, |a, b| coordinates[(pivots[a], b)]);
        let inv = lp.try_inverse().ok_or(Error::MomentNotPsd)?.transpose();
        let mut coefficients = CMat::zeros(n, r);
        for (a, &p) in pivots.iter().enumerate() {
            for b in 0..r {
                coefficients[(p, b)] = inv[(a, b)];
            }
        }
        Ok(Frame {
            coefficients,
            coordinates,
        })
    }

    /// Matrix of the operator with `⟨T u, v⟩ = t[(v, u)]` compressed to the
    /// frame.
    fn compress(&self, t: &CMat) -> CMat {
        self.coefficients.adjoint() * t * &self.coefficients
    }
}

#[derive(Clone, Debug)]
pub struct GnsSpace {
    pub spec: Arc<AlgebraSpec>,
    pub basis_words: Vec<Word>,
    /// `⟨u, v⟩ = φ(v* u)`.
    pub moment: CMat,
    pub frame: Frame,
    pub functional: Functional,
}

impl GnsSpace {
    pub fn dimension(&self) -> usize {
        self.frame.rank()
    }

    pub fn null_dimension(&self) -> usize {
        self.basis_words.len() - self.dimension()
    }

    /// Coordinates of the class of `e`.
    pub fn cyclic_vector(&self) -> CVec {
        let e = self.basis_words.iter().position(|w| self.spec.is_identity(w)).unwrap_or(0);
        self.frame.coordinates.row(e).transpose()
    }
}

/// GNS space spanned by the classes of words of length `≤ d`.
pub fn gns_from_moment(phi: &DualWitness, d: usize) -> Result<GnsSpace> {
    gns_from_functional(&phi.spec, &phi.functional, d)
}

pub fn gns_from_functional(spec: &Arc<AlgebraSpec>, phi: &Functional, d: usize) -> Result<GnsSpace> {
    let words = spec.ball(d);
    let n = words.len();
    let mut moment = CMat::zeros(n, n);
    for (i, u) in words.iter().enumerate() {
        for (j, v) in words.iter().enumerate() {
            moment[(i, j)] = value_of(spec, phi, &spec.mul(&spec.star(v), u))?;
        }
    }
    let frame = Frame::from_gram(&moment)?;
    Ok(GnsSpace {
        spec: spec.clone(),
        basis_words: words,
        moment,
        frame,
        functional: phi.clone(),
    })
}

/// `M_i = p π(x_i) p` on the GNS space for each generator `x_i`.
pub fn compressions(g: &GnsSpace) -> Result<Vec<CMat>> {
    let spec = &g.spec;
    let n = g.basis_words.len();
    let mut out = Vec::new();
    for i in 0..spec.rank() {
        let x = spec.generator(i);
        let mut t = CMat::zeros(n, n);
        for (ui, u) in g.basis_words.iter().enumerate() {
            let xu = spec.mul(&x, u);
            for (vi, v) in g.basis_words.iter().enumerate() {
                t[(vi, ui)] = value_of(spec, &g.functional, &spec.mul(&spec.star(v), &xu))?;
            }
        }
        let m = g.frame.compress(&t);
        if spec.is_group() {
            let norm = operator_norm(&m);
            if norm > 1.0 + CLAMP_TOLERANCE {
                return Err(Error::NotContraction { norm });
            }
            out.push(clip_contraction(m));
        } else {
            out.push(m);
        }
    }
    Ok(out)
}

fn operator_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

fn clip_contraction(m: CMat) -> CMat {
    if m.is_empty() || operator_norm(&m) <= 1.0 {
        return m;
    }
    let svd = m.svd(true, true);
    let (u, v) = (svd.u.unwrap(), svd.v_t.unwrap());
    let s = CMat::from_diagonal(&svd.singular_values.map(|x| Complex::new(x.min(1.0), 0.0)));
    u * s * v
}

/// `[[M, √(I−MM*)], [√(I−M*M), −M*]]`, with both defect roots taken from
/// one SVD `M = UΣV*` so that `σ² + (1−σ)(1+σ)` stays 1 to rounding.
pub fn choi_dilation(m: &CMat) -> Result<CMat> {
    let k = m.nrows();
    let norm = operator_norm(m);
    if norm > 1.0 + CLAMP_TOLERANCE {
        return Err(Error::NotContraction { norm });
    }
    let svd = m.clone().svd(true, true);
    let (u, v) = (svd.u.unwrap(), svd.v_t.unwrap().adjoint());
    let defect = CMat::from_diagonal(&svd.singular_values.map(|s| {
        let s = s.min(1.0);
        Complex::new(((1.0 - s) * (1.0 + s)).sqrt(), 0.0)
    }));
    let top = &u * &defect * u.adjoint();
    let bottom = &v * &defect * v.adjoint();
    let mut out = CMat::zeros(2 * k, 2 * k);
    out.view_mut((0, 0), (k, k)).copy_from(m);
    out.view_mut((0, k), (k, k)).copy_from(&top);
    out.view_mut((k, 0), (k, k)).copy_from(&bottom);
    out.view_mut((k, k), (k, k)).copy_from(&(-m.adjoint()));
    Ok(out)
}

pub fn unitarity_residual(u: &CMat) -> f64 {
    let k = u.nrows();
    (u.adjoint() * u - CMat::identity(k, k)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Finite-dimensional representation in which `⟨π(b)ξ, ξ⟩ < 0`.
#[derive(Clone, Debug)]
pub struct UnitaryRepWitness {
    pub target: AlgebraElement,
    /// Images of the generators (unitary for group algebras).
    pub generators: Vec<CMat>,
    pub state: CVec,
    pub value: f64,
}

impl UnitaryRepWitness {
    /// Image of a word under the stored representation.
    pub fn image(&self, w: &Word) -> Result<CMat> {
        word_image(self.target.spec(), &self.generators, w)
    }

    /// Recomputes `⟨π(b)ξ, ξ⟩` from the stored matrices.
    pub fn replay(&self) -> Result<C64> {
        let mut total = C64::new(0.0, 0.0);
        for (w, c) in self.target.terms() {
            let v = self.image(w)? * &self.state;
            total += c64(c) * inner(&v, &self.state);
        }
        Ok(total)
    }

    pub fn max_unitarity_residual(&self) -> f64 {
        if !self.target.spec().is_group() {
            return 0.0;
        }
        self.generators.iter().map(unitarity_residual).fold(0.0, f64::max)
    }

    /// Unitarity, unit state, replayed value matching the stored one and
    /// negative.
    pub fn verify(&self) -> bool {
        let Ok(v) = self.replay() else {
            return false;
        };
        let unit = (self.state.norm() - 1.0).abs() <= 1e-9;
        self.max_unitarity_residual() <= UNITARITY_TOLERANCE
            && unit
            && (v.re - self.value).abs() <= 1e-10 * (1.0 + self.value.abs())
            && v.im.abs() <= 1e-8
            && self.value < 0.0
    }
}

fn word_image(spec: &AlgebraSpec, gens: &[CMat], w: &Word) -> Result<CMat> {
    let k = gens.first().map_or(0, |g| g.nrows());
    let mut acc = CMat::identity(k, k);
    for (i, inv) in letters(spec, w)? {
        let g = gens.get(i).ok_or(Error::DimensionMismatch {
            expected: spec.rank(),
            got: gens.len(),
        })?;
        acc = if inv { acc * g.adjoint() } else { acc * g };
    }
    Ok(acc)
}

/// Factorization of a word into generators `(index, inverse/adjoint)`.
pub fn letters(spec: &AlgebraSpec, w: &Word) -> Result<Vec<(usize, bool)>> {
    match &spec.backend {
        Backend::Free(_) | Backend::FreeStar { .. } => {
            Ok(w.0.iter().map(|&l| (l.unsigned_abs() as usize - 1, l < 0)).collect())
        }
        Backend::FreeAbelian(_) => Ok(w
            .0
            .iter()
            .enumerate()
            .flat_map(|(i, &e)| std::iter::repeat_n((i, e < 0), e.unsigned_abs() as usize))
            .collect()),
        Backend::Finite(g) => {
            let target = w.0[0] as usize;
            let n = g.order();
            let mut parent: Vec<Option<(usize, usize, bool)>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[g.identity()] = true;
            let mut queue = VecDeque::from([g.identity()]);
            while let Some(x) = queue.pop_front() {
                if x == target {
                    break;
                }
                for (i, &s) in g.generators().iter().enumerate() {
                    for (y, inv) in [(g.mul(x, s), false), (g.mul(x, g.inv(s)), true)] {
                        if !seen[y] {
                            seen[y] = true;
                            parent[y] = Some((x, i, inv));
                            queue.push_back(y);
                        }
                    }
                }
            }
            if !seen[target] {
                return Err(Error::NotGenerating { kernel_dim: 0 });
            }
            let mut out = Vec::new();
            let mut x = target;
            while let Some((p, i, inv)) = parent[x] {
                out.push((i, inv));
                x = p;
            }
            out.reverse();
            Ok(out)
        }
    }
}

/// Turns a dual witness with `φ(b) < 0` into a representation with
/// `⟨π(b)ξ, ξ⟩ < 0`: GNS on words of length `≤ d`, compressions, and
/// unitary dilations for free groups.
pub fn refutation_witness(b: &AlgebraElement, phi: &DualWitness) -> Result<UnitaryRepWitness> {
    let spec = b.spec();
    match spec.backend {
        Backend::Free(_) | Backend::FreeStar { .. } => {}
        _ => {
            return Err(Error::UnsupportedBackend(format!(
                "{} (relations are not preserved by dilation)",
                spec.name()
            )))
        }
    }
    let phi_b = value_of_element(&phi.functional, b)?.re;
    if phi_b >= 0.0 {
        return Err(Error::Precondition("φ(b) must be negative".into()));
    }
    let radius = phi.basis.iter().map(|w| spec.length(w)).max().unwrap_or(0);
    let deg = b.degree();
    let d = deg.min(radius.saturating_sub(1));
    if radius == 0 || d < deg.div_ceil(2) {
        return Err(Error::Precondition(format!(
            "witness basis radius {radius} is too small; need at least {}",
            deg.div_ceil(2) + 1
        )));
    }
    let gns = gns_from_functional(spec, &phi.functional, d)?;
    let ms = compressions(&gns)?;
    let xi = gns.cyclic_vector();
    let norm = xi.norm();
    if norm == 0.0 {
        return Err(Error::TrivialFunctional);
    }
    let xi = xi / Complex::new(norm, 0.0);
    let (generators, state) = if spec.is_group() {
        let us = ms.iter().map(choi_dilation).collect::<Result<Vec<_>>>()?;
        let k = xi.len();
        let mut state = CVec::zeros(2 * k);
        state.rows_mut(0, k).copy_from(&xi);
        (us, state)
    } else {
        (ms, xi)
    };
    let mut w = UnitaryRepWitness {
        target: b.clone(),
        generators,
        state,
        value: 0.0,
    };
    w.value = w.replay()?.re;
    Ok(w)
}

/// Truncated GNS representation on `ω(Γ)` with `π(g) = π(c(g)) + 1`.
#[derive(Clone, Debug)]
pub struct AugmentationGns {
    pub words: Vec<Word>,
    pub frame: Frame,
    /// One matrix per generator.
    pub pi: Vec<CMat>,
    /// `δ(g)` = class of `c(g)`, for every word in the ball.
    pub delta: BTreeMap<Word, CVec>,
}

/// Builds `π_φ` and `δ` from `φ` on products `c(h)*c(g)` over the ball of
/// `radius`, checking the cocycle identity on in-ball pairs.
pub fn augmentation_gns(spec: &Arc<AlgebraSpec>, phi: &Functional, radius: usize) -> Result<AugmentationGns> {
    if !spec.is_group() {
        return Err(Error::UnsupportedBackend(spec.name().into()));
    }
    let words: Vec<Word> = spec.ball(radius).into_iter().filter(|w| !spec.is_identity(w)).collect();
    let n = words.len();
    let cols: Vec<AlgebraElement> = words.iter().map(|w| c_of(spec, w)).collect();
    let mut k = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = value_of_element(phi, &cols[j].involution().multiply(&cols[i])?)?;
        }
    }
    let frame = Frame::from_gram(&k)?;
    let mut pi = Vec::new();
    for i in 0..spec.rank() {
        let s = spec.generator(i);
        // π(s) c(g) = c(sg) − c(s)
        let mut t = CMat::zeros(n, n);
        for (ui, u) in words.iter().enumerate() {
            let image = c_of(spec, &spec.mul(&s, u)).try_sub(&c_of(spec, &s))?;
            for (vi, _) in words.iter().enumerate() {
                t[(vi, ui)] = value_of_element(phi, &cols[vi].involution().multiply(&image)?)?;
            }
        }
        pi.push(frame.compress(&t));
    }
    let delta: BTreeMap<Word, CVec> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), frame.coordinates.row(i).transpose()))
        .collect();
    let zero = CVec::zeros(frame.rank());
    let scale = delta.values().map(|v| v.norm()).fold(1.0, f64::max);
    for (i, pi_s) in pi.iter().enumerate() {
        let s = spec.generator(i);
        for h in &words {
            if spec.length(h) + 1 > radius {
                continue;
            }
            let gh = spec.mul(&s, h);
            let lhs = delta.get(&gh).unwrap_or(&zero);
            let rhs = pi_s * &delta[h] + &delta[&s];
            let residual = (lhs - rhs).norm();
            if residual > 1e-8 * scale {
                return Err(Error::CocycleInconsistent { residual });
            }
            let drift = (( pi_s * &delta[h]).norm() - delta[h].norm()).abs();
            if drift > 1e-8 * scale {
                return Err(Error::CocycleInconsistent { residual: drift });
            }
        }
    }
    Ok(AugmentationGns {
        words,
        frame,
        pi,
        delta,
    })
}

/// `Ω` with `δ(s) = π(s)Ω − Ω` for every generator, when the least-squares
/// residual is at most `10⁻⁸`.
pub fn solve_inner_cocycle(pi: &[CMat], delta: &[CVec]) -> Option<CVec> {
    let k = pi.first()?.nrows();
    if k == 0 {
        return Some(CVec::zeros(0));
    }
    let mut a = CMat::zeros(k * pi.len(), k);
    let mut rhs = CVec::zeros(k * pi.len());
    for (i, (p, d)) in pi.iter().zip(delta).enumerate() {
        a.view_mut((i * k, 0), (k, k)).copy_from(&(p - CMat::identity(k, k)));
        rhs.rows_mut(i * k, k).copy_from(d);
    }
    let omega = a.clone().svd(true, true).solve(&rhs, 1e-12).ok()?;
    let residual = (&a * &omega - &rhs).norm();
    (residual <= 1e-8).then_some(omega)
}

/// Cocycle data on generators, extended to words by
/// `δ(sw) = π(s)δ(w) + δ(s)` and `δ(s⁻¹) = −π(s)*δ(s)`.
pub struct Cocycle<'a> {
    pub spec: &'a Arc<AlgebraSpec>,
    pub pi: &'a [CMat],
    pub delta: &'a [CVec],
}

impl Cocycle<'_> {
    pub fn pi_of(&self, w: &Word) -> Result<CMat> {
        word_image(self.spec, self.pi, w)
    }

    pub fn delta_of(&self, w: &Word) -> Result<CVec> {
        let k = self.delta.first().map_or(0, |d| d.len());
        let ls = letters(self.spec, w)?;
        let mut acc = CVec::zeros(k);
        for &(i, inv) in ls.iter().rev() {
            let (p, d) = (&self.pi[i], &self.delta[i]);
            acc = if inv {
                p.adjoint() * (acc - d)
            } else {
                p * acc + d
            };
        }
        Ok(acc)
    }
}

/// `φ(c(h)*c(g)) = ⟨δ(g), δ(h)⟩` for each requested `(h, g)`, after checking
/// the cocycle rule and the invariance `⟨π(k)δ(g), δ(h)⟩ = ⟨δ(g), π(k⁻¹)δ(h)⟩`
/// on seeded random triples, and PSD-ness of the Gram matrix.
pub fn functional_from_cocycle(
    spec: &Arc<AlgebraSpec>,
    pi: &[CMat],
    delta: &[CVec],
    pairs: &[(Word, Word)],
) -> Result<Vec<C64>> {
    let cocycle = Cocycle { spec, pi, delta };
    let mut words: Vec<Word> = pairs.iter().flat_map(|(h, g)| [h.clone(), g.clone()]).collect();
    words.sort();
    words.dedup();
    let vecs = words
        .iter()
        .map(|w| cocycle.delta_of(w))
        .collect::<Result<Vec<_>>>()?;
    let scale = vecs.iter().map(|v| v.norm()).fold(1.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let gens = spec.symmetric_generators();
    for _ in 0..16.min(words.len() * words.len()) {
        let g = &words[rng.gen_range(0..words.len())];
        let h = &words[rng.gen_range(0..words.len())];
        let s = &gens[rng.gen_range(0..gens.len().max(1))];
        // cocycle rule on sg
        let lhs = cocycle.delta_of(&spec.mul(s, g))?;
        let rhs = cocycle.pi_of(s)? * cocycle.delta_of(g)? + cocycle.delta_of(s)?;
        let residual = (lhs - rhs).norm();
        if residual > 1e-8 * scale {
            return Err(Error::CocycleInconsistent { residual });
        }
        let (dg, dh) = (cocycle.delta_of(g)?, cocycle.delta_of(h)?);
        let a = inner(&(cocycle.pi_of(s)? * &dg), &dh);
        let b = inner(&dg, &(cocycle.pi_of(&spec.star(s))? * &dh));
        if (a - b).norm() > 1e-8 * scale * scale {
            return Err(Error::CocycleInconsistent { residual: (a - b).norm() });
        }
    }
    let n = words.len();
    let gram = CMat::from_fn(n, n, |i, j| inner(&vecs[i], &vecs[j]));
    if n > 0 {
        let min = gram.symmetric_eigenvalues().min();
        if min < -CLAMP_TOLERANCE * scale * scale {
            return Err(Error::MomentNotPsd);
        }
    }
    let index: BTreeMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    Ok(pairs
        .iter()
        .map(|(h, g)| inner(&vecs[index[g]], &vecs[index[h]]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupalg::{standard_laplacian, FiniteGroup};
    use crate::scalar::cint;
    use crate::soscone::{decide_sos, GramBasis, Mode, SosVerdict};

    fn table(spec: &Arc<AlgebraSpec>, radius: usize, f: impl Fn(&Word) -> i64) -> Functional {
        spec.ball(radius).into_iter().map(|w| {
            let v = f(&w);
            (w, cint(v, 0))
        }).collect()
    }

    fn power(w: &Word) -> i32 {
        w.0.iter().map(|l| l.signum()).sum()
    }

    fn c(re: f64) -> C64 {
        Complex::new(re, 0.0)
    }

    #[test]
    fn gns_examples() {
        let f1 = AlgebraSpec::free(1);
        let g = gns_from_functional(&f1, &table(&f1, 4, |_| 1), 1).unwrap();
        assert_eq!(g.dimension(), 1);
        assert_eq!(g.null_dimension(), 2);
        let m = compressions(&g).unwrap();
        assert!((m[0][(0, 0)] - c(1.0)).norm() < 1e-9);

        let z3 = AlgebraSpec::finite(FiniteGroup::cyclic(3));
        let e = z3.identity();
        let g = gns_from_functional(&z3, &table(&z3, 3, |w| (*w == e) as i64), 1).unwrap();
        assert_eq!(g.dimension(), 3);

        assert!(gns_from_functional(&f1, &table(&f1, 2, |_| 0), 1).is_err());

        let haar = table(&f1, 2, |w| (power(w) == 0) as i64);
        let g = gns_from_functional(&f1, &haar, 0).unwrap();
        let m = compressions(&g).unwrap();
        assert!(m[0][(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn choi_examples() {
        let u = choi_dilation(&CMat::from_element(1, 1, c(0.0))).unwrap();
        assert!((u - CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])).norm() < 1e-12);
        let u = choi_dilation(&CMat::from_element(1, 1, c(1.0))).unwrap();
        assert!((u - CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])).norm() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = CMat::from_fn(3, 3, |_, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let m = &m / Complex::new(operator_norm(&m) * 1.0000001, 0.0);
        let u = choi_dilation(&m).unwrap();
        assert!(unitarity_residual(&u) <= 1e-8);
        assert!(choi_dilation(&(m * c(2.0))).is_err());
    }

    #[test]
    fn refutation_examples() {
        let f1 = AlgebraSpec::free(1);
        let b = standard_laplacian(&f1).neg();
        let phi = table(&f1, 4, |w| if power(w) % 2 == 0 { 1 } else { -1 });
        let dw = DualWitness::new(&f1, Mode::Full, f1.ball(2), phi, &b).unwrap();
        let w = refutation_witness(&b, &dw).unwrap();
        assert!((w.value + 4.0).abs() < 1e-9);
        assert!(w.verify());

        let fs = AlgebraSpec::free_star(1, true);
        let z = AlgebraElement::parse_word(&fs, "a").unwrap();
        let phi = table(&fs, 4, |w| if w.0.len() % 2 == 0 { 1 } else { -1 });
        let dw = DualWitness::new(&fs, Mode::Full, fs.ball(2), phi, &z).unwrap();
        let w = refutation_witness(&z, &dw).unwrap();
        assert_eq!(w.generators[0].nrows(), 1);
        assert!((w.value + 1.0).abs() < 1e-9);
        assert!(w.verify());
    }

    #[test]
    fn pipeline_from_sdp() {
        let f2 = AlgebraSpec::free(2);
        let b = standard_laplacian(&f2).neg();
        let basis = GramBasis::with_radius(&f2, Mode::Full, 2);
        let SosVerdict::Refuted(dw) = decide_sos(&b, &basis).unwrap() else {
            panic!("−Δ must be refuted")
        };
        let phi_b = to_f64(&dw.value_at_target);
        let w = refutation_witness(&b, &dw).unwrap();
        assert!(w.value < 0.0);
        assert!((w.value - phi_b).abs() <= 1e-6 * phi_b.abs() + 1e-9);
        assert!(w.verify());
    }

    #[test]
    fn augmentation_cocycles() {
        let z3 = AlgebraSpec::finite(FiniteGroup::cyclic(3));
        let e = z3.identity();
        let phi = table(&z3, 3, |w| (*w == e) as i64);
        let aug = augmentation_gns(&z3, &phi, 1).unwrap();
        let s = z3.generator(0);
        let omega = solve_inner_cocycle(&aug.pi, &[aug.delta[&s].clone()]).unwrap();
        let r = &aug.pi[0] * &omega - &omega - &aug.delta[&s];
        assert!(r.norm() <= 1e-10);

        let z2 = AlgebraSpec::finite(FiniteGroup::cyclic(2));
        let e = z2.identity();
        let aug = augmentation_gns(&z2, &table(&z2, 2, |w| (*w == e) as i64), 1).unwrap();
        let g = z2.generator(0);
        assert!((&aug.pi[0] * &aug.delta[&g] + &aug.delta[&g]).norm() < 1e-12);
        assert!(augmentation_gns(&z2, &table(&z2, 2, |_| 0), 1).is_err());
    }

    #[test]
    fn cocycle_functionals() {
        let z2 = AlgebraSpec::finite(FiniteGroup::cyclic(2));
        let g = z2.generator(0);
        let p = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let xi = CVec::from_vec(vec![c(1.0), c(0.0)]);
        let d = &p * &xi - &xi;
        let v = functional_from_cocycle(&z2, &[p.clone()], &[d], &[(g.clone(), g.clone())]).unwrap();
        assert!((v[0] - c(2.0)).norm() < 1e-12);
        let zero = functional_from_cocycle(&z2, &[p], &[CVec::zeros(2)], &[(g.clone(), g)]).unwrap();
        assert!(zero[0].norm() < 1e-12);

        // inner cocycle from a random ξ is recovered
        let f2 = AlgebraSpec::free(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let us: Vec<CMat> = (0..2)
            .map(|_| {
                let m = CMat::from_fn(3, 3, |_, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                m.qr().q()
            })
            .collect();
        let xi = CVec::from_fn(3, |_, _| Complex::new(rng.gen_range(-1.0..1.0), 0.0));
        let ds: Vec<CVec> = us.iter().map(|u| u * &xi - &xi).collect();
        let omega = solve_inner_cocycle(&us, &ds).unwrap();
        for (u, d) in us.iter().zip(&ds) {
            assert!((u * &omega - &omega - d).norm() < 1e-8);
        }
        let a = f2.parse_word("a").unwrap();
        let ab = f2.parse_word("aB").unwrap();
        let v = functional_from_cocycle(&f2, &us, &ds, &[(a.clone(), ab.clone())]).unwrap();
        let cocycle = Cocycle { spec: &f2, pi: &us, delta: &ds };
        let direct = cocycle.pi_of(&ab).unwrap() * &xi - &xi;
        let da = &us[0] * &xi - &xi;
        assert!((v[0] - inner(&direct, &da)).norm() < 1e-9);
    }
}
