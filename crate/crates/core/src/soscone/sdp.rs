//! Dense primal-dual interior point method for
//!
//! ```text
//!   minimize ⟨C, X⟩ + cₗᵀx   s.t.  ⟨A_k, X⟩ + a_kᵀx = b_k,  X ⪰ 0,  x ≥ 0
//! ```
//!
//! with one PSD block and a few nonnegative scalars. Infeasible start,
//! HKM search direction, Mehrotra predictor-corrector.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// A sparse symmetric constraint: entries `(i, j, v)` with `i ≤ j` stand for
/// `v` at both `(i, j)` and `(j, i)`.
#[derive(Clone, Debug, Default)]
pub struct SparseSym {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((i, j, v));
    }

    /// `⟨A, X⟩`.
    pub fn dot(&self, x: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * x[(i, j)] } else { 2.0 * v * x[(i, j)] })
            .sum()
    }

    pub fn add_to(&self, m: &mut DMatrix<f64>, scale: f64) {
        for &(i, j, v) in &self.entries {
            m[(i, j)] += scale * v;
            if i != j {
                m[(j, i)] += scale * v;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub n: usize,
    pub c: DMatrix<f64>,
    pub c_lp: Vec<f64>,
    pub a: Vec<SparseSym>,
    pub a_lp: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: DMatrix<f64>,
    pub x_lp: Vec<f64>,
    pub y: DVector<f64>,
    pub s: DMatrix<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
}

impl SdpSolution {
    fn merit(&self) -> f64 {
        self.primal_residual.max(self.dual_residual).max(self.gap)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SdpOptions {
    pub tolerance: f64,
    /// Accuracy at which a stalled run still returns its best iterate.
    pub acceptable: f64,
    pub max_iterations: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            tolerance: 1e-9,
            acceptable: 1e-6,
            max_iterations: 120,
        }
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn frob(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

/// Largest `α ≤ 1/0.95` (scaled later) keeping `X + α dX ⪰ 0`.
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let Some(ch) = x.clone().cholesky() else {
        return 0.0;
    };
    let l = ch.l();
    let Some(linv) = l.clone().try_inverse() else {
        return 0.0;
    };
    let w = &linv * dx * linv.transpose();
    let lmin = sym(&w).symmetric_eigenvalues().min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn max_step_lp(x: &[f64], dx: &[f64]) -> f64 {
    x.iter()
        .zip(dx)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&v, &d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

impl SdpProblem {
    fn a_op(&self, x: &DMatrix<f64>, x_lp: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.a.len(),
            self.a.iter().zip(&self.a_lp).map(|(a, al)| {
                a.dot(x) + al.iter().zip(x_lp).map(|(p, q)| p * q).sum::<f64>()
            }),
        )
    }

    fn a_adj(&self, y: &DVector<f64>) -> (DMatrix<f64>, Vec<f64>) {
        let mut m = DMatrix::zeros(self.n, self.n);
        let mut v = vec![0.0; self.c_lp.len()];
        for (k, a) in self.a.iter().enumerate() {
            a.add_to(&mut m, y[k]);
            for (j, c) in self.a_lp[k].iter().enumerate() {
                v[j] += y[k] * c;
            }
        }
        (m, v)
    }

    /// Schur complement `M_kl = tr(A_k X A_l S⁻¹) + Σ_j a_kj a_lj x_j / s_j`.
    fn schur(&self, x: &DMatrix<f64>, sinv: &DMatrix<f64>, ratio: &[f64]) -> DMatrix<f64> {
        let m = self.a.len();
        let n = self.n;
        // G_l = X A_l S⁻¹ kept dense; M_kl = ⟨A_k, G_l⟩ (symmetrized)
        let rows: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|l| {
                let mut xa = DMatrix::zeros(n, n);
                for &(i, j, v) in &self.a[l].entries {
                    // X A_l: column j gets v·X[:, i], column i gets v·X[:, j]
                    for r in 0..n {
                        xa[(r, j)] += v * x[(r, i)];
                        if i != j {
                            xa[(r, i)] += v * x[(r, j)];
                        }
                    }
                }
                let g = xa * sinv;
                let mut row = vec![0.0; m];
                for (k, ak) in self.a.iter().enumerate().take(l + 1) {
                    let mut t = 0.0;
                    for &(i, j, v) in &ak.entries {
                        if i == j {
                            t += v * g[(i, i)];
                        } else {
                            t += v * (g[(i, j)] + g[(j, i)]);
                        }
                    }
                    let lp: f64 = self.a_lp[k]
                        .iter()
                        .zip(&self.a_lp[l])
                        .zip(ratio)
                        .map(|((p, q), r)| p * q * r)
                        .sum();
                    row[k] = t + lp;
                }
                row
            })
            .collect();
        let mut out = DMatrix::zeros(m, m);
        for l in 0..m {
            for k in 0..=l {
                let v = rows[l][k];
                out[(k, l)] = v;
                out[(l, k)] = v;
            }
        }
        out
    }

    pub fn solve(&self, opts: &SdpOptions) -> Result<SdpSolution> {
        let n = self.n;
        let nl = self.c_lp.len();
        let m = self.a.len();
        let bvec = DVector::from_column_slice(&self.b);
        let bnorm = 1.0 + bvec.amax();
        let cnorm = 1.0 + self.c.amax() + self.c_lp.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let scale = {
            let mut s = 1.0f64;
            for k in 0..m {
                let an: f64 = self.a[k].entries.iter().map(|e| e.2.abs()).sum::<f64>()
                    + self.a_lp[k].iter().map(|v| v.abs()).sum::<f64>();
                s = s.max((1.0 + self.b[k].abs()) / (1.0 + an));
            }
            10.0 * s.max(cnorm).sqrt().max(1.0)
        };
        let mut x = DMatrix::identity(n, n) * scale;
        let mut s = DMatrix::identity(n, n) * scale;
        let mut xl = vec![scale; nl];
        let mut sl = vec![scale; nl];
        let mut y = DVector::zeros(m);
        let total_dim = (n + nl) as f64;

        let mut diag = (f64::NAN, f64::NAN, f64::NAN);
        let mut best: Option<SdpSolution> = None;
        for it in 0..opts.max_iterations {
            let rp = &bvec - self.a_op(&x, &xl);
            let (aty, aty_l) = self.a_adj(&y);
            let rd = &self.c - &aty - &s;
            let rd_l: Vec<f64> = (0..nl).map(|j| self.c_lp[j] - aty_l[j] - sl[j]).collect();
            let mu = (frob(&x, &s) + xl.iter().zip(&sl).map(|(a, b)| a * b).sum::<f64>()) / total_dim;
            let pobj = frob(&self.c, &x) + self.c_lp.iter().zip(&xl).map(|(a, b)| a * b).sum::<f64>();
            let dobj = bvec.dot(&y);
            let pres = rp.amax() / bnorm;
            let dres = rd.amax().max(rd_l.iter().fold(0.0f64, |a, b| a.max(b.abs()))) / cnorm;
            let gap = (pobj - dobj).abs().max(mu * total_dim) / (1.0 + pobj.abs() + dobj.abs());
            diag = (pres, dres, gap);
            let current = || SdpSolution {
                x: x.clone(),
                x_lp: xl.clone(),
                y: y.clone(),
                s: s.clone(),
                iterations: it,
                primal_residual: pres,
                dual_residual: dres,
                gap,
            };
            if pres < opts.tolerance && dres < opts.tolerance && gap < opts.tolerance {
                return Ok(current());
            }
            let merit = pres.max(dres).max(gap);
            if merit < opts.acceptable && best.as_ref().is_none_or(|b| merit < b.merit()) {
                best = Some(current());
            }

            let sinv = match s.clone().cholesky() {
                Some(ch) => ch.inverse(),
                None => break,
            };
            let sinv = sym(&sinv);
            let ratio: Vec<f64> = xl.iter().zip(&sl).map(|(a, b)| a / b).collect();
            let schur = self.schur(&x, &sinv, &ratio);
            let factor = factorize(schur);
            let Some(factor) = factor else { break };

            // direction for complementarity target R = σμI − XS − corr
            let direction = |sigma_mu: f64,
                             corr: Option<(&DMatrix<f64>, &DMatrix<f64>, &[f64], &[f64])>|
             -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>, Vec<f64>, Vec<f64>) {
                // dX = σμS⁻¹ − X − X dS S⁻¹ − dXa dSa S⁻¹, dS = Rd − A*(dy)
                let mut base = &sinv * sigma_mu - &x - &x * &rd * &sinv;
                if let Some((dxa, dsa, _, _)) = corr {
                    base -= dxa * dsa * &sinv;
                }
                let base_l: Vec<f64> = (0..nl)
                    .map(|j| {
                        let mut v = sigma_mu / sl[j] - xl[j] - xl[j] * rd_l[j] / sl[j];
                        if let Some((_, _, dxl, dsl)) = corr {
                            v -= dxl[j] * dsl[j] / sl[j];
                        }
                        v
                    })
                    .collect();
                let rhs = &rp - self.a_op(&sym(&base), &base_l);
                let dy = factor.solve(&rhs);
                let (ady, ady_l) = self.a_adj(&dy);
                let ds = &rd - &ady;
                let dsl: Vec<f64> = (0..nl).map(|j| rd_l[j] - ady_l[j]).collect();
                let mut dx = &sinv * sigma_mu - &x - &x * &ds * &sinv;
                if let Some((dxa, dsa, _, _)) = corr {
                    dx -= dxa * dsa * &sinv;
                }
                let dx = sym(&dx);
                let dxl: Vec<f64> = (0..nl)
                    .map(|j| {
                        let mut v = sigma_mu / sl[j] - xl[j] - xl[j] * dsl[j] / sl[j];
                        if let Some((_, _, dxl, dsla)) = corr {
                            v -= dxl[j] * dsla[j] / sl[j];
                        }
                        v
                    })
                    .collect();
                (dy, dx, ds, dxl, dsl)
            };

            let (_, dxa, dsa, dxla, dsla) = direction(0.0, None);
            let ap = (0.95 * max_step(&x, &dxa).min(max_step_lp(&xl, &dxla))).min(1.0);
            let ad = (0.95 * max_step(&s, &dsa).min(max_step_lp(&sl, &dsla))).min(1.0);
            let xa = &x + &dxa * ap;
            let sa = &s + &dsa * ad;
            let mu_aff = (frob(&xa, &sa)
                + (0..nl).map(|j| (xl[j] + ap * dxla[j]) * (sl[j] + ad * dsla[j])).sum::<f64>())
                / total_dim;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            let (dy, dx, ds, dxl, dsl) =
                direction(sigma * mu, Some((&dxa, &dsa, &dxla, &dsla)));
            let ap = (0.95 * max_step(&x, &dx).min(max_step_lp(&xl, &dxl))).min(1.0);
            let ad = (0.95 * max_step(&s, &ds).min(max_step_lp(&sl, &dsl))).min(1.0);
            if ap < 1e-12 && ad < 1e-12 {
                break;
            }
            x = sym(&(&x + &dx * ap));
            for j in 0..nl {
                xl[j] += ap * dxl[j];
                sl[j] += ad * dsl[j];
            }
            s = sym(&(&s + &ds * ad));
            y += &dy * ad;
        }
        if let Some(b) = best {
            return Ok(b);
        }
        Err(Error::SolverNonConvergence {
            iterations: opts.max_iterations,
            primal: diag.0,
            dual: diag.1,
            gap: diag.2,
        })
    }
}

enum Factor {
    Chol(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Factor {
    fn solve(&self, r: &DVector<f64>) -> DVector<f64> {
        match self {
            Factor::Chol(c) => c.solve(r),
            Factor::Lu(l) => l.solve(r).unwrap_or_else(|| DVector::zeros(r.len())),
        }
    }
}

fn factorize(m: DMatrix<f64>) -> Option<Factor> {
    if let Some(c) = m.clone().cholesky() {
        return Some(Factor::Chol(c));
    }
    let n = m.nrows();
    let reg = 1e-14 * (1.0 + m.diagonal().amax());
    let mr = &m + DMatrix::identity(n, n) * reg;
    if let Some(c) = mr.clone().cholesky() {
        return Some(Factor::Chol(c));
    }
    Some(Factor::Lu(mr.lu()))
}
