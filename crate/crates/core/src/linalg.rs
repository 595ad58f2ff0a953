//! Dense matrices over a generic [`Scalar`], with the exact routines the
//! certification code relies on: characteristic polynomials, hermitian
//! LDL* factorization with PSD detection, and row reduction.

use std::cmp::Ordering;
use std::ops::{Index, IndexMut};

use crate::scalar::{Field, Hermitian, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (i..self.cols).all(|j| self[(i, j)] == self[(j, i)].conj()))
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    /// Coefficients `c_0, …, c_n` of `det(λI − A) = Σ c_k λ^k`, by the
    /// Faddeev–LeVerrier recursion (only integer divisions are needed).
    pub fn charpoly(&self) -> Vec<T> {
        assert!(self.is_square(), "charpoly of a non-square matrix");
        let n = self.rows;
        let mut coeffs = vec![T::zero(); n + 1];
        coeffs[n] = T::one();
        let mut m = Self::zeros(n, n);
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I
            let mut next = self.mul(&m);
            for i in 0..n {
                next[(i, i)] = next[(i, i)].clone() + coeffs[n - k + 1].clone();
            }
            let am = self.mul(&next);
            coeffs[n - k] = -am.trace().div_int(k as i64);
            m = next;
        }
        coeffs
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// PSD test for a hermitian matrix from the signs of its characteristic
/// polynomial: all roots are real, so the matrix is PSD iff the elementary
/// symmetric functions of the eigenvalues are all nonnegative.
pub fn psd_by_charpoly<T: Hermitian>(m: &Matrix<T>) -> bool {
    let n = m.rows();
    let coeffs = m.charpoly();
    (0..=n).all(|k| {
        let c = coeffs[n - k].real_part();
        let s = T::sign_of_real(&c);
        let s = if k % 2 == 1 { s.reverse() } else { s };
        s != Ordering::Less
    })
}

/// One term `d · l l*` of an LDL* decomposition.
#[derive(Clone, Debug)]
pub struct RankOneTerm<T: Hermitian> {
    pub weight: T::Real,
    pub vector: Vec<T>,
}

/// Exact hermitian LDL* with diagonal pivoting. Returns the rank-one terms
/// `A = Σ d_k l_k l_k*` (all `d_k > 0`) when `A` is PSD, `None` otherwise.
pub fn ldl_psd<T: Hermitian + Field>(a: &Matrix<T>) -> Option<Vec<RankOneTerm<T>>> {
    assert!(a.is_square());
    let n = a.rows();
    let mut w = a.clone();
    let mut done = vec![false; n];
    let mut terms = Vec::new();
    loop {
        let mut pivot = None;
        for i in (0..n).filter(|&i| !done[i]) {
            let d = w[(i, i)].real_part();
            match T::sign_of_real(&d) {
                Ordering::Less => return None,
                Ordering::Greater if pivot.is_none() => pivot = Some(i),
                _ => {}
            }
        }
        let Some(p) = pivot else {
            // remaining diagonal is zero: PSD forces the whole block to vanish
            let clean = (0..n)
                .filter(|&i| !done[i])
                .all(|i| (0..n).filter(|&j| !done[j]).all(|j| w[(i, j)].is_zero()));
            return clean.then_some(terms);
        };
        let d = w[(p, p)].clone();
        let inv = d.try_inv()?;
        let l: Vec<T> = (0..n)
            .map(|i| {
                if done[i] {
                    T::zero()
                } else {
                    w[(i, p)].clone() * inv.clone()
                }
            })
            .collect();
        for i in (0..n).filter(|&i| !done[i]) {
            if l[i].is_zero() {
                continue;
            }
            for j in (0..n).filter(|&j| !done[j]) {
                if l[j].is_zero() {
                    continue;
                }
                let upd = d.clone() * l[i].clone() * l[j].conj();
                w[(i, j)] = w[(i, j)].clone() - upd;
            }
        }
        done[p] = true;
        terms.push(RankOneTerm {
            weight: d.real_part(),
            vector: l,
        });
    }
}

/// Reduced row echelon form; returns pivot columns.
pub fn rref<T: Field>(m: &mut Matrix<T>) -> Vec<usize> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                m.data.swap(p * cols + j, r * cols + j);
            }
        }
        let inv = m[(r, c)].try_inv().expect("nonzero pivot must be invertible");
        for j in c..cols {
            m[(r, j)] = m[(r, j)].clone() * inv.clone();
        }
        for i in 0..rows {
            if i == r || m[(i, c)].is_zero() {
                continue;
            }
            let f = m[(i, c)].clone();
            for j in c..cols {
                let v = m[(r, j)].clone();
                if !v.is_zero() {
                    m[(i, j)] = m[(i, j)].clone() - f.clone() * v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solves `A x = b` exactly; free variables are set to zero. `None` when
/// the system is inconsistent.
pub fn solve<T: Field>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    assert_eq!(a.rows(), b.len());
    let (rows, cols) = (a.rows(), a.cols());
    let mut aug = Matrix::from_fn(rows, cols + 1, |i, j| {
        if j < cols {
            a[(i, j)].clone()
        } else {
            b[i].clone()
        }
    });
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![T::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[(r, cols)].clone();
    }
    Some(x)
}

/// Basis of the right null space of `a`.
pub fn nullspace<T: Field>(a: &Matrix<T>) -> Vec<Vec<T>> {
    let mut m = a.clone();
    let pivots = rref(&mut m);
    let cols = a.cols();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); cols];
            v[f] = T::one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -m[(r, f)].clone();
            }
            v
        })
        .collect()
}

pub fn rank<T: Field>(a: &Matrix<T>) -> usize {
    let mut m = a.clone();
    rref(&mut m).len()
}

/// Indices of a maximal linearly independent subset of the rows of `a`,
/// scanning rows in order.
pub fn independent_rows<T: Field>(a: &Matrix<T>) -> Vec<usize> {
    let t = a.transpose();
    let mut m = t;
    rref(&mut m)
}
