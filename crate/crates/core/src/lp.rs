//! Exact rational linear programming: two-phase dense tableau simplex with
//! Bland's anti-cycling rule.

use num_traits::{One, Signed, Zero};

use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize cᵀx` over linear constraints; variables are nonnegative unless
/// marked free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    num_vars: usize,
    free: Vec<bool>,
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Vec<Rational>, Rational)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            free: vec![false; num_vars],
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn set_free(&mut self, j: usize) {
        self.free[j] = true;
    }

    pub fn set_objective(&mut self, c: Vec<Rational>) {
        assert_eq!(c.len(), self.num_vars);
        self.objective = c;
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Adds `lo ≤ x_j ≤ hi`.
    pub fn add_bounds(&mut self, j: usize, lo: Rational, hi: Rational) {
        let mut e = vec![Rational::zero(); self.num_vars];
        e[j] = Rational::one();
        self.add(e.clone(), Relation::Ge, lo);
        self.add(e, Relation::Le, hi);
    }

    pub fn solve(&self) -> LpOutcome {
        // column layout: split variables, slacks, artificials
        let mut col_of = Vec::with_capacity(self.num_vars);
        let mut n = 0;
        for j in 0..self.num_vars {
            col_of.push(n);
            n += if self.free[j] { 2 } else { 1 };
        }
        let structural = n;
        let slack_count = self
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let m = self.constraints.len();
        let total = structural + slack_count + m;
        let art0 = structural + slack_count;

        let mut t = vec![vec![Rational::zero(); total + 1]; m];
        let mut slack = structural;
        for (i, c) in self.constraints.iter().enumerate() {
            let row = &mut t[i];
            for j in 0..self.num_vars {
                if c.coeffs[j].is_zero() {
                    continue;
                }
                row[col_of[j]] = c.coeffs[j].clone();
                if self.free[j] {
                    row[col_of[j] + 1] = -c.coeffs[j].clone();
                }
            }
            match c.relation {
                Relation::Le => {
                    row[slack] = Rational::one();
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                }
                Relation::Eq => {}
            }
            row[total] = c.rhs.clone();
            if row[total].is_negative() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
            }
            row[art0 + i] = Rational::one();
        }
        let mut basis: Vec<usize> = (art0..art0 + m).collect();

        let mut phase1 = vec![Rational::zero(); total];
        for c in phase1.iter_mut().skip(art0) {
            *c = -Rational::one();
        }
        if !run_simplex(&mut t, &mut basis, &phase1, total) {
            unreachable!("phase one is bounded");
        }
        let infeasibility: Rational = basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= art0)
            .map(|(i, _)| t[i][total].clone())
            .sum();
        if infeasibility.is_positive() {
            return LpOutcome::Infeasible;
        }
        // drive zero-level artificials out of the basis
        let mut i = 0;
        while i < t.len() {
            if basis[i] >= art0 {
                match (0..art0).find(|&j| !t[i][j].is_zero()) {
                    Some(j) => {
                        pivot(&mut t, &mut basis, i, j);
                        i += 1;
                    }
                    None => {
                        t.remove(i);
                        basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for row in t.iter_mut() {
            row.drain(art0..total);
        }
        let width = art0;

        let mut phase2 = vec![Rational::zero(); width];
        for j in 0..self.num_vars {
            phase2[col_of[j]] = self.objective[j].clone();
            if self.free[j] {
                phase2[col_of[j] + 1] = -self.objective[j].clone();
            }
        }
        if !run_simplex(&mut t, &mut basis, &phase2, width) {
            return LpOutcome::Unbounded;
        }
        let mut values = vec![Rational::zero(); width];
        for (i, &b) in basis.iter().enumerate() {
            values[b] = t[i][width].clone();
        }
        let x: Vec<Rational> = (0..self.num_vars)
            .map(|j| {
                if self.free[j] {
                    &values[col_of[j]] - &values[col_of[j] + 1]
                } else {
                    values[col_of[j]].clone()
                }
            })
            .collect();
        let value = x
            .iter()
            .zip(&self.objective)
            .map(|(a, b)| a * b)
            .sum();
        LpOutcome::Optimal { x, value }
    }
}

fn pivot(t: &mut [Vec<Rational>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c].clone();
    for v in t[r].iter_mut() {
        if !v.is_zero() {
            *v = &*v / &p;
        }
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for (v, pv) in row.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v = &*v - &f * pv;
            }
        }
    }
    basis[r] = c;
}

/// Maximizes `cost` from the current feasible basis; returns false when
/// unbounded. `rhs` is the column index of the right-hand side.
fn run_simplex(t: &mut [Vec<Rational>], basis: &mut [usize], cost: &[Rational], rhs: usize) -> bool {
    let m = t.len();
    loop {
        // Bland: lowest-index column with positive reduced cost
        let entering = (0..cost.len()).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut r = cost[j].clone();
            for i in 0..m {
                if !t[i][j].is_zero() && !cost[basis[i]].is_zero() {
                    r -= &cost[basis[i]] * &t[i][j];
                }
            }
            r.is_positive()
        });
        let Some(c) = entering else {
            return true;
        };
        let mut best: Option<(Rational, usize, usize)> = None;
        for i in 0..m {
            if t[i][c].is_positive() {
                let ratio = &t[i][rhs] / &t[i][c];
                let better = match &best {
                    None => true,
                    Some((br, _, bb)) => ratio < *br || (ratio == *br && basis[i] < *bb),
                };
                if better {
                    best = Some((ratio, i, basis[i]));
                }
            }
        }
        match best {
            Some((_, r, _)) => pivot(t, basis, r, c),
            None => return false,
        }
    }
}
