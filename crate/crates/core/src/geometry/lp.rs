//! Dense two-phase simplex over exact rationals, Bland's rule.
//!
//! Sized for the tiny programs that arise from Newton polyhedra (a handful of
//! generators in a handful of dimensions); no attempt at sparsity.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

/// `minimize objective · x  s.t.  A x = b,  x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    rows: Vec<(Vec<Rational>, Rational)>,
    objective: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            rows: Vec::new(),
            objective: vec![Rational::zero(); num_vars],
        }
    }

    pub fn set_objective(&mut self, objective: Vec<Rational>) {
        assert_eq!(objective.len(), self.num_vars);
        self.objective = objective;
    }

    pub fn add_equality(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.rows.push((coeffs, rhs));
    }

    pub fn solve(&self) -> LpOutcome {
        let m = self.rows.len();
        let n = self.num_vars;
        // Columns: n structural, m artificial, then rhs.
        let width = n + m + 1;
        let mut t: Vec<Vec<Rational>> = Vec::with_capacity(m);
        for (i, (coeffs, rhs)) in self.rows.iter().enumerate() {
            let flip = rhs.is_negative();
            let mut row = vec![Rational::zero(); width];
            for (j, c) in coeffs.iter().enumerate() {
                row[j] = if flip { -c.clone() } else { c.clone() };
            }
            row[n + i] = Rational::from_integer(1.into());
            row[width - 1] = if flip { -rhs.clone() } else { rhs.clone() };
            t.push(row);
        }
        let mut basis: Vec<usize> = (n..n + m).collect();

        // Phase 1: minimize the sum of artificials.
        let mut phase1 = vec![Rational::zero(); width];
        for j in n..n + m {
            phase1[j] = Rational::from_integer(1.into());
        }
        let mut obj = reduced_costs(&t, &basis, &phase1);
        if !run_simplex(&mut t, &mut basis, &mut obj, n + m) {
            unreachable!("phase one is bounded below by zero");
        }
        if !(-obj[width - 1].clone()).is_zero() {
            return LpOutcome::Infeasible;
        }

        // Drive artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < t.len() {
            if basis[r] >= n {
                match (0..n).find(|&j| !t[r][j].is_zero()) {
                    Some(j) => pivot(&mut t, &mut obj, &mut basis, r, j),
                    None => {
                        t.remove(r);
                        basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for row in t.iter_mut() {
            let rhs = row[width - 1].clone();
            row.truncate(n);
            row.push(rhs);
        }

        let mut cost = self.objective.clone();
        cost.push(Rational::zero());
        let mut obj = reduced_costs(&t, &basis, &cost);
        if !run_simplex(&mut t, &mut basis, &mut obj, n) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); n];
        for (row, &b) in t.iter().zip(&basis) {
            x[b] = row[n].clone();
        }
        let value = x
            .iter()
            .zip(&self.objective)
            .fold(Rational::zero(), |acc, (xi, ci)| acc + xi * ci);
        LpOutcome::Optimal { value, x }
    }
}

/// Objective row `c_j - c_B B^{-1} A_j`, last entry `-c_B B^{-1} b`.
fn reduced_costs(t: &[Vec<Rational>], basis: &[usize], cost: &[Rational]) -> Vec<Rational> {
    let width = cost.len();
    let mut obj = cost.to_vec();
    obj[width - 1] = Rational::zero();
    for (row, &b) in t.iter().zip(basis) {
        let cb = &cost[b];
        if cb.is_zero() {
            continue;
        }
        for j in 0..width {
            obj[j] = &obj[j] - cb * &row[j];
        }
    }
    obj
}

fn pivot(t: &mut [Vec<Rational>], obj: &mut [Rational], basis: &mut [usize], r: usize, col: usize) {
    let width = t[r].len();
    let p = t[r][col].clone();
    for j in 0..width {
        t[r][j] = &t[r][j] / &p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[col].is_zero() {
            continue;
        }
        let f = row[col].clone();
        for j in 0..width {
            row[j] = &row[j] - &f * &pivot_row[j];
        }
    }
    if !obj[col].is_zero() {
        let f = obj[col].clone();
        for j in 0..width {
            obj[j] = &obj[j] - &f * &pivot_row[j];
        }
    }
    basis[r] = col;
}

/// Returns false when unbounded. Only the first `active` columns may enter.
fn run_simplex(t: &mut [Vec<Rational>], basis: &mut [usize], obj: &mut [Rational], active: usize) -> bool {
    let width = obj.len();
    loop {
        let Some(col) = (0..active).find(|&j| obj[j].is_negative()) else {
            return true;
        };
        let mut leave: Option<(usize, Rational)> = None;
        for (i, row) in t.iter().enumerate() {
            if !row[col].is_positive() {
                continue;
            }
            let ratio = &row[width - 1] / &row[col];
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((r, _)) = leave else {
            return false;
        };
        pivot(t, obj, basis, r, col);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn small_program() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let mut lp = LinearProgram::new(4);
        lp.set_objective(vec![int(-1), int(-1), int(0), int(0)]);
        lp.add_equality(vec![int(1), int(2), int(1), int(0)], int(4));
        lp.add_equality(vec![int(3), int(1), int(0), int(1)], int(6));
        match lp.solve() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, rat(-14, 5));
                assert_eq!(x[0], rat(8, 5));
                assert_eq!(x[1], rat(6, 5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_equality(vec![int(1)], int(-1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![int(-1), int(0)]);
        lp.add_equality(vec![int(1), int(-1)], int(0));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![int(1), int(2)]);
        lp.add_equality(vec![int(1), int(1)], int(1));
        lp.add_equality(vec![int(2), int(2)], int(2));
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(1)),
            other => panic!("{other:?}"),
        }
    }
}
