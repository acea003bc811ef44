//! Newton polyhedra `conv(generators) + R^n_{≥0}` with exact LP queries.

use num_traits::{One, Signed, Zero};

use super::lp::{LinearProgram, LpOutcome};
use crate::error::{Error, Result};
use crate::expr::PshExpr;
use crate::rational::{ExtRational, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonPolyhedron {
    dim: usize,
    generators: Vec<Vec<Rational>>,
}

impl NewtonPolyhedron {
    pub fn new(dim: usize, generators: Vec<Vec<Rational>>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Input("Newton polyhedron needs a generator".into()));
        }
        if generators.iter().any(|g| g.len() != dim) {
            return Err(Error::Arity(format!("generators must have length {dim}")));
        }
        if generators.iter().flatten().any(|x| x.is_negative()) {
            return Err(Error::Input("generators must be nonnegative".into()));
        }
        Ok(NewtonPolyhedron { dim, generators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<Rational>] {
        &self.generators
    }

    /// Drops generators that dominate another one componentwise (the region does not change).
    pub fn pruned(&self) -> NewtonPolyhedron {
        let mut keep: Vec<Vec<Rational>> = Vec::new();
        let mut sorted = self.generators.clone();
        sorted.sort();
        sorted.dedup();
        for (i, g) in sorted.iter().enumerate() {
            let dominated = sorted
                .iter()
                .enumerate()
                .any(|(j, h)| j != i && h != g && h.iter().zip(g).all(|(a, b)| a <= b));
            if !dominated {
                keep.push(g.clone());
            }
        }
        NewtonPolyhedron {
            dim: self.dim,
            generators: keep,
        }
    }

    pub fn union(&self, other: &NewtonPolyhedron) -> NewtonPolyhedron {
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().cloned());
        NewtonPolyhedron { dim: self.dim, generators }.pruned()
    }

    pub fn minkowski_sum(&self, other: &NewtonPolyhedron) -> NewtonPolyhedron {
        let mut generators = Vec::with_capacity(self.generators.len() * other.generators.len());
        for a in &self.generators {
            for b in &other.generators {
                generators.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
            }
        }
        NewtonPolyhedron { dim: self.dim, generators }.pruned()
    }

    pub fn scaled(&self, c: &Rational) -> NewtonPolyhedron {
        NewtonPolyhedron {
            dim: self.dim,
            generators: self
                .generators
                .iter()
                .map(|g| g.iter().map(|x| x * c).collect())
                .collect(),
        }
    }

    /// Keeps only the listed coordinates.
    pub fn project(&self, coords: &[usize]) -> NewtonPolyhedron {
        NewtonPolyhedron {
            dim: coords.len(),
            generators: self
                .generators
                .iter()
                .map(|g| coords.iter().map(|&i| g[i].clone()).collect())
                .collect(),
        }
        .pruned()
    }

    /// Smallest coordinate sum over the region, `min_i |a_i|`.
    pub fn min_degree(&self) -> Rational {
        self.generators
            .iter()
            .map(|g| g.iter().fold(Rational::zero(), |acc, x| acc + x))
            .min()
            .expect("nonempty generators")
    }

    /// Exact membership: `∃ λ ∈ Δ, s ≥ 0: Σ λ_i a_i + s = x`.
    pub fn contains(&self, x: &[Rational]) -> bool {
        assert_eq!(x.len(), self.dim);
        let g = self.generators.len();
        let nv = g + self.dim;
        let mut lp = LinearProgram::new(nv);
        for j in 0..self.dim {
            let mut row = vec![Rational::zero(); nv];
            for (i, a) in self.generators.iter().enumerate() {
                row[i] = a[j].clone();
            }
            row[g + j] = Rational::one();
            lp.add_equality(row, x[j].clone());
        }
        let mut simplex = vec![Rational::zero(); nv];
        for v in simplex.iter_mut().take(g) {
            *v = Rational::one();
        }
        lp.add_equality(simplex, Rational::one());
        matches!(lp.solve(), LpOutcome::Optimal { .. })
    }

    /// `σ* = min { σ : σ·(1,…,1) ∈ P }`.
    pub fn diagonal_threshold(&self) -> Rational {
        let g = self.generators.len();
        // Variables: σ, λ_1..λ_g, s_1..s_dim  with  σ - Σ λ_i a_ij - s_j = 0.
        let nv = 1 + g + self.dim;
        let mut lp = LinearProgram::new(nv);
        let mut obj = vec![Rational::zero(); nv];
        obj[0] = Rational::one();
        lp.set_objective(obj);
        for j in 0..self.dim {
            let mut row = vec![Rational::zero(); nv];
            row[0] = Rational::one();
            for (i, a) in self.generators.iter().enumerate() {
                row[1 + i] = -a[j].clone();
            }
            row[1 + g + j] = -Rational::one();
            lp.add_equality(row, Rational::zero());
        }
        let mut simplex = vec![Rational::zero(); nv];
        for v in simplex.iter_mut().skip(1).take(g) {
            *v = Rational::one();
        }
        lp.add_equality(simplex, Rational::one());
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => value,
            other => unreachable!("diagonal program is feasible and bounded: {other:?}"),
        }
    }

    /// `1/σ*`, the integrability threshold of the monomial class at the origin.
    pub fn lct_at_origin(&self) -> ExtRational {
        ExtRational::Finite(self.diagonal_threshold()).recip()
    }
}

/// Newton polyhedron of a monomial-class expression (monomial logs, max, sum, scale).
pub fn newton_polyhedron(expr: &PshExpr) -> Result<NewtonPolyhedron> {
    match expr {
        PshExpr::MonomialLog { coeff, exponents } => NewtonPolyhedron::new(
            exponents.len(),
            vec![exponents.iter().map(|e| e * coeff).collect()],
        ),
        PshExpr::Max(children) => {
            let mut parts = children.iter().map(newton_polyhedron);
            let first = parts.next().expect("nonempty max")?;
            parts.try_fold(first, |acc, p| Ok(acc.union(&p?)))
        }
        PshExpr::Sum(children) => {
            let mut parts = children.iter().map(newton_polyhedron);
            let first = parts.next().expect("nonempty sum")?;
            parts.try_fold(first, |acc, p| Ok(acc.minkowski_sum(&p?)))
        }
        PshExpr::Scale { factor, child } => Ok(newton_polyhedron(child)?.scaled(factor)),
        other => Err(Error::Class(format!(
            "{} node in a monomial-class computation",
            node_name(other)
        ))),
    }
}

pub(crate) fn node_name(e: &PshExpr) -> &'static str {
    match e {
        PshExpr::MonomialLog { .. } => "monomial_log",
        PshExpr::LogAbsPoly(_) => "log_abs_poly",
        PshExpr::Radial(_) => "radial",
        PshExpr::Max(_) => "max",
        PshExpr::Sum(_) => "sum",
        PshExpr::Scale { .. } => "scale",
        PshExpr::LinearPullback { .. } => "linear_pullback",
        PshExpr::UnitarySup { .. } => "unitary_sup",
    }
}
