//! Expression trees for plurisubharmonic functions.
//!
//! Atoms are weighted monomial logs, `log|f|` for a polynomial `f`, and radial
//! functions `χ(log‖z‖)`; combinators are max, sum, positive scaling, affine
//! pullback and the sup over unitary rotations of a trailing block of variables.

use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::{to_f64, Rational};

/// Tolerance used when checking slopes of a piecewise-linear profile.
const SLOPE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum PshExpr {
    /// `coeff · Σ_j exponents_j · log|z_j|`.
    MonomialLog {
        coeff: Rational,
        exponents: Vec<Rational>,
    },
    /// `log|f(z)|`.
    LogAbsPoly(Polynomial),
    /// `χ(log‖z‖)` with the Euclidean norm.
    Radial(RadialProfile),
    Max(Vec<PshExpr>),
    Sum(Vec<PshExpr>),
    Scale {
        factor: Rational,
        child: Box<PshExpr>,
    },
    /// `child(A·x + b)`.
    LinearPullback {
        map: AffineMap,
        child: Box<PshExpr>,
    },
    /// `sup_{g ∈ U(block)} child(z, g·w)` where `z` has `base` and `w` has `block` coordinates.
    UnitarySup {
        base: usize,
        block: usize,
        child: Box<PshExpr>,
    },
}

/// Convex increasing piecewise-linear profile `χ` on the real line.
///
/// Left of the first breakpoint `χ` has slope `limiting_slope`; between breakpoints
/// it interpolates linearly; right of the last one it continues with the last
/// segment's slope (or `limiting_slope` when there is a single breakpoint). No
/// breakpoints means `χ(t) = limiting_slope · t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub arity: usize,
    pub breakpoints: Vec<(f64, f64)>,
    pub limiting_slope: Rational,
}

impl RadialProfile {
    pub fn new(arity: usize, breakpoints: Vec<(f64, f64)>, limiting_slope: Rational) -> Result<Self> {
        let profile = RadialProfile {
            arity,
            breakpoints,
            limiting_slope,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// `χ(t) = ν t`.
    pub fn linear(arity: usize, nu: Rational) -> Result<Self> {
        RadialProfile::new(arity, Vec::new(), nu)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arity == 0 {
            return Err(Error::Arity("radial atom needs at least one variable".into()));
        }
        if self.limiting_slope.is_negative() {
            return Err(Error::Input("radial limiting slope must be nonnegative".into()));
        }
        if self
            .breakpoints
            .iter()
            .any(|(t, v)| !t.is_finite() || !v.is_finite())
        {
            return Err(Error::Input("radial breakpoints must be finite".into()));
        }
        let mut prev_slope = to_f64(&self.limiting_slope);
        for w in self.breakpoints.windows(2) {
            let (t0, v0) = w[0];
            let (t1, v1) = w[1];
            if t1 <= t0 {
                return Err(Error::Input("radial breakpoints must be strictly increasing in t".into()));
            }
            let slope = (v1 - v0) / (t1 - t0);
            if slope < prev_slope - SLOPE_TOL * (1.0 + prev_slope.abs()) {
                return Err(Error::Input(
                    "radial profile must be convex increasing (slopes nondecreasing)".into(),
                ));
            }
            prev_slope = slope;
        }
        Ok(())
    }

    pub fn eval_at_log_norm(&self, t: f64) -> f64 {
        let nu = to_f64(&self.limiting_slope);
        let bp = &self.breakpoints;
        if bp.is_empty() {
            return if nu == 0.0 { 0.0 } else { nu * t };
        }
        let (t0, v0) = bp[0];
        if t <= t0 {
            return if nu == 0.0 { v0 } else { v0 + nu * (t - t0) };
        }
        for w in bp.windows(2) {
            let (ta, va) = w[0];
            let (tb, vb) = w[1];
            if t <= tb {
                return va + (vb - va) * (t - ta) / (tb - ta);
            }
        }
        let (tl, vl) = bp[bp.len() - 1];
        let last_slope = if bp.len() >= 2 {
            let (tp, vp) = bp[bp.len() - 2];
            (vl - vp) / (tl - tp)
        } else {
            nu
        };
        vl + last_slope * (t - tl)
    }
}

/// Affine map `x ↦ A·x + b` from `C^cols` to `C^rows`, `A` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub rows: usize,
    pub cols: usize,
    pub matrix: Vec<Complex64>,
    pub offset: Vec<Complex64>,
}

impl AffineMap {
    pub fn new(rows: usize, cols: usize, matrix: Vec<Complex64>, offset: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Arity("affine map needs nonzero dimensions".into()));
        }
        if matrix.len() != rows * cols {
            return Err(Error::Arity(format!(
                "matrix has {} entries, expected {}x{}",
                matrix.len(),
                rows,
                cols
            )));
        }
        if offset.len() != rows {
            return Err(Error::Arity(format!(
                "offset has length {}, expected {}",
                offset.len(),
                rows
            )));
        }
        if matrix.iter().chain(&offset).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Input("affine map entries must be finite".into()));
        }
        Ok(AffineMap {
            rows,
            cols,
            matrix,
            offset,
        })
    }

    pub fn linear(rows: usize, cols: usize, matrix: Vec<Complex64>) -> Result<Self> {
        AffineMap::new(rows, cols, matrix, vec![Complex64::zero(); rows])
    }

    /// The `m × 2m` matrix `[I | -I]`, i.e. `(z, w) ↦ z - w`.
    pub fn difference(m: usize) -> Self {
        let mut matrix = vec![Complex64::zero(); m * 2 * m];
        for i in 0..m {
            matrix[i * 2 * m + i] = Complex64::new(1.0, 0.0);
            matrix[i * 2 * m + m + i] = Complex64::new(-1.0, 0.0);
        }
        AffineMap {
            rows: m,
            cols: 2 * m,
            matrix,
            offset: vec![Complex64::zero(); m],
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.cols + col]
    }

    pub fn apply_into(&self, x: &[Complex64], out: &mut Vec<Complex64>) {
        out.clear();
        for r in 0..self.rows {
            let row = &self.matrix[r * self.cols..(r + 1) * self.cols];
            let mut acc = self.offset[r];
            for (a, xi) in row.iter().zip(x) {
                acc += a * xi;
            }
            out.push(acc);
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows);
        self.apply_into(x, &mut out);
        out
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        let mut matrix = vec![Complex64::zero(); self.rows * inner.cols];
        for r in 0..self.rows {
            for c in 0..inner.cols {
                let mut acc = Complex64::zero();
                for k in 0..self.cols {
                    acc += self.entry(r, k) * inner.entry(k, c);
                }
                matrix[r * inner.cols + c] = acc;
            }
        }
        let offset = self
            .apply(&inner.offset);
        AffineMap {
            rows: self.rows,
            cols: inner.cols,
            matrix,
            offset,
        }
    }

    pub fn has_zero_offset(&self) -> bool {
        self.offset.iter().all(|z| *z == Complex64::zero())
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.matrix, self.rows, self.cols)
    }

    /// Full row rank: the map is a submersion onto its target.
    pub fn is_surjective(&self) -> bool {
        self.rank() == self.rows
    }

    pub fn is_difference_map(&self) -> bool {
        self.cols == 2 * self.rows && *self == AffineMap::difference(self.rows)
    }
}

/// Rank by Gaussian elimination with partial pivoting and a relative pivot tolerance.
pub fn numerical_rank(matrix: &[Complex64], rows: usize, cols: usize) -> usize {
    let mut a = matrix.to_vec();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let tol = 1e-12 * scale * (rows.max(cols) as f64);
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let (pivot, best) = (row..rows)
            .map(|r| (r, a[r * cols + col].norm()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol {
            continue;
        }
        for c in 0..cols {
            a.swap(row * cols + c, pivot * cols + c);
        }
        let p = a[row * cols + col];
        for r in (row + 1)..rows {
            let f = a[r * cols + col] / p;
            if f == Complex64::zero() {
                continue;
            }
            for c in col..cols {
                let v = a[row * cols + c];
                a[r * cols + c] -= f * v;
            }
        }
        row += 1;
        rank += 1;
    }
    rank
}

impl PshExpr {
    pub fn monomial_log(coeff: Rational, exponents: Vec<Rational>) -> Result<Self> {
        let e = PshExpr::MonomialLog { coeff, exponents };
        e.validate_node()?;
        Ok(e)
    }

    /// `Σ_j exponents_j · log|z_j|` from integer exponents.
    pub fn monomial(exponents: &[i64]) -> Self {
        PshExpr::MonomialLog {
            coeff: crate::rational::int(1),
            exponents: exponents.iter().map(|&k| crate::rational::int(k)).collect(),
        }
    }

    pub fn log_abs_poly(poly: Polynomial) -> Result<Self> {
        let e = PshExpr::LogAbsPoly(poly);
        e.validate_node()?;
        Ok(e)
    }

    pub fn radial(profile: RadialProfile) -> Result<Self> {
        profile.validate()?;
        Ok(PshExpr::Radial(profile))
    }

    pub fn max(children: Vec<PshExpr>) -> Result<Self> {
        let e = PshExpr::Max(children);
        e.validate_node()?;
        Ok(e)
    }

    pub fn sum(children: Vec<PshExpr>) -> Result<Self> {
        let e = PshExpr::Sum(children);
        e.validate_node()?;
        Ok(e)
    }

    pub fn scaled(factor: Rational, child: PshExpr) -> Result<Self> {
        let e = PshExpr::Scale {
            factor,
            child: Box::new(child),
        };
        e.validate_node()?;
        Ok(e)
    }

    pub fn pullback(map: AffineMap, child: PshExpr) -> Result<Self> {
        let e = PshExpr::LinearPullback {
            map,
            child: Box::new(child),
        };
        e.validate_node()?;
        Ok(e)
    }

    pub fn unitary_sup(base: usize, block: usize, child: PshExpr) -> Result<Self> {
        let e = PshExpr::UnitarySup {
            base,
            block,
            child: Box::new(child),
        };
        e.validate_node()?;
        Ok(e)
    }

    /// Number of complex variables.
    pub fn arity(&self) -> usize {
        match self {
            PshExpr::MonomialLog { exponents, .. } => exponents.len(),
            PshExpr::LogAbsPoly(p) => p.nvars(),
            PshExpr::Radial(r) => r.arity,
            PshExpr::Max(c) | PshExpr::Sum(c) => c.first().map_or(0, PshExpr::arity),
            PshExpr::Scale { child, .. } => child.arity(),
            PshExpr::LinearPullback { map, .. } => map.cols,
            PshExpr::UnitarySup { base, block, .. } => base + block,
        }
    }

    /// Checks the invariants of this node against its direct children.
    fn validate_node(&self) -> Result<()> {
        match self {
            PshExpr::MonomialLog { coeff, exponents } => {
                if !coeff.is_positive() {
                    return Err(Error::Input("monomial coefficient must be positive".into()));
                }
                if exponents.is_empty() {
                    return Err(Error::Arity("monomial needs at least one variable".into()));
                }
                if exponents.iter().any(|e| e.is_negative()) {
                    return Err(Error::Input("monomial exponents must be nonnegative".into()));
                }
            }
            PshExpr::LogAbsPoly(p) => {
                if p.nvars() == 0 {
                    return Err(Error::Arity("polynomial needs at least one variable".into()));
                }
                if p.is_zero() {
                    return Err(Error::Input("log|f| needs f not identically zero".into()));
                }
            }
            PshExpr::Radial(r) => r.validate()?,
            PshExpr::Max(children) | PshExpr::Sum(children) => {
                let Some(first) = children.first() else {
                    return Err(Error::Input("max/sum needs at least one child".into()));
                };
                let n = first.arity();
                if let Some(bad) = children.iter().find(|c| c.arity() != n) {
                    return Err(Error::Arity(format!(
                        "children have arities {} and {}",
                        n,
                        bad.arity()
                    )));
                }
            }
            PshExpr::Scale { factor, .. } => {
                if !factor.is_positive() {
                    return Err(Error::Input("scale factor must be positive".into()));
                }
            }
            PshExpr::LinearPullback { map, child } => {
                if map.rows != child.arity() {
                    return Err(Error::Arity(format!(
                        "pullback matrix has {} rows but child arity is {}",
                        map.rows,
                        child.arity()
                    )));
                }
            }
            PshExpr::UnitarySup { base, block, child } => {
                if *block == 0 {
                    return Err(Error::Arity("unitary block must be nonempty".into()));
                }
                if base + block != child.arity() {
                    return Err(Error::Arity(format!(
                        "unitary split {}+{} does not match child arity {}",
                        base,
                        block,
                        child.arity()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Validates the whole tree.
    pub fn validate(&self) -> Result<()> {
        self.validate_node()?;
        for child in self.children() {
            child.validate()?;
        }
        Ok(())
    }

    pub fn children(&self) -> Vec<&PshExpr> {
        match self {
            PshExpr::Max(c) | PshExpr::Sum(c) => c.iter().collect(),
            PshExpr::Scale { child, .. }
            | PshExpr::LinearPullback { child, .. }
            | PshExpr::UnitarySup { child, .. } => vec![child.as_ref()],
            _ => Vec::new(),
        }
    }

    /// Built only from monomial atoms, max, sum and scale.
    pub fn is_monomial_class(&self) -> bool {
        match self {
            PshExpr::MonomialLog { .. } => true,
            PshExpr::Max(c) | PshExpr::Sum(c) => c.iter().all(PshExpr::is_monomial_class),
            PshExpr::Scale { child, .. } => child.is_monomial_class(),
            _ => false,
        }
    }

    pub fn contains_unitary_sup(&self) -> bool {
        matches!(self, PshExpr::UnitarySup { .. })
            || self.children().into_iter().any(PshExpr::contains_unitary_sup)
    }
}

/// Helper for exponent vectors that must not be all zero in a meaningful atom.
pub fn all_zero(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}
