//! Structural constructions: difference pullback, its tower, unitary
//! symmetrization (`φ_k`), restriction to affine slices, and scaling.

use num_complex::Complex64;
use num_traits::Signed;
use rand::Rng;

use crate::error::{Error, Result};
use crate::eval::{EvalOptions, Evaluator};
use crate::expr::{numerical_rank, AffineMap, PshExpr};
use crate::rational::Rational;
use crate::rng::substream;

/// Default arity cap of the tower, in real dimensions.
pub const DEFAULT_REAL_DIM_CAP: usize = 64;

/// Sample count for the `φ|_H ≢ -∞` check.
const DEGENERACY_SAMPLES: usize = 50;

/// `p_m^* φ`, i.e. `(z, w) ↦ φ(z - w)`.
pub fn pullback_difference(expr: &PshExpr) -> PshExpr {
    let m = expr.arity();
    PshExpr::LinearPullback {
        map: AffineMap::difference(m),
        child: Box::new(expr.clone()),
    }
}

pub fn tower_pullback(expr: &PshExpr, k: u32) -> Result<PshExpr> {
    tower_pullback_with_cap(expr, k, DEFAULT_REAL_DIM_CAP)
}

/// `p_{2^{k-1}n}^* ∘ ⋯ ∘ p_n^* φ`, of arity `2^k n`.
pub fn tower_pullback_with_cap(expr: &PshExpr, k: u32, real_dim_cap: usize) -> Result<PshExpr> {
    if k == 0 {
        return Err(Error::Input("tower height k must be at least 1".into()));
    }
    let n = expr.arity();
    let arity = 1usize
        .checked_shl(k)
        .and_then(|p| p.checked_mul(n))
        .filter(|a| a.checked_mul(2).is_some_and(|r| r <= real_dim_cap))
        .ok_or_else(|| {
            Error::Capacity(format!(
                "2^{k}·{n} complex variables exceed the cap of {real_dim_cap} real dimensions"
            ))
        })?;
    let mut out = expr.clone();
    for _ in 0..k {
        out = pullback_difference(&out);
    }
    debug_assert_eq!(out.arity(), arity);
    Ok(out)
}

pub fn make_phi_k(expr: &PshExpr, k: u32) -> Result<PshExpr> {
    make_phi_k_with_cap(expr, k, DEFAULT_REAL_DIM_CAP)
}

/// `φ_k(z, w) = sup_{g ∈ U((2^k-1)n)} (tower φ)(z, g w)`.
pub fn make_phi_k_with_cap(expr: &PshExpr, k: u32, real_dim_cap: usize) -> Result<PshExpr> {
    let tower = tower_pullback_with_cap(expr, k, real_dim_cap)?;
    let n = expr.arity();
    let block = tower.arity() - n;
    Ok(PshExpr::UnitarySup {
        base: n,
        block,
        child: Box::new(tower),
    })
}

/// Recognizes `make_phi_k(base, k)` and returns `(base, k)`.
pub fn as_phi_k(expr: &PshExpr) -> Option<(&PshExpr, u32)> {
    let PshExpr::UnitarySup { base, block, child } = expr else {
        return None;
    };
    let mut k = 0u32;
    let mut cur: &PshExpr = child;
    while let PshExpr::LinearPullback { map, child } = cur {
        if !map.is_difference_map() {
            break;
        }
        k += 1;
        cur = child;
    }
    let n = cur.arity();
    if k == 0 || n != *base || *block != ((1usize << k) - 1) * n {
        return None;
    }
    Some((cur, k))
}

pub fn scale(expr: &PshExpr, c: &Rational) -> Result<PshExpr> {
    if !c.is_positive() {
        return Err(Error::Input(format!("scale factor {c} must be positive")));
    }
    Ok(PshExpr::Scale {
        factor: c.clone(),
        child: Box::new(expr.clone()),
    })
}

/// Affine parametrization `t ↦ p + V t` of a regular submanifold.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceMap {
    base: Vec<Complex64>,
    /// `n × d`, row-major.
    directions: Vec<Complex64>,
    dim: usize,
}

impl SliceMap {
    pub fn new(base: Vec<Complex64>, directions: Vec<Complex64>, dim: usize) -> Result<Self> {
        let n = base.len();
        if dim == 0 || dim > n {
            return Err(Error::Input(format!(
                "slice dimension {dim} must be between 1 and the ambient arity {n}"
            )));
        }
        if directions.len() != n * dim {
            return Err(Error::Arity(format!(
                "direction matrix has {} entries, expected {n}x{dim}",
                directions.len()
            )));
        }
        if numerical_rank(&directions, n, dim) != dim {
            return Err(Error::Input("slice directions must be linearly independent".into()));
        }
        Ok(SliceMap {
            base,
            directions,
            dim,
        })
    }

    /// Builds the slice from direction columns.
    pub fn from_columns(base: Vec<Complex64>, columns: &[Vec<Complex64>]) -> Result<Self> {
        let n = base.len();
        let d = columns.len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Arity("every slice direction needs the ambient arity".into()));
        }
        let mut m = vec![Complex64::new(0.0, 0.0); n * d];
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m[i * d + j] = *v;
            }
        }
        SliceMap::new(base, m, d)
    }

    pub fn ambient_arity(&self) -> usize {
        self.base.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn base(&self) -> &[Complex64] {
        &self.base
    }

    pub fn directions(&self) -> &[Complex64] {
        &self.directions
    }

    pub fn as_affine_map(&self) -> AffineMap {
        AffineMap {
            rows: self.base.len(),
            cols: self.dim,
            matrix: self.directions.clone(),
            offset: self.base.clone(),
        }
    }
}

/// `φ|_H` as a function of the slice parameter `t`.
pub fn restrict_to_slice(expr: &PshExpr, slice: &SliceMap, opts: &EvalOptions) -> Result<PshExpr> {
    if slice.ambient_arity() != expr.arity() {
        return Err(Error::Arity(format!(
            "slice lives in C^{} but the expression has arity {}",
            slice.ambient_arity(),
            expr.arity()
        )));
    }
    let restricted = PshExpr::LinearPullback {
        map: slice.as_affine_map(),
        child: Box::new(expr.clone()),
    };
    let ev = Evaluator::new(&restricted, opts);
    let mut rng = substream(opts.seed, &[0xDE6E, slice.dim() as u64]);
    let mut t = vec![Complex64::new(0.0, 0.0); slice.dim()];
    for _ in 0..DEGENERACY_SAMPLES {
        for ti in t.iter_mut() {
            *ti = Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0);
        }
        if ev.eval_unchecked(&t) > f64::NEG_INFINITY {
            return Ok(restricted);
        }
    }
    Err(Error::Degenerate(
        "the restriction is identically -inf on the slice".into(),
    ))
}
