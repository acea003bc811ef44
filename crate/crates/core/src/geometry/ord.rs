//! Vanishing order of a polynomial at a point (`ν(log|f|, p) = ord_p f`).

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::{point_is_short_dyadic, MultiIndex, Polynomial};

/// Relative magnitude below which a floating Taylor coefficient counts as zero.
pub const ORD_REL_TOL: f64 = 1e-12;

/// Whether `ord_at` runs in exact Gaussian-rational arithmetic for this input.
pub fn uses_exact_arithmetic(poly: &Polynomial, point: &[Complex64]) -> bool {
    poly.has_short_dyadic_coefficients() && point_is_short_dyadic(point)
}

/// Multi-indices of the nonzero Taylor coefficients of `poly` at `point`.
pub fn shifted_support(poly: &Polynomial, point: &[Complex64]) -> Result<Vec<MultiIndex>> {
    if poly.is_zero() {
        return Err(Error::Input("the zero polynomial has no vanishing order".into()));
    }
    if point.len() != poly.nvars() {
        return Err(Error::Arity(format!(
            "point has {} coordinates, polynomial has {} variables",
            point.len(),
            poly.nvars()
        )));
    }
    if point.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input("point coordinates must be finite".into()));
    }
    let support = if uses_exact_arithmetic(poly, point) {
        poly.taylor_at_exact(point)
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(a, _)| a)
            .collect()
    } else {
        poly.taylor_at(point)
            .into_iter()
            .filter(|(_, (c, scale))| c.norm() > ORD_REL_TOL * scale)
            .map(|(a, _)| a)
            .collect()
    };
    Ok(support)
}

/// Smallest total degree of a nonzero Taylor coefficient at `point`.
///
/// Exact when the coefficients and the point are short binary fractions;
/// otherwise a coefficient is zero when it is below `1e-12` of the magnitude
/// of the sum that produced it.
pub fn ord_at(poly: &Polynomial, point: &[Complex64]) -> Result<u32> {
    let support = shifted_support(poly, point)?;
    Ok(support
        .iter()
        .map(|a| a.iter().sum::<u32>())
        .min()
        .unwrap_or_else(|| poly.total_degree()))
}
