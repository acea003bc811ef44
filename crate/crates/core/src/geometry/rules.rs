//! Exact Lelong numbers and singularity exponents by structural rules.
//!
//! The expression is first brought to a canonical form that differs from the
//! input by a locally bounded function: affine maps that are not submersions
//! (restrictions) are pushed into the atoms, while submersions are kept as
//! nodes because both invariants pass through them unchanged.

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use super::newton::newton_polyhedron;
use super::ord::{ord_at, shifted_support};
use super::NewtonPolyhedron;
use crate::error::{Error, Result};
use crate::estimate::{InvariantEstimate, Kind, Method};
use crate::expr::{AffineMap, PshExpr, RadialProfile};
use crate::ops::as_phi_k;
use crate::poly::Polynomial;
use crate::rational::{common_denominator, int, ExtRational, Rational};

/// Canonical form; `None` when the expression is identically `-∞`.
pub fn canonicalize(e: &PshExpr) -> Option<PshExpr> {
    match e {
        PshExpr::MonomialLog { .. } | PshExpr::LogAbsPoly(_) | PshExpr::Radial(_) => Some(e.clone()),
        PshExpr::Max(children) => {
            let kids: Vec<PshExpr> = children.iter().filter_map(canonicalize).collect();
            (!kids.is_empty()).then_some(PshExpr::Max(kids))
        }
        PshExpr::Sum(children) => children
            .iter()
            .map(canonicalize)
            .collect::<Option<Vec<_>>>()
            .map(PshExpr::Sum),
        PshExpr::Scale { factor, child } => canonicalize(child).map(|c| PshExpr::Scale {
            factor: factor.clone(),
            child: Box::new(c),
        }),
        PshExpr::UnitarySup { base, block, child } => canonicalize(child).map(|c| PshExpr::UnitarySup {
            base: *base,
            block: *block,
            child: Box::new(c),
        }),
        PshExpr::LinearPullback { map, child } => pull(map, &canonicalize(child)?),
    }
}

fn pull(map: &AffineMap, child: &PshExpr) -> Option<PshExpr> {
    if map.is_surjective() {
        Some(PshExpr::LinearPullback {
            map: map.clone(),
            child: Box::new(child.clone()),
        })
    } else {
        push_map(map, child)
    }
}

fn push_map(map: &AffineMap, e: &PshExpr) -> Option<PshExpr> {
    match e {
        PshExpr::MonomialLog { coeff, exponents } => substitute_monomial(map, coeff, exponents),
        PshExpr::LogAbsPoly(p) => {
            let q = p.compose_affine(&map.matrix, map.cols, &map.offset);
            (!q.is_zero()).then_some(PshExpr::LogAbsPoly(q))
        }
        PshExpr::Radial(r) => Some(match conformal_factor(map) {
            Some(lambda) => {
                let shift = lambda.ln();
                PshExpr::Radial(RadialProfile {
                    arity: map.cols,
                    breakpoints: r.breakpoints.iter().map(|(t, v)| (t - shift, *v)).collect(),
                    limiting_slope: r.limiting_slope.clone(),
                })
            }
            None => PshExpr::LinearPullback {
                map: map.clone(),
                child: Box::new(e.clone()),
            },
        }),
        PshExpr::Max(children) => {
            let kids: Vec<PshExpr> = children.iter().filter_map(|c| push_map(map, c)).collect();
            (!kids.is_empty()).then_some(PshExpr::Max(kids))
        }
        PshExpr::Sum(children) => children
            .iter()
            .map(|c| push_map(map, c))
            .collect::<Option<Vec<_>>>()
            .map(PshExpr::Sum),
        PshExpr::Scale { factor, child } => push_map(map, child).map(|c| PshExpr::Scale {
            factor: factor.clone(),
            child: Box::new(c),
        }),
        PshExpr::LinearPullback { map: inner, child } => pull(&inner.compose(map), child),
        PshExpr::UnitarySup { .. } => Some(PshExpr::LinearPullback {
            map: map.clone(),
            child: Box::new(e.clone()),
        }),
    }
}

/// `λ` when the map is `t ↦ V t` with `V^* V = λ² I`.
fn conformal_factor(map: &AffineMap) -> Option<f64> {
    if !map.has_zero_offset() {
        return None;
    }
    let gram = |a: usize, b: usize| -> Complex64 {
        (0..map.rows).map(|r| map.entry(r, a).conj() * map.entry(r, b)).sum()
    };
    let l2 = gram(0, 0).re;
    for a in 0..map.cols {
        for b in 0..map.cols {
            let g = gram(a, b);
            let expected = if a == b { l2 } else { 0.0 };
            if (g - Complex64::new(expected, 0.0)).norm() > 1e-12 * l2.max(1.0) {
                return None;
            }
        }
    }
    (l2 > 0.0).then(|| l2.sqrt())
}

fn substitute_monomial(map: &AffineMap, coeff: &Rational, exponents: &[Rational]) -> Option<PshExpr> {
    let mut out = vec![Rational::zero(); map.cols];
    let mut monomial_shaped = true;
    for (j, e) in exponents.iter().enumerate() {
        if e.is_zero() {
            continue;
        }
        let nonzero: Vec<usize> = (0..map.cols)
            .filter(|&c| map.entry(j, c) != Complex64::zero())
            .collect();
        let b = map.offset[j];
        match nonzero.as_slice() {
            [] if b == Complex64::zero() => return None,
            [] => {}
            [c] if b == Complex64::zero() => out[*c] += e,
            _ => monomial_shaped = false,
        }
    }
    if monomial_shaped {
        return Some(PshExpr::MonomialLog {
            coeff: coeff.clone(),
            exponents: out,
        });
    }
    // coeff · Σ e_j log|z_j| = (coeff / q) · log|Π z_j^{q e_j}|
    let q = Rational::from_integer(common_denominator(exponents));
    let powers: Vec<u32> = exponents
        .iter()
        .map(|e| {
            let k = (e * &q).to_integer();
            u32::try_from(k).expect("exponent fits in u32")
        })
        .collect();
    let poly = Polynomial::monomial(powers, Complex64::new(1.0, 0.0));
    let composed = poly.compose_affine(&map.matrix, map.cols, &map.offset);
    if composed.is_zero() {
        return None;
    }
    let factor = coeff / q;
    let atom = PshExpr::LogAbsPoly(composed);
    Some(if factor.is_one() {
        atom
    } else {
        PshExpr::Scale {
            factor,
            child: Box::new(atom),
        }
    })
}

fn check_point(expr: &PshExpr, point: &[Complex64]) -> Result<()> {
    if point.len() != expr.arity() {
        return Err(Error::Arity(format!(
            "point has {} coordinates, expression has arity {}",
            point.len(),
            expr.arity()
        )));
    }
    if point.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input("point coordinates must be finite".into()));
    }
    Ok(())
}

fn is_origin(x: &[Complex64]) -> bool {
    x.iter().all(|z| *z == Complex64::zero())
}

fn nu(e: &PshExpr, x: &[Complex64]) -> Option<Rational> {
    match e {
        PshExpr::MonomialLog { coeff, exponents } => {
            let s = exponents
                .iter()
                .zip(x)
                .filter(|(_, z)| **z == Complex64::zero())
                .fold(Rational::zero(), |acc, (k, _)| acc + k);
            Some(coeff * s)
        }
        PshExpr::LogAbsPoly(p) => ord_at(p, x).ok().map(|k| int(k as i64)),
        PshExpr::Radial(r) => Some(if is_origin(x) {
            r.limiting_slope.clone()
        } else {
            Rational::zero()
        }),
        PshExpr::Max(children) => {
            let vals: Vec<Option<Rational>> = children.iter().map(|c| nu(c, x)).collect();
            if vals.iter().any(|v| v.as_ref().is_some_and(Zero::is_zero)) {
                return Some(Rational::zero());
            }
            vals.into_iter().collect::<Option<Vec<_>>>()?.into_iter().min()
        }
        PshExpr::Sum(children) => children
            .iter()
            .map(|c| nu(c, x))
            .try_fold(Rational::zero(), |acc, v| Some(acc + v?)),
        PshExpr::Scale { factor, child } => nu(child, x).map(|v| v * factor),
        PshExpr::LinearPullback { map, child } => {
            if map.is_surjective() {
                nu(child, &map.apply(x))
            } else {
                None
            }
        }
        PshExpr::UnitarySup { base, child, .. } => {
            if is_origin(&x[*base..]) {
                nu(child, x)
            } else {
                None
            }
        }
    }
}

/// Exact Lelong number, or a `numeric-required` estimate when no rule applies.
pub fn lelong_exact(expr: &PshExpr, point: &[Complex64]) -> Result<InvariantEstimate> {
    check_point(expr, point)?;
    let canon = canonicalize(expr)
        .ok_or_else(|| Error::Degenerate("expression is identically -inf".into()))?;
    Ok(match nu(&canon, point) {
        Some(v) => {
            let method = if matches!(canon, PshExpr::Radial(_)) {
                Method::ClosedForm
            } else {
                Method::ExactRule
            };
            InvariantEstimate::exact(Kind::Lelong, ExtRational::Finite(v), method, "structural rules")
        }
        None => InvariantEstimate::numeric_required(Kind::Lelong, "no exact rule covers this point"),
    })
}

#[derive(Debug, Clone, PartialEq)]
struct LctBound {
    lo: ExtRational,
    hi: ExtRational,
    method: Method,
}

impl LctBound {
    fn exact(v: ExtRational, method: Method) -> Self {
        LctBound {
            lo: v.clone(),
            hi: v,
            method,
        }
    }

    fn divided(self, c: &Rational) -> Self {
        let inv = c.recip();
        LctBound {
            lo: self.lo.scale(&inv),
            hi: self.hi.scale(&inv),
            method: self.method,
        }
    }
}

/// `[1/ν, N/ν]`; `ν = 0` gives `[+∞, +∞]`.
pub fn skoda_sandwich(nu: &Rational, ambient_dim: usize) -> Result<(ExtRational, ExtRational)> {
    if nu.is_negative() {
        return Err(Error::Input("Lelong numbers are nonnegative".into()));
    }
    if ambient_dim == 0 {
        return Err(Error::Input("ambient dimension must be positive".into()));
    }
    if nu.is_zero() {
        return Ok((ExtRational::Infinity, ExtRational::Infinity));
    }
    let inv = nu.recip();
    Ok((
        ExtRational::Finite(inv.clone()),
        ExtRational::Finite(inv * int(ambient_dim as i64)),
    ))
}

fn monomial_lct(poly: &NewtonPolyhedron, x: &[Complex64]) -> ExtRational {
    let zeros: Vec<usize> = (0..x.len()).filter(|&j| x[j] == Complex64::zero()).collect();
    if zeros.is_empty() {
        return ExtRational::Infinity;
    }
    let local = poly.project(&zeros);
    if local.min_degree().is_zero() {
        ExtRational::Infinity
    } else {
        local.lct_at_origin()
    }
}

fn lct(e: &PshExpr, x: &[Complex64]) -> Option<LctBound> {
    if e.is_monomial_class() {
        let poly = newton_polyhedron(e).ok()?;
        return Some(LctBound::exact(monomial_lct(&poly, x), Method::Lp));
    }
    let skoda = || -> Option<LctBound> {
        let v = nu(e, x)?;
        let (lo, hi) = skoda_sandwich(&v, x.len()).ok()?;
        Some(LctBound {
            lo,
            hi,
            method: Method::IntervalCertificate,
        })
    };
    match e {
        PshExpr::Radial(r) => Some(if is_origin(x) {
            let v = ExtRational::Finite(r.limiting_slope.clone()).recip().scale(&int(r.arity as i64));
            LctBound::exact(v, Method::ClosedForm)
        } else {
            LctBound::exact(ExtRational::Infinity, Method::ExactRule)
        }),
        PshExpr::Scale { factor, child } => lct(child, x).map(|b| b.divided(factor)),
        PshExpr::LinearPullback { map, child } if map.is_surjective() => lct(child, &map.apply(x)),
        PshExpr::LogAbsPoly(p) => {
            let support = shifted_support(p, x).ok()?;
            let order = support.iter().map(|a| a.iter().sum::<u32>()).min()?;
            if order == 0 {
                return Some(LctBound::exact(ExtRational::Infinity, Method::ExactRule));
            }
            let generators: Vec<Vec<Rational>> = support
                .iter()
                .map(|a| a.iter().map(|&k| int(k as i64)).collect())
                .collect();
            let newton = NewtonPolyhedron::new(x.len(), generators).ok()?;
            let newton_bound = newton.lct_at_origin();
            if support.len() == 1 {
                return Some(LctBound::exact(newton_bound, Method::Lp));
            }
            let (lo, hi) = skoda_sandwich(&int(order as i64), x.len()).ok()?;
            Some(LctBound {
                lo,
                hi: hi.min(newton_bound),
                method: Method::IntervalCertificate,
            })
        }
        PshExpr::UnitarySup { base, .. } if is_origin(&x[*base..]) => {
            if let Some((inner, k)) = as_phi_k(e) {
                let n = inner.arity();
                let v = nu(inner, &x[..n])?;
                if v.is_zero() {
                    return Some(LctBound::exact(ExtRational::Infinity, Method::IntervalCertificate));
                }
                let inv = v.recip();
                let top = int((1i64 << k) * n as i64);
                let bottom = int(((1i64 << k) - 1) * n as i64);
                return Some(LctBound {
                    lo: ExtRational::Finite(&inv * bottom),
                    hi: ExtRational::Finite(&inv * top),
                    method: Method::IntervalCertificate,
                });
            }
            skoda()
        }
        PshExpr::Max(children) => {
            let mut b = skoda()?;
            for c in children {
                if let Some(cb) = lct(c, x) {
                    b.lo = b.lo.max(cb.lo);
                }
            }
            Some(b)
        }
        PshExpr::Sum(children) => {
            let mut b = skoda()?;
            for c in children {
                if let Some(cb) = lct(c, x) {
                    b.hi = b.hi.min(cb.hi);
                }
            }
            Some(b)
        }
        _ => skoda(),
    }
}

/// Exact singularity exponent, an interval certificate, or `numeric-required`.
pub fn lct_exact(expr: &PshExpr, point: &[Complex64]) -> Result<InvariantEstimate> {
    check_point(expr, point)?;
    let canon = canonicalize(expr)
        .ok_or_else(|| Error::Degenerate("expression is identically -inf".into()))?;
    Ok(match lct(&canon, point) {
        Some(b) => {
            let note = match b.method {
                Method::Lp => "1/σ* from the Newton polyhedron",
                Method::ClosedForm => "radial closed form n/ν",
                Method::IntervalCertificate => "certified bounds",
                _ => "structural rules",
            };
            let est = InvariantEstimate::interval(Kind::Lct, b.lo.clone(), b.hi.clone(), b.method, note);
            if b.hi.is_infinite() && b.lo.is_infinite() {
                InvariantEstimate {
                    note: "ν = 0, so e^{-2cφ} is integrable for every c".into(),
                    ..est
                }
            } else {
                est
            }
        }
        None => InvariantEstimate::numeric_required(Kind::Lct, "no exact rule covers this point"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::real_point;
    use crate::ops::{make_phi_k, pullback_difference, restrict_to_slice, SliceMap};
    use crate::rational::rat;
    use crate::EvalOptions;

    fn origin(n: usize) -> Vec<Complex64> {
        vec![Complex64::zero(); n]
    }

    fn exact(e: &InvariantEstimate) -> ExtRational {
        e.exact_value().cloned().expect("exact value")
    }

    fn q(p: i64, d: i64) -> ExtRational {
        ExtRational::Finite(rat(p, d))
    }

    #[test]
    fn monomial_lelong_and_lct() {
        let m = PshExpr::monomial(&[2, 1]);
        assert_eq!(exact(&lelong_exact(&m, &origin(2)).unwrap()), q(3, 1));
        let l = lct_exact(&m, &origin(2)).unwrap();
        assert_eq!(l.method, Method::Lp);
        assert_eq!(exact(&l), q(1, 2));
        let z1z2 = PshExpr::monomial(&[1, 1]);
        assert_eq!(exact(&lct_exact(&z1z2, &origin(2)).unwrap()), q(1, 1));
        let mx = PshExpr::max(vec![PshExpr::monomial(&[1, 0]), PshExpr::monomial(&[0, 1])]).unwrap();
        assert_eq!(exact(&lct_exact(&mx, &origin(2)).unwrap()), q(2, 1));
        assert_eq!(exact(&lelong_exact(&mx, &origin(2)).unwrap()), q(1, 1));
        let mx2 = PshExpr::max(vec![PshExpr::monomial(&[2, 1]), PshExpr::monomial(&[0, 3])]).unwrap();
        assert_eq!(exact(&lelong_exact(&mx2, &origin(2)).unwrap()), q(3, 1));
        assert_eq!(exact(&lct_exact(&mx2, &origin(2)).unwrap()), q(2, 3));
    }

    #[test]
    fn partially_zero_points_eliminate_coordinates() {
        let m = PshExpr::monomial(&[2, 1]);
        let p = real_point(&[0.0, 0.5]);
        assert_eq!(exact(&lelong_exact(&m, &p).unwrap()), q(2, 1));
        assert_eq!(exact(&lct_exact(&m, &p).unwrap()), q(1, 2));
        let generic = real_point(&[0.3, 0.5]);
        assert_eq!(exact(&lelong_exact(&m, &generic).unwrap()), q(0, 1));
        assert_eq!(exact(&lct_exact(&m, &generic).unwrap()), ExtRational::Infinity);
    }

    #[test]
    fn radial_closed_form() {
        let r = PshExpr::Radial(RadialProfile::linear(2, int(1)).unwrap());
        let l = lelong_exact(&r, &origin(2)).unwrap();
        assert_eq!(l.method, Method::ClosedForm);
        assert_eq!(exact(&l), q(1, 1));
        assert_eq!(exact(&lct_exact(&r, &origin(2)).unwrap()), q(2, 1));
        let flat = PshExpr::Radial(RadialProfile::new(2, vec![(0.0, 0.0)], int(0)).unwrap());
        assert_eq!(exact(&lct_exact(&flat, &origin(2)).unwrap()), ExtRational::Infinity);
    }

    #[test]
    fn pullback_and_symmetrization_rules() {
        let phi = PshExpr::scaled(int(2), PshExpr::monomial(&[1])).unwrap();
        let pb = pullback_difference(&phi);
        assert_eq!(exact(&lelong_exact(&pb, &real_point(&[0.0, 0.0])).unwrap()), q(2, 1));
        assert_eq!(exact(&lct_exact(&pb, &real_point(&[0.0, 0.0])).unwrap()), q(1, 2));
        let p1 = make_phi_k(&phi, 1).unwrap();
        assert_eq!(exact(&lelong_exact(&p1, &real_point(&[0.0, 0.0])).unwrap()), q(2, 1));
        let l = lct_exact(&p1, &real_point(&[0.0, 0.0])).unwrap();
        assert_eq!(l.method, Method::IntervalCertificate);
        assert_eq!(l.bounds(), Some((0.5, 1.0)));
        // away from w = 0 no rule applies to the sup
        let off = lelong_exact(&p1, &real_point(&[0.0, 0.3])).unwrap();
        assert_eq!(off.method, Method::NumericRequired);
        // smooth point: ν = 0, threshold infinite
        let smooth = lct_exact(&p1, &real_point(&[0.5, 0.0])).unwrap();
        assert_eq!(exact(&smooth), ExtRational::Infinity);
    }

    #[test]
    fn restriction_is_pushed_into_monomials() {
        let f = PshExpr::monomial(&[1, 1]);
        let one = Complex64::new(1.0, 0.0);
        let slice = SliceMap::from_columns(origin(2), &[vec![one, one]]).unwrap();
        let r = restrict_to_slice(&f, &slice, &EvalOptions::default()).unwrap();
        assert_eq!(canonicalize(&r), Some(PshExpr::monomial(&[2])));
        assert_eq!(exact(&lct_exact(&r, &origin(1)).unwrap()), q(1, 2));
        assert_eq!(exact(&lelong_exact(&r, &origin(1)).unwrap()), q(2, 1));
    }

    #[test]
    fn coordinate_slices_drop_polar_generators() {
        let mx = PshExpr::max(vec![PshExpr::monomial(&[1, 0]), PshExpr::monomial(&[0, 1])]).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let slice = SliceMap::from_columns(origin(2), &[vec![one, Complex64::zero()]]).unwrap();
        let r = restrict_to_slice(&mx, &slice, &EvalOptions::default()).unwrap();
        assert_eq!(exact(&lct_exact(&r, &origin(1)).unwrap()), q(1, 1));
        assert_eq!(exact(&lelong_exact(&r, &origin(1)).unwrap()), q(1, 1));
    }

    #[test]
    fn non_monomial_restrictions_become_polynomials() {
        let m = PshExpr::monomial(&[1, 1]);
        let one = Complex64::new(1.0, 0.0);
        let slice = SliceMap::from_columns(origin(2), &[vec![one, Complex64::new(2.0, 0.0)], vec![
            Complex64::zero(),
            one,
        ]])
        .unwrap();
        let r = restrict_to_slice(&m, &slice, &EvalOptions::default()).unwrap();
        // z1 = t1, z2 = 2 t1 + t2 is invertible, so the map stays a submersion node
        assert_eq!(exact(&lelong_exact(&r, &origin(2)).unwrap()), q(2, 1));
        // a genuinely non-monomial line: z1 = t, z2 = t + 1 (offset) → log|t(t+1)|
        let line = SliceMap::from_columns(vec![Complex64::zero(), one], &[vec![one, one]]).unwrap();
        let r = restrict_to_slice(&m, &line, &EvalOptions::default()).unwrap();
        assert_eq!(exact(&lelong_exact(&r, &origin(1)).unwrap()), q(1, 1));
        assert_eq!(exact(&lct_exact(&r, &origin(1)).unwrap()), q(1, 1));
    }

    #[test]
    fn polynomials_get_certified_intervals() {
        // f = z1^2 + z2^3 at the origin: ν = 2, Skoda [1/2, 1], Newton bound 5/6
        let f = Polynomial::from_terms(2, [
            (vec![2, 0], Complex64::new(1.0, 0.0)),
            (vec![0, 3], Complex64::new(1.0, 0.0)),
        ])
        .unwrap();
        let e = PshExpr::LogAbsPoly(f);
        let l = lct_exact(&e, &origin(2)).unwrap();
        assert_eq!(l.method, Method::IntervalCertificate);
        assert_eq!(
            l.value,
            crate::estimate::EstimateValue::Interval {
                lo: q(1, 2),
                hi: q(5, 6)
            }
        );
    }

    #[test]
    fn skoda_intervals() {
        assert_eq!(skoda_sandwich(&int(3), 2).unwrap(), (q(1, 3), q(2, 3)));
        assert_eq!(skoda_sandwich(&int(1), 3).unwrap(), (q(1, 1), q(3, 1)));
        assert_eq!(skoda_sandwich(&int(2), 1).unwrap(), (q(1, 2), q(1, 2)));
        assert_eq!(
            skoda_sandwich(&int(0), 2).unwrap(),
            (ExtRational::Infinity, ExtRational::Infinity)
        );
    }

    #[test]
    fn identically_minus_infinity_is_degenerate() {
        let m = PshExpr::monomial(&[1, 0]);
        let map = AffineMap::linear(2, 1, vec![Complex64::zero(), Complex64::new(1.0, 0.0)]).unwrap();
        let e = PshExpr::pullback(map, m).unwrap();
        assert!(matches!(lelong_exact(&e, &origin(1)), Err(Error::Degenerate(_))));
    }
}
