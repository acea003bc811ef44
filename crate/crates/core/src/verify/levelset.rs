//! Lelong upper-level sets of `log|f|` as common zero loci of derivatives.
//!
//! `ν(log|f|, p) = ord_p f` is an integer, so `{ν ≥ c}` is `{ord ≥ ⌈c⌉}`: the
//! points where every partial derivative of order below `⌈c⌉` vanishes.

use num_complex::Complex64;
use num_traits::Zero;

use super::{format_point, CheckVerdict, HarnessConfig, Measurement, ReportBuilder, StatementId, VerificationReport};
use crate::error::{Error, Result};
use crate::geometry::ord_at;
use crate::poly::{indices_below, point_is_short_dyadic, Polynomial};

/// Relative size below which a floating generator value counts as zero.
pub const MEMBERSHIP_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    /// `⌈c⌉`.
    pub order: u32,
    pub generators: Vec<Polynomial>,
}

impl LevelSet {
    fn vanishes(g: &Polynomial, p: &[Complex64]) -> bool {
        if g.has_short_dyadic_coefficients() && point_is_short_dyadic(p) {
            g.eval_exact(p).is_zero()
        } else {
            g.eval(p).norm() <= MEMBERSHIP_REL_TOL * g.eval_abs(p)
        }
    }

    /// Whether every generator vanishes at `p`.
    pub fn contains(&self, p: &[Complex64]) -> Result<bool> {
        if let Some(g) = self.generators.first() {
            if p.len() != g.nvars() {
                return Err(Error::Arity(format!(
                    "point has {} coordinates, polynomial has {} variables",
                    p.len(),
                    g.nvars()
                )));
            }
        }
        Ok(self.generators.iter().all(|g| Self::vanishes(g, p)))
    }

    /// A nonzero constant among the generators makes the set empty.
    pub fn is_certainly_empty(&self) -> bool {
        self.generators.iter().any(|g| g.total_degree() == 0)
    }
}

pub fn levelset_generators(poly: &Polynomial, c: f64) -> Result<LevelSet> {
    if poly.is_zero() {
        return Err(Error::Input("the zero polynomial has no level sets".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Input(format!("level c must be positive, got {c}")));
    }
    let order = c.ceil() as u32;
    let mut generators: Vec<Polynomial> = Vec::new();
    for alpha in indices_below(poly.nvars(), order) {
        let g = poly.partial(&alpha);
        if !g.is_zero() && !generators.contains(&g) {
            generators.push(g);
        }
    }
    Ok(LevelSet { order, generators })
}

/// Compares the derivative test with the vanishing order at every point.
pub fn verify_levelset(
    poly: &Polynomial,
    c: f64,
    points: &[Vec<Complex64>],
    config: &HarnessConfig,
) -> Result<VerificationReport> {
    let rb = ReportBuilder::start(config);
    let set = levelset_generators(poly, c)?;
    let mut disagreements = Vec::new();
    let mut members = 0usize;
    for p in points {
        let inside = set.contains(p)?;
        let by_order = ord_at(poly, p)? >= set.order;
        members += inside as usize;
        if inside != by_order {
            disagreements.push(format_point(p));
        }
    }
    let instance = format!(
        "f of degree {} with {} terms in {} variables, c={c}",
        poly.total_degree(),
        poly.num_terms(),
        poly.nvars()
    );
    let note = if disagreements.is_empty() {
        String::new()
    } else {
        format!("disagreements at {}", disagreements.join(", "))
    };
    Ok(rb.finish(
        StatementId::Corollary1,
        &instance,
        vec![
            Measurement::value("generators", set.generators.len() as f64),
            Measurement::value("points", points.len() as f64),
            Measurement::value("points in the level set", members as f64),
            Measurement::value("disagreements", disagreements.len() as f64),
        ],
        format!("zero locus of the partials of order < {} equals {{ord >= {}}}", set.order, set.order),
        CheckVerdict::from_bool(disagreements.is_empty()),
        note,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::real_point;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn generators_of_z1_squared_z2() {
        let f = Polynomial::monomial(vec![2, 1], c(1.0));
        let set = levelset_generators(&f, 2.0).unwrap();
        assert_eq!(set.order, 2);
        let expected = [
            f.clone(),
            Polynomial::monomial(vec![1, 1], c(2.0)),
            Polynomial::monomial(vec![2, 0], c(1.0)),
        ];
        assert_eq!(set.generators.len(), 3);
        for g in &expected {
            assert!(set.generators.contains(g), "{g:?}");
        }
        assert!(set.contains(&real_point(&[0.0, 5.0])).unwrap());
        assert!(!set.contains(&real_point(&[1.0, 0.0])).unwrap());
    }

    #[test]
    fn fractional_levels_round_up() {
        let f = Polynomial::monomial(vec![2], c(1.0));
        let set = levelset_generators(&f, 1.5).unwrap();
        assert_eq!(set.order, 2);
        assert_eq!(set.generators.len(), 2);
        assert!(set.contains(&real_point(&[0.0])).unwrap());
        assert!(!set.contains(&real_point(&[0.25])).unwrap());
    }

    #[test]
    fn levels_above_the_degree_are_empty() {
        let f = Polynomial::monomial(vec![2], c(1.0));
        let set = levelset_generators(&f, 3.0).unwrap();
        assert!(set.is_certainly_empty());
        assert!(!set.contains(&real_point(&[0.0])).unwrap());
    }

    #[test]
    fn report_agrees_with_vanishing_order() {
        let f = Polynomial::monomial(vec![2, 1], c(1.0));
        let pts = vec![real_point(&[0.0, 5.0]), real_point(&[1.0, 0.0]), real_point(&[0.0, 0.0])];
        let r = verify_levelset(&f, 2.0, &pts, &HarnessConfig::default()).unwrap();
        assert_eq!(r.verdict, CheckVerdict::Pass);
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert!(levelset_generators(&Polynomial::zero(1), 1.0).is_err());
    }
}
