//! Lelong numbers from the growth of sphere suprema, `ν = lim (sup_{|z-x|=r} φ) / log r`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::fit::ols;
use super::AnnulusSchedule;
use crate::error::{Error, Result};
use crate::estimate::{InvariantEstimate, Kind};
use crate::eval::Evaluator;
use crate::expr::PshExpr;
use crate::rng::substream;

/// Residual RMS (in units of `φ`) above which the fit is flagged.
pub const LELONG_RESIDUAL_LIMIT: f64 = 0.05;
/// Smallest reported half-width.
const MIN_HALF_WIDTH: f64 = 1e-6;

/// Unit vectors of `R^{2n}` viewed as `C^n`, shared by every radius.
fn sphere_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = substream(seed, &[0x1E1E, n as u64]);
    (0..count)
        .map(|_| loop {
            let v: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break v.into_iter().map(|z| z / norm).collect();
            }
        })
        .collect()
}

/// Sampled sphere suprema regressed against `log r`.
///
/// The value is the slope over the smallest radii; the half-width adds twice
/// the slope's standard error to the change in slope when the largest sample
/// on each sphere is replaced by the second largest.
pub fn lelong_numeric(expr: &PshExpr, center: &[Complex64], schedule: &AnnulusSchedule) -> Result<InvariantEstimate> {
    schedule.validate()?;
    let n = expr.arity();
    if center.len() != n {
        return Err(Error::Arity(format!(
            "center has {} coordinates, expression has arity {n}",
            center.len()
        )));
    }
    let evaluator = Evaluator::new(expr, &schedule.eval);
    let dirs = sphere_directions(n, schedule.samples_per_annulus, schedule.seed);
    let mut log_r = Vec::with_capacity(schedule.annuli);
    let mut top = Vec::with_capacity(schedule.annuli);
    let mut second = Vec::with_capacity(schedule.annuli);
    let mut point = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..schedule.annuli {
        let r = schedule.r0 * 0.5f64.powi(j as i32);
        let (mut best, mut next) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for d in &dirs {
            for ((p, c), u) in point.iter_mut().zip(center).zip(d) {
                *p = c + u * r;
            }
            let v = evaluator.eval(&point)?;
            if v > best {
                next = best;
                best = v;
            } else if v > next {
                next = v;
            }
        }
        if best == f64::NEG_INFINITY {
            return Err(Error::Degenerate(format!(
                "every sample on the sphere of radius {r:e} is -inf"
            )));
        }
        if next == f64::NEG_INFINITY {
            next = best;
        }
        log_r.push(r.ln());
        top.push(best);
        second.push(next);
    }
    let window = (schedule.annuli / 2).max(5).min(schedule.annuli);
    let start = schedule.annuli - window;
    let main = ols(&log_r[start..], &top[start..]).expect("distinct radii");
    let alt = ols(&log_r[start..], &second[start..]).expect("distinct radii");
    let half = (2.0 * main.slope_se + (main.slope - alt.slope).abs()).max(MIN_HALF_WIDTH);
    let value = main.slope.max(0.0);
    let est = InvariantEstimate::numeric(
        Kind::Lelong,
        value,
        (main.slope - half).max(0.0),
        (main.slope + half).max(0.0),
        format!(
            "slope of sphere suprema over the {window} smallest of {} radii",
            schedule.annuli
        ),
    );
    Ok(if main.rms_residual > LELONG_RESIDUAL_LIMIT {
        est.with_flag("inconclusive: fit residuals exceed threshold")
    } else {
        est
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::real_point;
    use crate::ops::make_phi_k;
    use crate::rational::int;

    fn small() -> AnnulusSchedule {
        AnnulusSchedule {
            samples_per_annulus: 512,
            ..Default::default()
        }
    }

    #[test]
    fn log_slope_of_a_power() {
        let e = PshExpr::scaled(int(2), PshExpr::monomial(&[1])).unwrap();
        let est = lelong_numeric(&e, &real_point(&[0.0]), &small()).unwrap();
        let v = est.point().unwrap();
        assert!((v - 2.0).abs() < 0.05, "{v}");
        assert!(est.flags.is_empty());
    }

    #[test]
    fn symmetrized_power_keeps_its_lelong_number() {
        let e = PshExpr::scaled(int(2), PshExpr::monomial(&[1])).unwrap();
        let phi1 = make_phi_k(&e, 1).unwrap();
        let est = lelong_numeric(&phi1, &real_point(&[0.0, 0.0]), &small()).unwrap();
        assert!((est.point().unwrap() - 2.0).abs() < 0.05);
    }

    #[test]
    fn product_of_coordinates() {
        let e = PshExpr::monomial(&[1, 1]);
        let est = lelong_numeric(&e, &real_point(&[0.0, 0.0]), &small()).unwrap();
        assert!((est.point().unwrap() - 2.0).abs() < 0.1);
    }

    #[test]
    fn smooth_point_has_zero_lelong_number() {
        let e = PshExpr::monomial(&[1]);
        let est = lelong_numeric(&e, &real_point(&[0.9]), &small()).unwrap();
        assert!(est.point().unwrap() < 0.05);
    }

    #[test]
    fn all_minus_infinity_is_degenerate() {
        // log|z1| restricted to the line z1 = 0
        let e = PshExpr::monomial(&[1, 0]);
        let zero = crate::expr::AffineMap::linear(
            2,
            1,
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        )
        .unwrap();
        let e = PshExpr::pullback(zero, e).unwrap();
        assert!(matches!(
            lelong_numeric(&e, &real_point(&[0.0]), &small()),
            Err(Error::Degenerate(_))
        ));
    }
}
