//! Unitarily invariant functions `χ(log|z|)`: `c · ν = n` at the origin.

use num_complex::Complex64;
use num_traits::Zero;

use super::{describe, CheckVerdict, HarnessConfig, Measurement, ReportBuilder, StatementId, VerificationReport};
use crate::error::{Error, Result};
use crate::estimators::{lct_numeric, lelong_numeric};
use crate::expr::PshExpr;
use crate::geometry::{lct_exact, lelong_exact};
use crate::rational::{int, ExtRational};

pub fn verify_radial_identity(expr: &PshExpr, config: &HarnessConfig) -> Result<VerificationReport> {
    let PshExpr::Radial(profile) = expr else {
        return Err(Error::Input("the radial identity needs a radial atom".into()));
    };
    let n = profile.arity;
    let instance = describe(expr);
    let rb = ReportBuilder::start(config);
    let origin = vec![Complex64::zero(); n];
    let nu = lelong_exact(expr, &origin)?;
    let c = lct_exact(expr, &origin)?;
    let predicted = format!("c * nu = {n}");
    if profile.limiting_slope.is_zero() {
        return Ok(rb.finish(
            StatementId::Remark2,
            &instance,
            vec![
                Measurement::estimate("exact nu", nu),
                Measurement::estimate("exact c", c),
            ],
            predicted,
            CheckVerdict::Inconclusive,
            "nu = 0 and c = +inf: the identity is vacuous",
        ));
    }
    let exact_ok = match (nu.exact_value(), c.exact_value()) {
        (Some(ExtRational::Finite(a)), Some(ExtRational::Finite(b))) => a * b == int(n as i64),
        _ => false,
    };
    let nu_hat = lelong_numeric(expr, &origin, &config.schedule)?;
    let c_hat = lct_numeric(expr, &origin, None, config.tol, &config.schedule)?;
    let nf = n as f64;
    let (numeric_verdict, product) = match (nu_hat.point(), c_hat.point(), nu_hat.bounds(), c_hat.bounds()) {
        (Some(a), Some(b), Some((alo, ahi)), Some((blo, bhi))) => {
            let p = a * b;
            let v = if (p - nf).abs() <= 0.05 * nf {
                CheckVerdict::Pass
            } else if alo * blo <= nf && nf <= ahi * bhi {
                CheckVerdict::Inconclusive
            } else {
                CheckVerdict::Fail
            };
            (v, p)
        }
        _ => (CheckVerdict::Inconclusive, f64::NAN),
    };
    Ok(rb.finish(
        StatementId::Remark2,
        &instance,
        vec![
            Measurement::estimate("exact nu", nu),
            Measurement::estimate("exact c", c),
            Measurement::estimate("numeric nu", nu_hat),
            Measurement::estimate("numeric c", c_hat),
            Measurement::value("numeric c * nu", product),
        ],
        predicted,
        CheckVerdict::from_bool(exact_ok).combine(numeric_verdict),
        "",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::AnnulusSchedule;
    use crate::expr::RadialProfile;

    fn quick() -> HarnessConfig {
        HarnessConfig {
            schedule: AnnulusSchedule {
                samples_per_annulus: 512,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn linear_profile_in_two_variables() {
        let e = PshExpr::Radial(RadialProfile::linear(2, int(1)).unwrap());
        let r = verify_radial_identity(&e, &quick()).unwrap();
        assert_eq!(r.verdict, CheckVerdict::Pass, "{r:#?}");
    }

    #[test]
    fn piecewise_profile_uses_the_limiting_slope() {
        // slope 3 towards -inf, then 5
        let e = PshExpr::Radial(RadialProfile::new(1, vec![(-1.5, -4.5), (-0.5, 0.5)], int(3)).unwrap());
        let r = verify_radial_identity(&e, &quick()).unwrap();
        assert_eq!(r.verdict, CheckVerdict::Pass, "{r:#?}");
    }

    #[test]
    fn flat_profile_is_vacuous() {
        let e = PshExpr::Radial(RadialProfile::new(1, vec![(0.0, 0.0)], int(0)).unwrap());
        let r = verify_radial_identity(&e, &quick()).unwrap();
        assert_eq!(r.verdict, CheckVerdict::Inconclusive);
    }

    #[test]
    fn non_radial_input_is_rejected() {
        assert!(verify_radial_identity(&PshExpr::monomial(&[1]), &quick()).is_err());
    }
}
