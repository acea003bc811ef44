//! Pointwise inclusions between Lelong upper-level sets and sublevel sets of
//! the exponent of `(2^k n) φ_k` on `{w = 0}`:
//! `{ν ≥ c} ⊆ {c((2^k n)φ_k) ≤ 1/c} ⊆ {ν ≥ (2^k-1)c/2^k}`.

use num_complex::Complex64;
use num_traits::Zero;

use super::theorem1::reference_lelong;
use super::{
    describe, format_point, sort_reports, CheckVerdict, HarnessConfig, Measurement, ReportBuilder, StatementId,
    VerificationReport,
};
use crate::error::{Error, Result};
use crate::estimators::lct_numeric;
use crate::expr::PshExpr;
use crate::ops::{make_phi_k, scale};
use crate::rational::int;

pub fn verify_levelset_sandwich(
    expr: &PshExpr,
    c: f64,
    k: u32,
    points: &[Vec<Complex64>],
    config: &HarnessConfig,
) -> Result<Vec<VerificationReport>> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Input(format!("level c must be positive, got {c}")));
    }
    let n = expr.arity();
    let phi_k = make_phi_k(expr, k)?;
    let m = phi_k.arity() - n;
    if m > 1 && !config.sampled_unitary {
        return Err(Error::Input(format!(
            "the unitary block has {m} coordinates; its supremum is only sampled, enable sampled mode to proceed"
        )));
    }
    let weight = (1i64 << k) * n as i64;
    let scaled = scale(&phi_k, &int(weight))?;
    let lower_level = c * ((1u64 << k) - 1) as f64 / (1u64 << k) as f64;
    let tag = describe(expr);
    let mut reports = Vec::new();
    for z in points {
        if z.len() != n {
            return Err(Error::Arity(format!(
                "point has {} coordinates, expression has arity {n}",
                z.len()
            )));
        }
        let rb = ReportBuilder::start(config);
        let instance = format!("{tag} c={c} k={k} z={}", format_point(z));
        let mut zw = z.clone();
        zw.resize(n + m, Complex64::zero());
        let nu = reference_lelong(expr, z, config)?;
        let c_hat = lct_numeric(&scaled, &zw, None, config.tol, &config.schedule)?;
        let (nu_lo, nu_hi) = nu.bounds().expect("reference Lelong number is known");
        let (c_lo, c_hi) = c_hat.bounds().expect("numeric threshold has bounds");
        let target = 1.0 / c;
        let mut notes = Vec::new();

        // Upper inclusion: ν ≥ c forces ĉ ≤ 1/c (closed side, so only a
        // certain violation counts).
        let upper = if nu_lo >= c {
            let v = CheckVerdict::from_bool(c_lo <= target);
            notes.push(format!("nu >= {c}: need c_hat <= {target:.6}"));
            v
        } else if nu_hi < c {
            CheckVerdict::Pass
        } else {
            notes.push("nu straddles the level".into());
            CheckVerdict::Inconclusive
        };
        // Lower inclusion: ν below the lower level forces ĉ > 1/c.
        let lower = if nu_hi < lower_level {
            notes.push(format!("nu < {lower_level}: need c_hat > {target:.6}"));
            CheckVerdict::from_bool(c_hi > target)
        } else if nu_lo >= lower_level {
            CheckVerdict::Pass
        } else {
            notes.push("nu straddles the lower level".into());
            CheckVerdict::Inconclusive
        };
        reports.push(rb.finish(
            StatementId::RemarkSandwich,
            &instance,
            vec![
                Measurement::estimate("nu(phi, z)", nu),
                Measurement::estimate(format!("numeric c({weight} phi_k, (z,0))"), c_hat),
            ],
            format!(
                "nu >= {c} implies c_hat <= {target:.6}; c_hat <= {target:.6} implies nu >= {lower_level}"
            ),
            upper.combine(lower),
            notes.join("; "),
        ));
    }
    sort_reports(&mut reports);
    Ok(reports)
}
