//! Behaviour of both invariants under restriction to affine slices:
//! the exponent can only drop and the Lelong number can only grow.

use num_complex::Complex64;
use num_traits::Zero;

use super::{
    compare_le, describe, format_estimate, format_point, sort_reports, CheckVerdict, HarnessConfig, Measurement,
    ReportBuilder, StatementId, VerificationReport,
};
use crate::error::{Error, Result};
use crate::estimate::{EstimateValue, InvariantEstimate};
use crate::estimators::{lct_numeric, lelong_numeric};
use crate::expr::PshExpr;
use crate::geometry::{lct_exact, lelong_exact};
use crate::ops::{restrict_to_slice, SliceMap};
use crate::rational::ExtRational;

fn exact_bounds(e: &InvariantEstimate) -> Option<(ExtRational, ExtRational)> {
    match &e.value {
        EstimateValue::Exact { value } => Some((value.clone(), value.clone())),
        EstimateValue::Interval { lo, hi } => Some((lo.clone(), hi.clone())),
        _ => None,
    }
}

/// `a ≤ b` for two estimates; exact arithmetic when both sides are certified.
pub(crate) fn estimate_le(a: &InvariantEstimate, b: &InvariantEstimate, slack: f64) -> CheckVerdict {
    if let (Some((alo, ahi)), Some((blo, bhi))) = (exact_bounds(a), exact_bounds(b)) {
        return if ahi <= blo {
            CheckVerdict::Pass
        } else if alo > bhi {
            CheckVerdict::Fail
        } else {
            CheckVerdict::Inconclusive
        };
    }
    match (a.bounds(), b.bounds()) {
        (Some(x), Some(y)) => compare_le(x, y, slack),
        _ => CheckVerdict::Inconclusive,
    }
}

pub(crate) fn lelong_any(e: &PshExpr, x: &[Complex64], config: &HarnessConfig) -> Result<InvariantEstimate> {
    let exact = lelong_exact(e, x)?;
    if exact.is_known() {
        Ok(exact)
    } else {
        lelong_numeric(e, x, &config.schedule)
    }
}

pub(crate) fn lct_any(e: &PshExpr, x: &[Complex64], config: &HarnessConfig) -> Result<InvariantEstimate> {
    let exact = lct_exact(e, x)?;
    if exact.is_known() {
        Ok(exact)
    } else {
        lct_numeric(e, x, None, config.tol, &config.schedule)
    }
}

fn describe_slice(s: &SliceMap) -> String {
    let n = s.ambient_arity();
    let cols: Vec<String> = (0..s.dim())
        .map(|j| {
            let col: Vec<Complex64> = (0..n).map(|i| s.directions()[i * s.dim() + j]).collect();
            format_point(&col)
        })
        .collect();
    cols.join(" ")
}

pub fn verify_restriction_monotonicity(
    expr: &PshExpr,
    slices: &[SliceMap],
    base_point: &[Complex64],
    config: &HarnessConfig,
) -> Result<Vec<VerificationReport>> {
    if base_point.len() != expr.arity() {
        return Err(Error::Arity(format!(
            "base point has {} coordinates, expression has arity {}",
            base_point.len(),
            expr.arity()
        )));
    }
    let tag = describe(expr);
    let mut ambient: Option<(InvariantEstimate, InvariantEstimate)> = None;
    let mut reports = Vec::new();
    for (i, slice) in slices.iter().enumerate() {
        if slice.ambient_arity() != base_point.len() {
            return Err(Error::Arity(format!("slice {i} lives in the wrong space")));
        }
        if slice.base().iter().zip(base_point).any(|(a, b)| (a - b).norm() > 1e-12) {
            return Err(Error::Input(format!("slice {i} does not pass through the base point")));
        }
        let instance = format!(
            "{tag} at {} slice {i:03} spanned by {}",
            format_point(base_point),
            describe_slice(slice)
        );
        let rb = ReportBuilder::start(config);
        let restricted = match restrict_to_slice(expr, slice, &config.schedule.eval) {
            Ok(r) => r,
            Err(Error::Degenerate(msg)) => {
                for id in [StatementId::Prop1, StatementId::Lemma2] {
                    reports.push(rb.finish(
                        id,
                        &instance,
                        Vec::new(),
                        "restriction must not be identically -inf",
                        CheckVerdict::Inconclusive,
                        format!("degenerate slice skipped: {msg}"),
                    ));
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        if ambient.is_none() {
            ambient = Some((
                lelong_any(expr, base_point, config)?,
                lct_any(expr, base_point, config)?,
            ));
        }
        let (nu_a, c_a) = ambient.clone().expect("computed above");
        let origin = vec![Complex64::zero(); slice.dim()];
        let nu_r = lelong_any(&restricted, &origin, config)?;
        let c_r = lct_any(&restricted, &origin, config)?;

        reports.push(rb.finish(
            StatementId::Prop1,
            &instance,
            vec![
                Measurement::estimate("c ambient", c_a.clone()),
                Measurement::estimate("c restricted", c_r.clone()),
            ],
            format!("c restricted <= {}", format_estimate(&c_a)),
            estimate_le(&c_r, &c_a, config.tol),
            "",
        ));
        reports.push(rb.finish(
            StatementId::Lemma2,
            &instance,
            vec![
                Measurement::estimate("nu ambient", nu_a.clone()),
                Measurement::estimate("nu restricted", nu_r.clone()),
            ],
            format!("nu restricted >= {}", format_estimate(&nu_a)),
            estimate_le(&nu_a, &nu_r, config.lelong_tol),
            "",
        ));
    }
    sort_reports(&mut reports);
    Ok(reports)
}
