//! Bisection for the integrability threshold with an honest inconclusive band.

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use super::integrability::{ExponentFit, SampleBank, Verdict};
use super::AnnulusSchedule;
use crate::error::{Error, Result};
use crate::estimate::{InvariantEstimate, Kind};
use crate::expr::PshExpr;
use crate::geometry::lelong_exact;

const LOWER_HALVINGS: usize = 6;
const UPPER_DOUBLINGS: usize = 8;

/// Outcome of a threshold search.
#[derive(Debug, Clone, Serialize)]
pub struct LctSearch {
    pub estimate: InvariantEstimate,
    /// Every exponent tried, in order, with its verdict.
    pub steps: Vec<(f64, Verdict)>,
    pub bracket: (f64, f64),
    /// Fit at the reported value, for diagnostics.
    pub boundary_fit: Option<ExponentFit>,
}

/// Starting bracket: around the Skoda window when the Lelong number is known
/// exactly, `[0.01, 2N]` otherwise.
pub fn auto_bracket(expr: &PshExpr, center: &[Complex64]) -> (f64, f64) {
    let n = expr.arity() as f64;
    let nu = lelong_exact(expr, center)
        .ok()
        .and_then(|e| e.exact_value().and_then(|v| v.finite().cloned()))
        .filter(|v| v.is_positive())
        .and_then(|v| v.to_f64());
    match nu {
        Some(nu) => (0.5 / nu, 1.5 * n / nu + 0.1),
        None => (0.01, 2.0 * n),
    }
}

struct Search<'a> {
    bank: &'a SampleBank,
    schedule: &'a AnnulusSchedule,
    steps: Vec<(f64, Verdict)>,
}

impl Search<'_> {
    fn verdict(&mut self, c: f64) -> Result<Verdict> {
        let v = self.bank.verdict(c, self.schedule)?.verdict;
        self.steps.push((c, v));
        Ok(v)
    }

    fn exhausted(&self) -> bool {
        self.steps.len() >= self.schedule.max_verdicts
    }
}

/// Threshold estimate: `[last integrable c, first divergent c]` and its midpoint.
pub fn lct_numeric(
    expr: &PshExpr,
    center: &[Complex64],
    bracket: Option<(f64, f64)>,
    tol: f64,
    schedule: &AnnulusSchedule,
) -> Result<InvariantEstimate> {
    Ok(lct_numeric_detailed(expr, center, bracket, tol, schedule)?.estimate)
}

pub fn lct_numeric_detailed(
    expr: &PshExpr,
    center: &[Complex64],
    bracket: Option<(f64, f64)>,
    tol: f64,
    schedule: &AnnulusSchedule,
) -> Result<LctSearch> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Input(format!("tolerance must be positive, got {tol}")));
    }
    if let Some((lo, hi)) = bracket {
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::Bracket(format!("invalid bracket [{lo}, {hi}]")));
        }
    }
    let bank = SampleBank::build(expr, center, schedule)?;
    let mut s = Search {
        bank: &bank,
        schedule,
        steps: Vec::new(),
    };
    let mut flags = Vec::new();

    let (mut lo, mut hi) = match bracket {
        Some((lo, hi)) => {
            let vl = s.verdict(lo)?;
            let vh = s.verdict(hi)?;
            if vl != Verdict::Integrable || vh != Verdict::Divergent {
                return Err(Error::Bracket(format!(
                    "bracket [{lo}, {hi}] does not straddle the threshold (verdicts {vl:?}, {vh:?})"
                )));
            }
            (lo, hi)
        }
        None => {
            let (mut lo, mut hi) = auto_bracket(expr, center);
            let mut found = false;
            for _ in 0..LOWER_HALVINGS {
                if s.verdict(lo)? == Verdict::Integrable {
                    found = true;
                    break;
                }
                lo *= 0.5;
            }
            if !found {
                return Err(Error::Bracket(format!(
                    "no integrable exponent found down to c = {}",
                    lo * 2.0
                )));
            }
            let mut found = false;
            for _ in 0..UPPER_DOUBLINGS {
                match s.verdict(hi)? {
                    Verdict::Divergent => {
                        found = true;
                        break;
                    }
                    Verdict::Integrable => lo = lo.max(hi),
                    Verdict::Inconclusive => {}
                }
                hi *= 2.0;
            }
            if !found {
                let estimate = InvariantEstimate::numeric(
                    Kind::Lct,
                    f64::INFINITY,
                    lo,
                    f64::INFINITY,
                    format!("no divergent exponent found up to c = {}", hi * 0.5),
                )
                .with_flag("unbounded-above");
                return Ok(LctSearch {
                    estimate,
                    bracket: (lo, f64::INFINITY),
                    steps: s.steps,
                    boundary_fit: None,
                });
            }
            (lo, hi)
        }
    };
    let initial = (lo, hi);

    // [band_lo, band_hi] spans the exponents seen inconclusive.
    let mut band: Option<(f64, f64)> = None;
    loop {
        let (gap, m) = match band {
            None => (hi - lo, 0.5 * (lo + hi)),
            Some((a, b)) => {
                let (gl, gh) = (a - lo, hi - b);
                if gl.max(gh) <= 0.5 * tol {
                    break;
                }
                if gl >= gh {
                    (gl, 0.5 * (lo + a))
                } else {
                    (gh, 0.5 * (b + hi))
                }
            }
        };
        if band.is_none() && gap <= tol {
            break;
        }
        if s.exhausted() {
            flags.push("budget-exhausted".to_string());
            break;
        }
        let v = s.verdict(m)?;
        match (v, band) {
            (Verdict::Integrable, Some((_, b))) if m > b => {
                flags.push(format!("non-monotone verdict at c = {m}"));
                band = band.map(|(a, _)| (a, m));
            }
            (Verdict::Divergent, Some((a, _))) if m < a => {
                flags.push(format!("non-monotone verdict at c = {m}"));
                band = band.map(|(_, b)| (m, b));
            }
            (Verdict::Integrable, _) => lo = m,
            (Verdict::Divergent, _) => hi = m,
            (Verdict::Inconclusive, None) => band = Some((m, m)),
            (Verdict::Inconclusive, Some((a, b))) => band = Some((a.min(m), b.max(m))),
        }
    }
    flags.dedup();
    let value = 0.5 * (lo + hi);
    let boundary_fit = Some(bank.verdict(value, schedule)?);
    let mut estimate = InvariantEstimate::numeric(
        Kind::Lct,
        value,
        lo,
        hi,
        format!(
            "bisection over {} verdicts; inconclusive band {}",
            s.steps.len(),
            match band {
                Some((a, b)) => format!("[{a:.4}, {b:.4}]"),
                None => "empty".to_string(),
            }
        ),
    );
    estimate.flags = flags;
    Ok(LctSearch {
        estimate,
        steps: s.steps,
        bracket: initial,
        boundary_fit,
    })
}
