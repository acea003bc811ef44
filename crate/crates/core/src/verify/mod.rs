//! Executable checks of the restriction, radial, symmetrization and level-set
//! statements on concrete expressions.

pub mod levelset;
pub mod radial;
pub mod restriction;
pub mod sandwich;
pub mod theorem1;

use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::estimate::{EstimateValue, InvariantEstimate};
use crate::estimators::AnnulusSchedule;
use crate::expr::PshExpr;
use crate::rational::format_rational;

pub use levelset::{levelset_generators, verify_levelset, LevelSet};
pub use radial::verify_radial_identity;
pub use restriction::verify_restriction_monotonicity;
pub use sandwich::verify_levelset_sandwich;
pub use theorem1::verify_theorem1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StatementId {
    #[serde(rename = "thm1-1")]
    Thm1Eval,
    #[serde(rename = "thm1-2")]
    Thm1Lelong,
    #[serde(rename = "thm1-3")]
    Thm1Lct,
    #[serde(rename = "prop1")]
    Prop1,
    #[serde(rename = "lemma2")]
    Lemma2,
    #[serde(rename = "remark2")]
    Remark2,
    #[serde(rename = "lemma5-1")]
    Lemma5Eval,
    #[serde(rename = "lemma5-2")]
    Lemma5Lelong,
    #[serde(rename = "lemma6")]
    Lemma6,
    #[serde(rename = "remark-sandwich")]
    RemarkSandwich,
    #[serde(rename = "corollary1")]
    Corollary1,
}

impl StatementId {
    pub fn as_str(self) -> &'static str {
        match self {
            StatementId::Thm1Eval => "thm1-1",
            StatementId::Thm1Lelong => "thm1-2",
            StatementId::Thm1Lct => "thm1-3",
            StatementId::Prop1 => "prop1",
            StatementId::Lemma2 => "lemma2",
            StatementId::Remark2 => "remark2",
            StatementId::Lemma5Eval => "lemma5-1",
            StatementId::Lemma5Lelong => "lemma5-2",
            StatementId::Lemma6 => "lemma6",
            StatementId::RemarkSandwich => "remark-sandwich",
            StatementId::Corollary1 => "corollary1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckVerdict {
    Pass,
    Fail,
    Inconclusive,
}

impl CheckVerdict {
    /// Fail dominates inconclusive, which dominates pass.
    pub fn combine(self, other: CheckVerdict) -> CheckVerdict {
        use CheckVerdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    pub fn from_bool(ok: bool) -> CheckVerdict {
        if ok {
            CheckVerdict::Pass
        } else {
            CheckVerdict::Fail
        }
    }
}

/// A measured quantity: an invariant estimate or a plain number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<InvariantEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::estimate::ext_float::option")]
    pub value: Option<f64>,
}

impl Measurement {
    pub fn estimate(label: impl Into<String>, estimate: InvariantEstimate) -> Self {
        Measurement {
            label: label.into(),
            estimate: Some(estimate),
            value: None,
        }
    }

    pub fn value(label: impl Into<String>, value: f64) -> Self {
        Measurement {
            label: label.into(),
            estimate: None,
            value: Some(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub statement: StatementId,
    pub instance: String,
    pub measured: Vec<Measurement>,
    pub predicted: String,
    pub verdict: CheckVerdict,
    pub note: String,
    pub seed: u64,
    pub schedule: AnnulusSchedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

/// Settings shared by all harnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub schedule: AnnulusSchedule,
    /// Bisection tolerance for numeric thresholds.
    pub tol: f64,
    /// Allowed gap between a numeric Lelong number and its predicted value.
    pub lelong_tol: f64,
    /// Relative tolerance of evaluation identities.
    pub eval_rel_tol: f64,
    /// Extra random points for evaluation identities.
    pub random_points: usize,
    /// Permit symmetrization over blocks of more than one coordinate (sampled unitaries).
    pub sampled_unitary: bool,
    pub record_timings: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            schedule: AnnulusSchedule::default(),
            tol: 0.02,
            lelong_tol: 0.1,
            eval_rel_tol: 1e-9,
            random_points: 100,
            sampled_unitary: false,
            record_timings: false,
        }
    }
}

pub(crate) struct ReportBuilder<'a> {
    config: &'a HarnessConfig,
    started: Instant,
}

impl<'a> ReportBuilder<'a> {
    pub(crate) fn start(config: &'a HarnessConfig) -> Self {
        ReportBuilder {
            config,
            started: Instant::now(),
        }
    }

    pub(crate) fn finish(
        &self,
        statement: StatementId,
        instance: &str,
        measured: Vec<Measurement>,
        predicted: impl Into<String>,
        verdict: CheckVerdict,
        note: impl Into<String>,
    ) -> VerificationReport {
        VerificationReport {
            statement,
            instance: instance.to_string(),
            measured,
            predicted: predicted.into(),
            verdict,
            note: note.into(),
            seed: self.config.schedule.seed,
            schedule: self.config.schedule.clone(),
            runtime_ms: self
                .config
                .record_timings
                .then(|| self.started.elapsed().as_millis() as u64),
        }
    }
}

/// Sorts reports by statement and instance so output order is independent of evaluation order.
pub fn sort_reports(reports: &mut [VerificationReport]) {
    reports.sort_by(|a, b| (a.statement, &a.instance).cmp(&(b.statement, &b.instance)));
}

/// Overall exit status of a batch: fail dominates, then inconclusive.
pub fn overall_verdict(reports: &[VerificationReport]) -> CheckVerdict {
    reports
        .iter()
        .fold(CheckVerdict::Pass, |acc, r| acc.combine(r.verdict))
}

/// Interval overlap, the semantics of identities between uncertain quantities.
pub(crate) fn overlaps(a: (f64, f64), b: (f64, f64), slack: f64) -> bool {
    a.0 <= b.1 + slack && b.0 <= a.1 + slack
}

/// `a ≤ b`: pass when it holds for every value in the intervals, fail only when
/// it is violated for every value, inconclusive in between.
pub(crate) fn compare_le(a: (f64, f64), b: (f64, f64), slack: f64) -> CheckVerdict {
    if a.1 <= b.0 + slack {
        CheckVerdict::Pass
    } else if a.0 > b.1 + slack {
        CheckVerdict::Fail
    } else {
        CheckVerdict::Inconclusive
    }
}

pub(crate) fn format_point(p: &[Complex64]) -> String {
    let parts: Vec<String> = p
        .iter()
        .map(|z| {
            if z.im == 0.0 {
                format!("{}", z.re)
            } else {
                format!("{}{:+}i", z.re, z.im)
            }
        })
        .collect();
    format!("({})", parts.join(", "))
}

pub(crate) fn format_estimate(e: &InvariantEstimate) -> String {
    match &e.value {
        EstimateValue::Exact { value } => value.to_string(),
        EstimateValue::Interval { lo, hi } => format!("[{lo}, {hi}]"),
        EstimateValue::Numeric { value, lo, hi } => format!("{value:.4} in [{lo:.4}, {hi:.4}]"),
        EstimateValue::Unknown => "unknown".into(),
    }
}

/// Compact one-line rendering of an expression for instance keys.
pub fn describe(e: &PshExpr) -> String {
    let mut s = String::new();
    write_expr(e, &mut s);
    s
}

fn write_expr(e: &PshExpr, s: &mut String) {
    match e {
        PshExpr::MonomialLog { coeff, exponents } => {
            let exps: Vec<String> = exponents.iter().map(format_rational).collect();
            let _ = write!(s, "mono({}; {})", format_rational(coeff), exps.join(","));
        }
        PshExpr::LogAbsPoly(p) => {
            let terms: Vec<String> = p
                .terms()
                .map(|(a, c)| {
                    let a: Vec<String> = a.iter().map(u32::to_string).collect();
                    format!("{}{:+}i*z^({})", c.re, c.im, a.join(","))
                })
                .collect();
            let _ = write!(s, "logabs({})", terms.join(" + "));
        }
        PshExpr::Radial(r) => {
            let _ = write!(
                s,
                "radial(n={}, nu={}, {} breakpoints)",
                r.arity,
                format_rational(&r.limiting_slope),
                r.breakpoints.len()
            );
        }
        PshExpr::Max(children) | PshExpr::Sum(children) => {
            s.push_str(if matches!(e, PshExpr::Max(_)) { "max(" } else { "sum(" });
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write_expr(c, s);
            }
            s.push(')');
        }
        PshExpr::Scale { factor, child } => {
            let _ = write!(s, "{}*", format_rational(factor));
            write_expr(child, s);
        }
        PshExpr::LinearPullback { map, child } => {
            let kind = if map.is_difference_map() { "diff" } else { "affine" };
            let _ = write!(s, "pull[{kind} {}x{}](", map.rows, map.cols);
            write_expr(child, s);
            s.push(')');
        }
        PshExpr::UnitarySup { base, block, child } => {
            let _ = write!(s, "usup[{base}+{block}](");
            write_expr(child, s);
            s.push(')');
        }
    }
}
