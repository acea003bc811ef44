//! Numeric estimators that never consult the exact rules: sphere suprema for
//! Lelong numbers, Monte Carlo integrability fits and bisection for the
//! singularity exponent.

mod fit;
pub mod integrability;
pub mod lct;
pub mod lelong;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::EvalOptions;

pub use integrability::{
    direction_set, integrability_verdict, write_fit_csv, AnnulusEstimate, ExponentFit, RayFit, SampleBank, Verdict,
};
pub use lct::{auto_bracket, lct_numeric, lct_numeric_detailed, LctSearch};
pub use lelong::lelong_numeric;

/// Radii, sample counts and fit thresholds shared by the estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSchedule {
    pub r0: f64,
    /// Number of dyadic scales `J`.
    pub annuli: usize,
    pub samples_per_annulus: usize,
    pub seed: u64,
    pub eps_slope: f64,
    /// Leading scales excluded from every fit.
    pub burn_in: usize,
    pub max_rel_stderr: f64,
    pub min_fit_points: usize,
    /// Substitute for `e^{-2cφ}` where `φ = -∞`.
    pub clamp_cap: f64,
    /// Largest entry of the integer ray directions; `None` picks by dimension.
    pub max_direction_entry: Option<u32>,
    /// Verdict budget of the bisection.
    pub max_verdicts: usize,
    pub eval: EvalOptions,
}

impl Default for AnnulusSchedule {
    fn default() -> Self {
        AnnulusSchedule {
            r0: 0.5,
            annuli: 12,
            samples_per_annulus: 4096,
            seed: 0x5EED_1E1E,
            eps_slope: 0.15,
            burn_in: 2,
            max_rel_stderr: 0.3,
            min_fit_points: 5,
            clamp_cap: 1e300,
            max_direction_entry: None,
            max_verdicts: 40,
            eval: EvalOptions::default(),
        }
    }
}

impl AnnulusSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0 && self.r0 <= 1.0) {
            return Err(Error::Input(format!("r0 must lie in (0, 1], got {}", self.r0)));
        }
        if self.annuli < 4 {
            return Err(Error::Input(format!("need at least 4 annuli, got {}", self.annuli)));
        }
        if self.samples_per_annulus < 64 {
            return Err(Error::Input(format!(
                "need at least 64 samples per annulus, got {}",
                self.samples_per_annulus
            )));
        }
        if !(self.eps_slope >= 0.0 && self.eps_slope.is_finite()) {
            return Err(Error::Input("eps_slope must be a finite nonnegative number".into()));
        }
        if !(self.clamp_cap > 1.0 && self.clamp_cap.is_finite()) {
            return Err(Error::Input("clamp cap must be finite and above 1".into()));
        }
        if self.min_fit_points < 2 {
            return Err(Error::Input("a fit needs at least two points".into()));
        }
        Ok(())
    }

    /// Same schedule with a different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        AnnulusSchedule {
            seed,
            eval: EvalOptions { seed, ..self.eval.clone() },
            ..self.clone()
        }
    }
}
