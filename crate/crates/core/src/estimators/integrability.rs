//! Local integrability of `e^{-2cφ}` from the decay of dyadic cell integrals.
//!
//! In one variable the cells are the dyadic annuli `r0·2^{-j-1} < |z-x| ≤ r0·2^{-j}`.
//! In several variables a spherical shell cannot see a singular locus of
//! positive dimension (it contributes a fixed fraction of every shell), so the
//! integral is instead followed along rays `j = t·d` of the multi-index grid:
//! the cell for `j` is the product of the dyadic annuli of index `j_i` in each
//! coordinate. For each ray the estimates `Î_t` are regressed as
//! `log2 Î_t ≈ a − α t`; the integral over the neighbourhood is finite when every
//! ray decays (`α > 0`) and infinite when some ray does not.

use std::f64::consts::{LN_2, PI};
use std::io::Write;

use num_complex::Complex64;
use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fit::{ols, propagated_slope_se};
use super::AnnulusSchedule;
use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::expr::PshExpr;
use crate::rng::substream;

/// Groups in the median-of-means estimate.
pub const GROUPS: usize = 16;
/// Asymptotic ratio of the standard deviations of the median and the mean.
const MEDIAN_EFFICIENCY: f64 = 1.2533;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Integrable,
    Divergent,
    Inconclusive,
}

/// One cell of a ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusEstimate {
    pub j: usize,
    /// Outer radius of the smallest coordinate annulus of the cell.
    pub radius: f64,
    #[serde(with = "crate::estimate::ext_float")]
    pub log2_i_hat: f64,
    #[serde(with = "crate::estimate::ext_float")]
    pub rel_stderr: f64,
    pub used_in_fit: bool,
}

impl AnnulusEstimate {
    pub fn i_hat(&self) -> f64 {
        self.log2_i_hat.exp2()
    }

    pub fn stderr(&self) -> f64 {
        self.i_hat() * self.rel_stderr
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayFit {
    pub direction: Vec<u32>,
    pub annuli: Vec<AnnulusEstimate>,
    /// Decay exponent `α`; absent when too few cells survive.
    pub slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub window: Vec<usize>,
    pub verdict: Verdict,
}

/// Fit at a single exponent `c`; the top-level fields describe the binding ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub c: f64,
    pub direction: Vec<u32>,
    pub annuli: Vec<AnnulusEstimate>,
    pub slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub window: Vec<usize>,
    pub verdict: Verdict,
    pub eps_slope: f64,
    pub rays: Vec<RayFit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

/// Primitive nonnegative integer directions with entries at most `max_entry`.
///
/// The default bound shrinks with the dimension (3 up to two variables, 2 for
/// three, 1 for four and five); beyond that only the axes and the diagonal are used.
pub fn direction_set(n: usize, max_entry: Option<u32>) -> Vec<Vec<u32>> {
    let bound = max_entry.unwrap_or(match n {
        0..=2 => 3,
        3 => 2,
        4 | 5 => 1,
        _ => 0,
    });
    let mut out = Vec::new();
    if bound == 0 {
        for i in 0..n {
            let mut d = vec![0; n];
            d[i] = 1;
            out.push(d);
        }
        if n > 1 {
            out.push(vec![1; n]);
        }
        return out;
    }
    let mut d = vec![0u32; n];
    loop {
        let mut i = 0;
        while i < n && d[i] == bound {
            d[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        d[i] += 1;
        if d.iter().fold(0u32, |g, &x| g.gcd(&x)) == 1 {
            out.push(d.clone());
        }
    }
    out.sort_by(|a, b| {
        let (sa, sb): (u32, u32) = (a.iter().sum(), b.iter().sum());
        sa.cmp(&sb).then_with(|| b.cmp(a))
    });
    out
}

#[derive(Debug, Clone)]
struct Cell {
    t: usize,
    radius: f64,
    log_vol: f64,
    /// `φ` at the samples, group-major.
    values: Vec<f64>,
}

#[derive(Debug, Clone)]
struct RayBank {
    direction: Vec<u32>,
    cells: Vec<Cell>,
}

/// Values of `φ` at the stratified samples of every cell, drawn once and
/// reused for every exponent `c`.
#[derive(Debug, Clone)]
pub struct SampleBank {
    rays: Vec<RayBank>,
    group_size: usize,
}

impl SampleBank {
    pub fn build(expr: &PshExpr, center: &[Complex64], schedule: &AnnulusSchedule) -> Result<SampleBank> {
        schedule.validate()?;
        let n = expr.arity();
        if center.len() != n {
            return Err(Error::Arity(format!(
                "center has {} coordinates, expression has arity {n}",
                center.len()
            )));
        }
        if center.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Input("center coordinates must be finite".into()));
        }
        let evaluator = Evaluator::new(expr, &schedule.eval);
        let group_size = schedule.samples_per_annulus / GROUPS;
        let mut rays = Vec::new();
        let mut any_finite = false;
        let mut point = vec![Complex64::new(0.0, 0.0); n];
        let mut perms = vec![Vec::with_capacity(group_size); n];
        for (ri, d) in direction_set(n, schedule.max_direction_entry).into_iter().enumerate() {
            let mut cells = Vec::with_capacity(schedule.annuli);
            for t in 0..schedule.annuli {
                let outer: Vec<f64> = d
                    .iter()
                    .map(|&di| schedule.r0 * 0.5f64.powi((t as u32 * di) as i32))
                    .collect();
                let log_vol: f64 = outer.iter().map(|r| (0.75 * PI * r * r).ln()).sum();
                let radius = outer.iter().copied().fold(f64::INFINITY, f64::min);
                let mut values = Vec::with_capacity(group_size * GROUPS);
                for g in 0..GROUPS {
                    let mut rng = substream(schedule.seed, &[0xA22, ri as u64, t as u64, g as u64]);
                    for p in perms.iter_mut() {
                        p.clear();
                        p.extend(0..group_size);
                        p.shuffle(&mut rng);
                    }
                    for s in 0..group_size {
                        for i in 0..n {
                            let (ro, ri2) = (outer[i] * outer[i], 0.25 * outer[i] * outer[i]);
                            let u = (perms[i][s] as f64 + rng.random::<f64>()) / group_size as f64;
                            let rho = (ri2 + u * (ro - ri2)).sqrt();
                            let theta = rng.random::<f64>() * 2.0 * PI;
                            point[i] = center[i] + Complex64::from_polar(rho, theta);
                        }
                        let v = evaluator.eval_unchecked(&point);
                        any_finite |= v.is_finite();
                        values.push(v);
                    }
                }
                cells.push(Cell {
                    t,
                    radius,
                    log_vol,
                    values,
                });
            }
            rays.push(RayBank { direction: d, cells });
        }
        if !any_finite {
            return Err(Error::Degenerate("every sample in every annulus is -inf".into()));
        }
        Ok(SampleBank { rays, group_size })
    }

    /// Cell integrals of `e^{-2cφ}` and the verdict at exponent `c`.
    pub fn verdict(&self, c: f64, schedule: &AnnulusSchedule) -> Result<ExponentFit> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Input(format!("exponent c must be positive, got {c}")));
        }
        let log_cap = schedule.clamp_cap.ln();
        let mut clamped = 0usize;
        let mut ray_fits = Vec::with_capacity(self.rays.len());
        for ray in &self.rays {
            let annuli: Vec<AnnulusEstimate> = ray
                .cells
                .iter()
                .map(|cell| {
                    let (est, k) = self.cell_estimate(cell, c, log_cap, schedule);
                    clamped += k;
                    est
                })
                .collect();
            ray_fits.push(fit_ray(ray.direction.clone(), annuli, schedule));
        }
        let mut flags = Vec::new();
        if clamped > 0 {
            flags.push(format!(
                "heavy-tail: {clamped} samples hit the -inf locus and were clamped at {:e}",
                schedule.clamp_cap
            ));
        }
        let by_slope = |v: Verdict| {
            ray_fits
                .iter()
                .enumerate()
                .filter(|(_, r)| r.verdict == v)
                .min_by(|a, b| {
                    let sa = a.1.slope.unwrap_or(f64::INFINITY);
                    let sb = b.1.slope.unwrap_or(f64::INFINITY);
                    sa.total_cmp(&sb)
                })
                .map(|(i, _)| i)
        };
        let (verdict, binding) = if let Some(i) = by_slope(Verdict::Divergent) {
            (Verdict::Divergent, i)
        } else if let Some(i) = by_slope(Verdict::Inconclusive) {
            (Verdict::Inconclusive, i)
        } else {
            (Verdict::Integrable, by_slope(Verdict::Integrable).expect("at least one ray"))
        };
        let b = &ray_fits[binding];
        Ok(ExponentFit {
            c,
            direction: b.direction.clone(),
            annuli: b.annuli.clone(),
            slope: b.slope,
            slope_stderr: b.slope_stderr,
            window: b.window.clone(),
            verdict,
            eps_slope: schedule.eps_slope,
            rays: ray_fits,
            flags,
        })
    }

    fn cell_estimate(&self, cell: &Cell, c: f64, log_cap: f64, schedule: &AnnulusSchedule) -> (AnnulusEstimate, usize) {
        let mut clamped = 0;
        let xs: Vec<f64> = cell
            .values
            .iter()
            .map(|&v| {
                if v == f64::NEG_INFINITY || v.is_nan() {
                    clamped += 1;
                    log_cap
                } else {
                    -2.0 * c * v
                }
            })
            .collect();
        // Work relative to the largest exponent so nothing overflows.
        let shift = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut means: Vec<f64> = xs
            .chunks(self.group_size)
            .map(|g| g.iter().map(|x| (x - shift).exp()).sum::<f64>() / g.len() as f64)
            .collect();
        let mean_of_means = means.iter().sum::<f64>() / means.len() as f64;
        let var = means.iter().map(|m| (m - mean_of_means).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
        means.sort_by(f64::total_cmp);
        let mid = means.len() / 2;
        let median = if means.len().is_multiple_of(2) {
            0.5 * (means[mid - 1] + means[mid])
        } else {
            means[mid]
        };
        let stderr = MEDIAN_EFFICIENCY * var.sqrt() / (means.len() as f64).sqrt();
        let log_i = cell.log_vol + shift + median.ln();
        let rel = if median > 0.0 { stderr / median } else { f64::INFINITY };
        let used = cell.t >= schedule.burn_in && log_i.is_finite() && rel <= schedule.max_rel_stderr;
        (
            AnnulusEstimate {
                j: cell.t,
                radius: cell.radius,
                log2_i_hat: log_i / LN_2,
                rel_stderr: rel,
                used_in_fit: used,
            },
            clamped,
        )
    }
}

fn fit_ray(direction: Vec<u32>, annuli: Vec<AnnulusEstimate>, schedule: &AnnulusSchedule) -> RayFit {
    let window: Vec<usize> = annuli.iter().filter(|a| a.used_in_fit).map(|a| a.j).collect();
    let inconclusive = |annuli, window| RayFit {
        direction: direction.clone(),
        annuli,
        slope: None,
        slope_stderr: None,
        window,
        verdict: Verdict::Inconclusive,
    };
    if window.len() < schedule.min_fit_points {
        return inconclusive(annuli, window);
    }
    let used: Vec<&AnnulusEstimate> = annuli.iter().filter(|a| a.used_in_fit).collect();
    let xs: Vec<f64> = used.iter().map(|a| a.j as f64).collect();
    let ys: Vec<f64> = used.iter().map(|a| a.log2_i_hat).collect();
    let sigma: Vec<f64> = used.iter().map(|a| a.rel_stderr / LN_2).collect();
    let Some(line) = ols(&xs, &ys) else {
        return inconclusive(annuli, window);
    };
    let alpha = -line.slope;
    let se = line.slope_se.max(propagated_slope_se(&xs, &sigma));
    let verdict = if alpha - 2.0 * se > schedule.eps_slope {
        Verdict::Integrable
    } else if alpha + 2.0 * se < -schedule.eps_slope {
        Verdict::Divergent
    } else {
        Verdict::Inconclusive
    };
    RayFit {
        direction,
        annuli,
        slope: Some(alpha),
        slope_stderr: Some(se),
        window,
        verdict,
    }
}

/// Samples every cell and decides integrability of `e^{-2cφ}` near `center`.
pub fn integrability_verdict(
    expr: &PshExpr,
    c: f64,
    center: &[Complex64],
    schedule: &AnnulusSchedule,
) -> Result<ExponentFit> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Input(format!("exponent c must be positive, got {c}")));
    }
    SampleBank::build(expr, center, schedule)?.verdict(c, schedule)
}

#[derive(Serialize)]
struct CsvRow {
    j: usize,
    radius: f64,
    #[serde(rename = "I_hat")]
    i_hat: f64,
    stderr: f64,
    used_in_fit: bool,
}

/// Writes the binding ray of `fit` as CSV.
pub fn write_fit_csv<W: Write>(fit: &ExponentFit, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for a in &fit.annuli {
        w.serialize(CsvRow {
            j: a.j,
            radius: a.radius,
            i_hat: a.i_hat(),
            stderr: a.stderr(),
            used_in_fit: a.used_in_fit,
        })
        .map_err(|e| Error::Input(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::Input(format!("csv: {e}")))?;
    Ok(())
}
