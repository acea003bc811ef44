//! Point evaluation of expression trees.
//!
//! `UnitarySup` over a single coordinate is a maximization over the circle and
//! is computed to near machine precision (grid, then golden-section refinement).
//! Larger blocks use a fixed sample of Haar unitaries plus diagonal phase
//! rotations drawn once per node, which yields a lower bound of the supremum.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::PshExpr;
use crate::rational::to_f64;
use crate::rng::substream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub seed: u64,
    /// Haar samples per sampled `UnitarySup` node (and as many diagonal phase rotations).
    pub unitary_samples: usize,
    /// Use the circle maximizer when the unitary block has one coordinate.
    pub exact_circle: bool,
    /// Grid points for the circle maximizer before refinement.
    pub circle_grid: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            seed: 0x5EED_1E1E,
            unitary_samples: 64,
            exact_circle: true,
            circle_grid: 64,
        }
    }
}

/// Dense `m × m` unitary, row-major.
#[derive(Debug, Clone)]
struct Unitary {
    m: usize,
    data: Vec<Complex64>,
}

impl Unitary {
    fn apply(&self, w: &[Complex64], out: &mut [Complex64]) {
        for r in 0..self.m {
            let mut acc = Complex64::zero();
            for c in 0..self.m {
                acc += self.data[r * self.m + c] * w[c];
            }
            out[r] = acc;
        }
    }
}

/// Haar-distributed unitary: Gram-Schmidt on a complex Ginibre matrix.
fn haar_unitary<R: Rng>(m: usize, rng: &mut R) -> Unitary {
    let mut cols: Vec<Vec<Complex64>> = (0..m)
        .map(|_| {
            (0..m)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    for j in 0..m {
        for i in 0..j {
            let (left, right) = cols.split_at_mut(j);
            let qi = &left[i];
            let proj: Complex64 = qi.iter().zip(right[0].iter()).map(|(a, b)| a.conj() * b).sum();
            for (v, q) in right[0].iter_mut().zip(qi) {
                *v -= proj * q;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for v in cols[j].iter_mut() {
            *v /= norm;
        }
    }
    let mut data = vec![Complex64::zero(); m * m];
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            data[r * m + c] = *v;
        }
    }
    Unitary { m, data }
}

fn diagonal_phases<R: Rng>(m: usize, rng: &mut R) -> Unitary {
    let mut data = vec![Complex64::zero(); m * m];
    for i in 0..m {
        let theta: f64 = rng.random::<f64>() * 2.0 * PI;
        data[i * m + i] = Complex64::from_polar(1.0, theta);
    }
    Unitary { m, data }
}

/// Evaluates one expression at many points, reusing per-node unitary samples.
pub struct Evaluator<'a> {
    expr: &'a PshExpr,
    opts: EvalOptions,
    arity: usize,
    sampled: HashMap<*const PshExpr, Vec<Unitary>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(expr: &'a PshExpr, opts: &EvalOptions) -> Self {
        let mut sampled = HashMap::new();
        let mut counter = 0u64;
        collect_samples(expr, opts, &mut counter, &mut sampled);
        Evaluator {
            expr,
            opts: opts.clone(),
            arity: expr.arity(),
            sampled,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, point: &[Complex64]) -> Result<f64> {
        if point.len() != self.arity {
            return Err(Error::Arity(format!(
                "point has {} coordinates, expression has arity {}",
                point.len(),
                self.arity
            )));
        }
        if point.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Input("point coordinates must be finite".into()));
        }
        Ok(self.eval_unchecked(point))
    }

    /// Caller guarantees arity and finiteness.
    pub fn eval_unchecked(&self, point: &[Complex64]) -> f64 {
        self.node(self.expr, point)
    }

    fn node(&self, e: &PshExpr, x: &[Complex64]) -> f64 {
        match e {
            PshExpr::MonomialLog { coeff, exponents } => {
                let mut acc = 0.0;
                for (k, z) in exponents.iter().zip(x) {
                    let k = to_f64(k);
                    if k != 0.0 {
                        acc += k * z.norm().ln();
                    }
                }
                to_f64(coeff) * acc
            }
            PshExpr::LogAbsPoly(p) => p.eval(x).norm().ln(),
            PshExpr::Radial(r) => {
                let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                r.eval_at_log_norm(norm.ln())
            }
            PshExpr::Max(children) => children
                .iter()
                .map(|c| self.node(c, x))
                .fold(f64::NEG_INFINITY, f64::max),
            PshExpr::Sum(children) => {
                let mut acc = 0.0;
                for c in children {
                    let v = self.node(c, x);
                    if v == f64::NEG_INFINITY {
                        return v;
                    }
                    acc += v;
                }
                acc
            }
            PshExpr::Scale { factor, child } => {
                let v = self.node(child, x);
                if v == f64::NEG_INFINITY {
                    v
                } else {
                    to_f64(factor) * v
                }
            }
            PshExpr::LinearPullback { map, child } => {
                let y = map.apply(x);
                self.node(child, &y)
            }
            PshExpr::UnitarySup { base, block, child } => {
                let (z, w) = x.split_at(*base);
                if w.iter().all(|wi| *wi == Complex64::zero()) {
                    return self.node(child, x);
                }
                if *block == 1 && self.opts.exact_circle {
                    self.circle_sup(child, z, w[0], self.opts.circle_grid)
                } else {
                    self.sampled_sup(e, child, z, w)
                }
            }
        }
    }

    fn rotated(&self, child: &PshExpr, buf: &mut [Complex64], w: Complex64, theta: f64) -> f64 {
        let last = buf.len() - 1;
        buf[last] = Complex64::from_polar(1.0, theta) * w;
        self.node(child, buf)
    }

    /// Maximum of `child(z, e^{iθ} w)` over the grid `θ_k = 2πk/G`.
    pub fn circle_grid_max(&self, child: &PshExpr, z: &[Complex64], w: Complex64, grid: usize) -> (f64, f64) {
        let mut buf: Vec<Complex64> = z.to_vec();
        buf.push(w);
        let mut best = (f64::NEG_INFINITY, 0.0);
        for k in 0..grid {
            let theta = 2.0 * PI * k as f64 / grid as f64;
            let v = self.rotated(child, &mut buf, w, theta);
            if v > best.0 {
                best = (v, theta);
            }
        }
        best
    }

    fn circle_sup(&self, child: &PshExpr, z: &[Complex64], w: Complex64, grid: usize) -> f64 {
        let grid = grid.max(8);
        let (grid_best, theta0) = self.circle_grid_max(child, z, w, grid);
        let mut buf: Vec<Complex64> = z.to_vec();
        buf.push(w);
        let h = 2.0 * PI / grid as f64;
        let (mut a, mut b) = (theta0 - h, theta0 + h);
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let mut fc = self.rotated(child, &mut buf, w, c);
        let mut fd = self.rotated(child, &mut buf, w, d);
        while b - a > 1e-9 {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = self.rotated(child, &mut buf, w, c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = self.rotated(child, &mut buf, w, d);
            }
        }
        grid_best.max(fc).max(fd)
    }

    fn sampled_sup(&self, node: &PshExpr, child: &PshExpr, z: &[Complex64], w: &[Complex64]) -> f64 {
        let mut buf: Vec<Complex64> = z.iter().chain(w).copied().collect();
        let mut best = self.node(child, &buf);
        let n = z.len();
        if let Some(samples) = self.sampled.get(&(node as *const PshExpr)) {
            let mut rotated = vec![Complex64::zero(); w.len()];
            for u in samples {
                u.apply(w, &mut rotated);
                buf[n..].copy_from_slice(&rotated);
                best = best.max(self.node(child, &buf));
            }
        }
        best
    }
}

fn collect_samples(
    e: &PshExpr,
    opts: &EvalOptions,
    counter: &mut u64,
    out: &mut HashMap<*const PshExpr, Vec<Unitary>>,
) {
    let index = *counter;
    *counter += 1;
    if let PshExpr::UnitarySup { block, .. } = e {
        if *block > 1 || !opts.exact_circle {
            let mut rng = substream(opts.seed, &[0xA11CE, index]);
            let mut samples = Vec::with_capacity(2 * opts.unitary_samples);
            for _ in 0..opts.unitary_samples {
                samples.push(haar_unitary(*block, &mut rng));
                samples.push(diagonal_phases(*block, &mut rng));
            }
            out.insert(e as *const PshExpr, samples);
        }
    }
    for child in e.children() {
        collect_samples(child, opts, counter, out);
    }
}

/// Evaluates `expr` at `point`.
pub fn eval(expr: &PshExpr, point: &[Complex64], opts: &EvalOptions) -> Result<f64> {
    Evaluator::new(expr, opts).eval(point)
}

/// Real-valued coordinates as complex numbers.
pub fn real_point(xs: &[f64]) -> Vec<Complex64> {
    xs.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}
