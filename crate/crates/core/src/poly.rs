//! Sparse complex polynomials in several variables.

use std::collections::BTreeMap;

use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Exponent vector of a monomial.
pub type MultiIndex = Vec<u32>;

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut p = Polynomial::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn monomial(exponents: MultiIndex, coeff: Complex64) -> Self {
        let mut p = Polynomial::zero(exponents.len());
        p.add_term(exponents, coeff);
        p
    }

    pub fn variable(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Polynomial::monomial(e, Complex64::new(1.0, 0.0))
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; repeated exponents are summed.
    pub fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut p = Polynomial::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::Arity(format!(
                    "term exponent has length {} but the polynomial has {} variables",
                    e.len(),
                    nvars
                )));
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::Input("non-finite polynomial coefficient".into()));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: MultiIndex, c: Complex64) {
        if c == Complex64::zero() {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_insert(Complex64::zero());
        *entry += c;
        if *entry == Complex64::zero() {
            self.terms.remove(&e);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| c * monomial_value(e, x))
            .sum()
    }

    /// `Σ |a_β| |x|^β`, the scale against which cancellation in `eval` is judged.
    pub fn eval_abs(&self, x: &[Complex64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c.norm()
                    * e.iter()
                        .zip(x)
                        .map(|(&k, xi)| xi.norm().powi(k as i32))
                        .product::<f64>()
            })
            .sum()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Polynomial::constant(self.nvars, Complex64::new(1.0, 0.0));
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[var] -= 1;
            out.add_term(d, c * e[var] as f64);
        }
        out
    }

    /// `∂^α f`.
    pub fn partial(&self, alpha: &[u32]) -> Polynomial {
        let mut out = self.clone();
        for (var, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                out = out.derivative(var);
            }
        }
        out
    }

    /// Substitutes `z = A t + b`, where `A` has `nvars` rows and `cols` columns (row-major).
    pub fn compose_affine(&self, matrix: &[Complex64], cols: usize, offset: &[Complex64]) -> Polynomial {
        let linear: Vec<Polynomial> = (0..self.nvars)
            .map(|row| {
                let mut p = Polynomial::constant(cols, offset[row]);
                for col in 0..cols {
                    let a = matrix[row * cols + col];
                    if a != Complex64::zero() {
                        p = p.add(&Polynomial::variable(cols, col).scale(a));
                    }
                }
                p
            })
            .collect();
        let mut out = Polynomial::zero(cols);
        for (e, c) in &self.terms {
            let mut term = Polynomial::constant(cols, *c);
            for (row, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term.mul(&linear[row].pow(k));
                }
            }
            out = out.add(&term);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    /// Taylor coefficients `∂^α f(p) / α!` together with the magnitude scale
    /// `Σ_β |a_β| C(β, α) |p|^(β-α)` of each sum.
    pub fn taylor_at(&self, p: &[Complex64]) -> BTreeMap<MultiIndex, (Complex64, f64)> {
        let mut out: BTreeMap<MultiIndex, (Complex64, f64)> = BTreeMap::new();
        for (beta, a) in &self.terms {
            for alpha in sub_indices(beta) {
                let mut w = Complex64::new(1.0, 0.0);
                let mut wabs = 1.0;
                for i in 0..beta.len() {
                    let b = binomial(beta[i], alpha[i]);
                    let pw = p[i].powu(beta[i] - alpha[i]);
                    w *= pw * b;
                    wabs *= p[i].norm().powi((beta[i] - alpha[i]) as i32) * b;
                }
                let slot = out.entry(alpha).or_insert((Complex64::zero(), 0.0));
                slot.0 += a * w;
                slot.1 += a.norm() * wabs;
            }
        }
        out
    }

    /// Exact version of [`Polynomial::taylor_at`] over the Gaussian rationals.
    pub fn taylor_at_exact(&self, p: &[Complex64]) -> BTreeMap<MultiIndex, ExactComplex> {
        let px: Vec<ExactComplex> = p.iter().map(exact_complex).collect();
        let mut out: BTreeMap<MultiIndex, ExactComplex> = BTreeMap::new();
        for (beta, a) in &self.terms {
            let ax = exact_complex(a);
            for alpha in sub_indices(beta) {
                let mut w = ax.clone();
                for i in 0..beta.len() {
                    let b = BigRational::from_float(binomial(beta[i], alpha[i])).expect("finite");
                    let mut pw = ExactComplex::one();
                    for _ in 0..(beta[i] - alpha[i]) {
                        pw *= px[i].clone();
                    }
                    w = w * pw * ExactComplex::new(b, BigRational::zero());
                }
                let slot = out.entry(alpha).or_insert_with(ExactComplex::zero);
                *slot = slot.clone() + w;
            }
        }
        out
    }

    /// Exact evaluation at a point over the Gaussian rationals.
    pub fn eval_exact(&self, p: &[Complex64]) -> ExactComplex {
        let px: Vec<ExactComplex> = p.iter().map(exact_complex).collect();
        let mut acc = ExactComplex::zero();
        for (e, c) in &self.terms {
            let mut t = exact_complex(c);
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t *= px[i].clone();
                }
            }
            acc += t;
        }
        acc
    }

    /// True when every coefficient is a short binary fraction, so exact arithmetic reflects intent.
    pub fn has_short_dyadic_coefficients(&self) -> bool {
        self.terms
            .values()
            .all(|c| is_short_dyadic(c.re) && is_short_dyadic(c.im))
    }
}

pub type ExactComplex = Complex<BigRational>;

pub fn exact_complex(z: &Complex64) -> ExactComplex {
    ExactComplex::new(
        BigRational::from_float(z.re).expect("finite coordinate"),
        BigRational::from_float(z.im).expect("finite coordinate"),
    )
}

/// Values like `3`, `-5/4` or `7/1024`: a dyadic denominator of at most `2^16` and a modest size.
pub fn is_short_dyadic(x: f64) -> bool {
    let scaled = x * 65536.0;
    x.abs() < (1u64 << 36) as f64 && scaled.fract() == 0.0
}

pub fn point_is_short_dyadic(p: &[Complex64]) -> bool {
    p.iter().all(|z| is_short_dyadic(z.re) && is_short_dyadic(z.im))
}

fn monomial_value(e: &[u32], x: &[Complex64]) -> Complex64 {
    e.iter()
        .zip(x)
        .filter(|(&k, _)| k > 0)
        .map(|(&k, xi)| xi.powu(k))
        .product()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All `α ≤ β` componentwise.
fn sub_indices(beta: &[u32]) -> Vec<MultiIndex> {
    let mut out = vec![Vec::with_capacity(beta.len())];
    for &b in beta {
        let mut next = Vec::with_capacity(out.len() * (b as usize + 1));
        for prefix in &out {
            for a in 0..=b {
                let mut v = prefix.clone();
                v.push(a);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Multi-indices of total degree strictly below `bound` in `nvars` variables.
pub fn indices_below(nvars: usize, bound: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; nvars];
    fn rec(pos: usize, left: u32, current: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if pos == current.len() {
            out.push(current.clone());
            return;
        }
        for k in 0..=left {
            current[pos] = k;
            rec(pos + 1, left - k, current, out);
        }
        current[pos] = 0;
    }
    if bound > 0 {
        rec(0, bound - 1, &mut current, &mut out);
    }
    out.sort_by_key(|a| (a.iter().sum::<u32>(), std::cmp::Reverse(a.clone())));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn derivative_and_eval() {
        // f = z1^2 z2 + 3 z2
        let f = Polynomial::from_terms(2, [(vec![2, 1], c(1.0)), (vec![0, 1], c(3.0))]).unwrap();
        assert_eq!(f.eval(&[c(2.0), c(1.0)]), c(7.0));
        let d1 = f.derivative(0);
        assert_eq!(d1, Polynomial::monomial(vec![1, 1], c(2.0)));
        assert_eq!(f.partial(&[1, 1]), Polynomial::monomial(vec![1, 0], c(2.0)));
        assert_eq!(f.total_degree(), 3);
    }

    #[test]
    fn cancelling_terms_are_removed() {
        let f = Polynomial::from_terms(1, [(vec![1], c(1.0)), (vec![1], c(-1.0))]).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn taylor_shift_of_square() {
        // (z - 1)^2 = z^2 - 2z + 1, expanded at z = 1 → t^2
        let f = Polynomial::from_terms(1, [(vec![2], c(1.0)), (vec![1], c(-2.0)), (vec![0], c(1.0))])
            .unwrap();
        let t = f.taylor_at(&[c(1.0)]);
        assert_eq!(t[&vec![0]].0, c(0.0));
        assert_eq!(t[&vec![1]].0, c(0.0));
        assert_eq!(t[&vec![2]].0, c(1.0));
        let te = f.taylor_at_exact(&[c(1.0)]);
        assert!(te[&vec![1]].is_zero());
    }

    #[test]
    fn affine_composition() {
        // f(z1, z2) = z1 z2 on z = (t, t) gives t^2
        let f = Polynomial::monomial(vec![1, 1], c(1.0));
        let g = f.compose_affine(&[c(1.0), c(1.0)], 1, &[c(0.0), c(0.0)]);
        assert_eq!(g, Polynomial::monomial(vec![2], c(1.0)));
        // f(z) = z on z = t - 1
        let h = Polynomial::variable(1, 0).compose_affine(&[c(1.0)], 1, &[c(-1.0)]);
        assert_eq!(h.eval(&[c(1.0)]), c(0.0));
    }

    #[test]
    fn indices_below_orders_by_degree() {
        let idx = indices_below(2, 2);
        assert_eq!(idx, vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        assert!(indices_below(3, 0).is_empty());
        assert_eq!(indices_below(2, 3).len(), 6);
    }

    #[test]
    fn short_dyadic_detection() {
        assert!(is_short_dyadic(0.25));
        assert!(is_short_dyadic(-7.0));
        assert!(!is_short_dyadic(0.1));
        assert!(!is_short_dyadic(1.0 / 3.0));
    }
}
