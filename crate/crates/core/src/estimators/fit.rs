//! Ordinary least squares for the scale regressions.

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residuals.
    pub slope_se: f64,
    pub rms_residual: f64,
}

/// Fits `y ≈ a + b x`; needs at least two distinct abscissae.
pub(crate) fn ols(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_se = if n > 2 { (ss / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Some(LineFit {
        slope,
        intercept,
        slope_se,
        rms_residual: (ss / nf).sqrt(),
    })
}

/// Standard error of the OLS slope induced by independent errors `sigma` in `y`.
pub(crate) fn propagated_slope_se(xs: &[f64], sigma: &[f64]) -> f64 {
    let nf = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return f64::INFINITY;
    }
    xs.iter()
        .zip(sigma)
        .map(|(x, s)| ((x - mx) / sxx * s).powi(2))
        .sum::<f64>()
        .sqrt()
}
