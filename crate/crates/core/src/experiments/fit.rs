use serde::{Deserialize, Serialize};

use crate::error::{KcboError, Result};

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// Points discarded because their value was not positive.
    pub dropped: usize,
}

/// OLS fit of `y` on `x`; needs at least 3 points.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<RateFit> {
    assert_eq!(x.len(), y.len(), "x and y differ in length");
    let n = x.len();
    if n < 3 {
        return Err(KcboError::InsufficientData { usable: n, dropped: 0 });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(KcboError::Numerical("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    // a constant response is fit perfectly by a flat line
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        n_points: n,
        dropped: 0,
    })
}

/// Fits `log(value) = intercept + slope·t` over `t ≥ t0`. The decay rate is `-slope`.
///
/// Nonpositive values after `t0` are dropped and counted.
pub fn fit_exponential_rate(series: &[(f64, f64)], t0: f64) -> Result<RateFit> {
    let window: Vec<_> = series.iter().filter(|(t, _)| *t >= t0).collect();
    let (kept, dropped): (Vec<_>, Vec<_>) = window.into_iter().partition(|(_, v)| *v > 0.0 && v.is_finite());
    if kept.len() < 3 {
        return Err(KcboError::InsufficientData {
            usable: kept.len(),
            dropped: dropped.len(),
        });
    }
    let t: Vec<f64> = kept.iter().map(|(t, _)| *t).collect();
    let y: Vec<f64> = kept.iter().map(|(_, v)| v.ln()).collect();
    let mut fit = linear_fit(&t, &y)?;
    fit.dropped = dropped.len();
    Ok(fit)
}

/// Fits `log y = intercept + slope·log x` over pairs with both sides positive.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<RateFit> {
    assert_eq!(x.len(), y.len(), "x and y differ in length");
    let (mut lx, mut ly, mut dropped) = (Vec::new(), Vec::new(), 0);
    for (a, b) in x.iter().zip(y) {
        if *a > 0.0 && *b > 0.0 && b.is_finite() {
            lx.push(a.ln());
            ly.push(b.ln());
        } else {
            dropped += 1;
        }
    }
    if lx.len() < 3 {
        return Err(KcboError::InsufficientData {
            usable: lx.len(),
            dropped,
        });
    }
    let mut fit = linear_fit(&lx, &ly)?;
    fit.dropped = dropped;
    Ok(fit)
}

/// Whether every value stays below `factor` times the smallest value seen so far.
pub fn within_monotone_envelope(values: &[f64], factor: f64) -> bool {
    let mut running = f64::INFINITY;
    for &v in values {
        if v > factor * running {
            return false;
        }
        running = running.min(v);
    }
    true
}

/// Wilson score interval for `k` successes in `n` trials at `z` standard errors.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}
