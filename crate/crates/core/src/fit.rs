//! Small regression helpers for residual-exponent fits.
//!
//! The quantitative claims under test are of the form |resid(x)| <= C x^p;
//! we report least-squares slopes in log-log coordinates and fitted constants
//! C = max resid(x)/x^p over a sample.

use crate::error::{Error, Result};

/// Least-squares slope of log(y) against log(x). Zero or negative samples are
/// skipped (they only make the decay claim stronger).
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientRange(format!(
            "log-log fit needs at least 3 positive samples, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientRange("degenerate abscissae".into()));
    }
    Ok(sxy / sxx)
}

/// Slope of the upper envelope of an oscillating sequence: partition the
/// abscissae into geometric blocks, take the maximum per block, and fit those.
/// A plain least-squares fit through oscillating residuals is dominated by the
/// near-zero dips; the envelope is what the O(x^p) claims bound.
pub fn envelope_slope(xs: &[f64], ys: &[f64], blocks: usize) -> Result<f64> {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0 && hi > lo) || blocks < 3 {
        return Err(Error::InsufficientRange(
            "envelope fit needs positive spread abscissae and >= 3 blocks".into(),
        ));
    }
    let ratio = (hi / lo).powf(1.0 / blocks as f64);
    let mut bx = Vec::with_capacity(blocks);
    let mut by = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let b_lo = lo * ratio.powi(b as i32);
        let b_hi = lo * ratio.powi(b as i32 + 1);
        let mut best: Option<(f64, f64)> = None;
        for (&x, &y) in xs.iter().zip(ys) {
            let inside = x >= b_lo && (x < b_hi || (b == blocks - 1 && x <= hi));
            if inside && best.map_or(true, |(_, v)| y > v) {
                best = Some((x, y));
            }
        }
        if let Some((x, y)) = best {
            bx.push(x);
            by.push(y);
        }
    }
    log_log_slope(&bx, &by)
}

/// Fitted envelope constant: max over samples of y / x^exponent.
pub fn fitted_constant(xs: &[f64], ys: &[f64], exponent: f64) -> f64 {
    xs.iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y.is_finite())
        .map(|(&x, &y)| y.abs() / x.powf(exponent))
        .fold(0.0, f64::max)
}

/// Median of a sample (by copy; NaNs excluded).
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if v.is_empty() {
        return f64::NAN;
    }
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Mean and standard error of a sample.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let xs: Vec<f64> = (1..50).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-1.25)).collect();
        let s = log_log_slope(&xs, &ys).unwrap();
        assert!((s + 1.25).abs() < 1e-12);
        let c = fitted_constant(&xs, &ys, -1.25);
        assert!((c - 3.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_of_oscillating_powerlaw() {
        let xs: Vec<f64> = (10..400).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| 2.0 * x.powf(-1.25) * (x * 1.7).sin().abs())
            .collect();
        let plain = log_log_slope(&xs, &ys).unwrap();
        let env = envelope_slope(&xs, &ys, 7).unwrap();
        // envelope recovers the exponent; the plain fit is noisier
        assert!((env + 1.25).abs() < 0.06, "envelope slope {env} (plain {plain})");
    }

    #[test]
    fn median_and_stderr() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-15);
        assert!((se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
