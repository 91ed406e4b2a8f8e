//! Least-squares power laws `y ≈ C xᵖ`.

use serde::Serialize;

use crate::{Error, Result};

/// Fitted exponent of `|y|` against `x` on log-log axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// False when some `|y|` sits below the noise floor used for the fit.
    pub reliable: bool,
}

pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(fit_power_law(x, y, 0.0)?.slope)
}

pub fn fit_power_law(x: &[f64], y: &[f64], floor: f64) -> Result<SlopeFit> {
    if x.len() != y.len() {
        return Err(Error::Shape {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::Domain("a slope needs at least two samples".into()));
    }
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a.ln(), b.abs().max(f64::MIN_POSITIVE).ln()))
        .collect();
    if pts.iter().any(|(a, _)| !a.is_finite()) {
        return Err(Error::Domain("abscissae must be positive".into()));
    }
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (a, b)| (sx + a / n, sy + b / n));
    let sxx: f64 = pts.iter().map(|(a, _)| (a - mx) * (a - mx)).sum();
    let sxy: f64 = pts.iter().map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("abscissae must not all coincide".into()));
    }
    let slope = sxy / sxx;
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        reliable: y.iter().all(|v| v.abs() > floor),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let x = [0.2, 0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|e: &f64| 3.0 * e.powi(4)).collect();
        let f = fit_power_law(&x, &y, 1e-12).unwrap();
        assert!((f.slope - 4.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
        assert!(f.reliable);
    }

    #[test]
    fn floor_marks_unreliable() {
        let f = fit_power_law(&[1.0, 0.5], &[1e-13, 1e-14], 1e-12).unwrap();
        assert!(!f.reliable);
    }

    #[test]
    fn bad_input() {
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
        assert!(loglog_slope(&[1.0, 2.0], &[1.0]).is_err());
        assert!(loglog_slope(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}
