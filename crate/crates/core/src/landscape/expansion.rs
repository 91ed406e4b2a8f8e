use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::fit::{fit_power_law, SlopeFit};
use crate::metric::{ricci, scalar_curvature, ChartPoint};
use crate::reduction::ReducedFunctional;
use crate::spectral::SpectralField;
use crate::surface::{compute_geometry, energy_of, willmore_energy, SurfaceShape};
use crate::{Error, Result};

/// Residuals below this are indistinguishable from discretisation noise.
pub const SPECTRAL_FLOOR: f64 = 1e-12;

/// One `ε` of [`expansion_diagnostics`]; residuals are absolute.
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionRow {
    pub eps: f64,
    /// Energy of the geodesic sphere `φ = 0`.
    pub w: f64,
    /// `|W − 16π + (8π/3) ε² Sc_P|`.
    pub res_we: f64,
    /// `|∂_ε W + (16π/3) ε Sc_P|`.
    pub res_wediff: f64,
    /// `max_q |H − 2 + (ε²/3) Ric_P(q, q)|`.
    pub res_h: f64,
    /// `max_q |dσ/dσ₀ − 1 + (ε²/6) Ric_P(q, q)|`.
    pub res_area_element: f64,
    /// `|Φ_ε − 16π + (8π/3) ε² Sc_P|`.
    pub res_reduced: f64,
    pub phi_value: f64,
    /// `(16π − W)·3/(8π ε²)`, which tends to `Sc_P`.
    pub sc_coefficient: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionSlopes {
    pub we: SlopeFit,
    pub wediff: SlopeFit,
    pub h: SlopeFit,
    pub area_element: SlopeFit,
    pub reduced: SlopeFit,
    /// Slope of `res_reduced / ε²`.
    pub reduced_scaled: SlopeFit,
    /// Slope of `|sc_coefficient − Sc_P|`.
    pub sc_coefficient: SlopeFit,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub p: [f64; 3],
    pub scalar: f64,
    pub rows: Vec<ExpansionRow>,
    pub slopes: ExpansionSlopes,
}

/// Checks that `eps` halves from entry to entry, has at least four entries
/// and starts at or below `0.2`.
pub fn validate_halving_grid(eps: &[f64]) -> Result<()> {
    if eps.len() < 4 {
        return Err(Error::Domain(format!(
            "need at least 4 scales, got {}",
            eps.len()
        )));
    }
    if !(eps[0] > 0.0 && eps[0] <= 0.2 + 1e-12) {
        return Err(Error::Domain(format!(
            "largest scale must lie in (0, 0.2], got {}",
            eps[0]
        )));
    }
    for w in eps.windows(2) {
        if (w[1] / w[0] - 0.5).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "scales must halve: {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

fn row(f: &ReducedFunctional, p: ChartPoint, eps: f64, sc: f64) -> Result<ExpansionRow> {
    let grid = f.grid;
    let band = grid.band();
    let chart = f.chart(eps, p)?;
    let zero = SpectralField::zeros(grid, band);
    let geom = compute_geometry(grid, &SurfaceShape::new(chart.clone(), zero.clone()))?;
    let w = willmore_energy(&geom);
    let ric = chart.frame.transpose() * ricci(f.provider().as_ref(), &p.0)? * chart.frame;
    let mut res_h: f64 = 0.0;
    let mut res_da: f64 = 0.0;
    for (node, q) in geom.nodes.iter().zip(&grid.unit_points) {
        let rqq = q.dot(&(ric * q));
        res_h = res_h.max((node.mean_curvature - 2.0 + eps * eps / 3.0 * rqq).abs());
        res_da = res_da.max((node.density - 1.0 + eps * eps / 6.0 * rqq).abs());
    }
    let w_at = |e: f64| -> Result<f64> {
        energy_of(grid, &SurfaceShape::new(f.chart(e, p)?, zero.clone()))
    };
    // Richardson-extrapolated central difference in ε
    let d = |h: f64| -> Result<f64> { Ok((w_at(eps + h)? - w_at(eps - h)?) / (2.0 * h)) };
    let h = 1e-2 * eps;
    let dw = (4.0 * d(0.5 * h)? - d(h)?) / 3.0;
    let phi_value = f.correction(eps, p, None)?.energy;
    let model = 16.0 * PI - 8.0 * PI / 3.0 * eps * eps * sc;
    Ok(ExpansionRow {
        eps,
        w,
        res_we: (w - model).abs(),
        res_wediff: (dw + 16.0 * PI / 3.0 * eps * sc).abs(),
        res_h,
        res_area_element: res_da,
        res_reduced: (phi_value - model).abs(),
        phi_value,
        sc_coefficient: (16.0 * PI - w) * 3.0 / (8.0 * PI * eps * eps),
    })
}

/// Residuals of the small-sphere expansions of `H`, the area element, `W`,
/// `∂_ε W` and `Φ_ε` over a halving sequence of scales.
pub fn expansion_diagnostics(
    f: &ReducedFunctional,
    p: ChartPoint,
    eps: &[f64],
) -> Result<ExpansionReport> {
    validate_halving_grid(eps)?;
    let sc = scalar_curvature(f.provider().as_ref(), &p.0)?;
    let rows: Vec<ExpansionRow> = eps
        .par_iter()
        .map(|e| row(f, p, *e, sc))
        .collect::<Result<_>>()?;
    let fit = |g: fn(&ExpansionRow) -> f64| {
        let y: Vec<f64> = rows.iter().map(g).collect();
        fit_power_law(eps, &y, SPECTRAL_FLOOR)
    };
    let scaled: Vec<f64> = rows
        .iter()
        .map(|r| r.res_reduced / (r.eps * r.eps))
        .collect();
    let coeff: Vec<f64> = rows.iter().map(|r| r.sc_coefficient - sc).collect();
    let reduced = fit(|r| r.res_reduced)?;
    let mut reduced_scaled = fit_power_law(eps, &scaled, 0.0)?;
    reduced_scaled.reliable = reduced.reliable;
    let slopes = ExpansionSlopes {
        we: fit(|r| r.res_we)?,
        wediff: fit(|r| r.res_wediff)?,
        h: fit(|r| r.res_h)?,
        area_element: fit(|r| r.res_area_element)?,
        reduced,
        reduced_scaled,
        sc_coefficient: fit_power_law(eps, &coeff, SPECTRAL_FLOOR)?,
    };
    Ok(ExpansionReport {
        p: p.to_array(),
        scalar: sc,
        rows,
        slopes,
    })
}
