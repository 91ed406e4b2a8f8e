use std::f64::consts::PI;

use super::geometry::{compute_geometry, SurfaceGeometry, SurfaceShape};
use crate::spectral::{SpectralField, SphereGrid};
use crate::{Error, Result};

/// `W = ∫_Σ H² dσ`.
pub fn willmore_energy(geom: &SurfaceGeometry) -> f64 {
    let h2: Vec<f64> = geom.mean_curvature.iter().map(|h| h * h).collect();
    geom.integrate(&h2)
}

/// `W'` projected to band `band`. The `L²(dσ)` gradient of `W` is `2W'`.
pub fn willmore_gradient(
    grid: &SphereGrid,
    geom: &SurfaceGeometry,
    band: usize,
) -> Result<SpectralField> {
    SpectralField::from_values(grid, &geom.willmore_gradient, band)
}

pub fn energy_of(grid: &SphereGrid, shape: &SurfaceShape) -> Result<f64> {
    Ok(willmore_energy(&compute_geometry(grid, shape)?))
}

/// Default step for [`second_variation_dir`]: `10⁻²(1 + ‖φ‖∞)`.
pub fn default_second_variation_step(phi: &SpectralField) -> f64 {
    1e-2 * (1.0 + phi.sup_norm())
}

/// Outcome of a finite-difference second variation.
#[derive(Clone, Copy, Debug)]
pub struct SecondVariation {
    /// Richardson-extrapolated `d²/dt² W(Σ[φ + tψ])` at `t = 0`.
    pub value: f64,
    /// Plain central difference at the base step.
    pub coarse: f64,
    pub step: f64,
    /// Roundoff estimate `16 ε_mach |W| / t²` at the finest step used.
    pub noise: f64,
}

/// `d²/dt² W(Σ[φ + tψ])` at `t = 0` by central second differences at `t₀`
/// and `t₀/2`, combined by Richardson extrapolation.
///
/// Fails when the roundoff estimate at the finest step exceeds `10⁻⁶`,
/// i.e. when `t₀` is too small for double precision.
pub fn second_variation_dir(
    grid: &SphereGrid,
    shape: &SurfaceShape,
    psi: &SpectralField,
    step: Option<f64>,
) -> Result<SecondVariation> {
    let t0 = step.unwrap_or_else(|| default_second_variation_step(&shape.phi));
    let w0 = energy_of(grid, shape)?;
    let noise = 16.0 * f64::EPSILON * w0.abs() / (0.25 * t0 * t0);
    if noise > 1e-6 {
        return Err(Error::Numerical(format!(
            "second variation step {t0:.1e} too small: cancellation noise {noise:.1e}"
        )));
    }
    let d2 = |t: f64| -> Result<f64> {
        let wp = energy_of(grid, &shape.with_phi(shape.phi.axpy(t, psi)?))?;
        let wm = energy_of(grid, &shape.with_phi(shape.phi.axpy(-t, psi)?))?;
        Ok((wp - 2.0 * w0 + wm) / (t * t))
    };
    let coarse = d2(t0)?;
    let fine = d2(0.5 * t0)?;
    Ok(SecondVariation {
        value: (4.0 * fine - coarse) / 3.0,
        coarse,
        step: t0,
        noise,
    })
}

/// Polarised bilinear form `B(ψ₁, ψ₂) = (Q(ψ₁ + ψ₂) − Q(ψ₁ − ψ₂))/4`.
pub fn second_variation_bilinear(
    grid: &SphereGrid,
    shape: &SurfaceShape,
    psi1: &SpectralField,
    psi2: &SpectralField,
    step: Option<f64>,
) -> Result<f64> {
    let plus = second_variation_dir(grid, shape, &psi1.axpy(1.0, psi2)?, step)?;
    let minus = second_variation_dir(grid, shape, &psi1.axpy(-1.0, psi2)?, step)?;
    Ok(0.25 * (plus.value - minus.value))
}

/// `m_H = √A/(64π^{3/2}) · (16π − W)` for physical area `A`.
pub fn hawking_mass(willmore: f64, physical_area: f64) -> Result<f64> {
    if !(physical_area >= 0.0) {
        return Err(Error::Domain(format!(
            "physical area must be non-negative, got {physical_area}"
        )));
    }
    Ok(physical_area.sqrt() / (64.0 * PI.powf(1.5)) * (16.0 * PI - willmore))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{ChartPoint, Euclidean, NormalChart};
    use crate::spectral::{coeff_index, n_coeffs, KernelFunctions};
    use std::sync::Arc;

    fn flat(grid: &SphereGrid, band: usize) -> SurfaceShape {
        let chart = NormalChart::new(Arc::new(Euclidean), ChartPoint::origin(), 0.1).unwrap();
        SurfaceShape::new(chart, SpectralField::zeros(grid, band))
    }

    fn y2(grid: &SphereGrid, band: usize, m: i64) -> SpectralField {
        let mut c = vec![0.0; n_coeffs(band)];
        c[coeff_index(2, m)] = 1.0;
        SpectralField::from_coeffs(grid, c).unwrap()
    }

    #[test]
    fn round_sphere_energy() {
        let g = SphereGrid::new(16).unwrap();
        let w = energy_of(&g, &flat(&g, 16)).unwrap();
        assert!((w - 16.0 * PI).abs() < 1e-10);
        let dil = flat(&g, 16).with_phi(SpectralField::constant(&g, 0.3, 16));
        assert!((energy_of(&g, &dil).unwrap() - 16.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn linearization_on_l2_is_24() {
        let g = SphereGrid::new(16).unwrap();
        let y = y2(&g, 16, 1);
        let quot = |t: f64| {
            let geo = compute_geometry(&g, &flat(&g, 16).with_phi(y.scaled(t))).unwrap();
            willmore_gradient(&g, &geo, 16).unwrap().coeffs()[coeff_index(2, 1)] / t
        };
        let r = (4.0 * quot(5e-4) - quot(1e-3)) / 3.0;
        assert!((r - 24.0).abs() < 1e-5, "{r}");
    }

    #[test]
    fn kernel_directions_are_flat() {
        let g = SphereGrid::new(12).unwrap();
        let k = KernelFunctions::new(&g, 12).unwrap();
        for z in &k.z {
            let sv = second_variation_dir(&g, &flat(&g, 12), z, None).unwrap();
            assert!(sv.value.abs() < 1e-6, "{}", sv.value);
        }
    }

    #[test]
    fn second_variation_constant_is_two() {
        let g = SphereGrid::new(12).unwrap();
        let y = y2(&g, 12, -2);
        let sv = second_variation_dir(&g, &flat(&g, 12), &y, None).unwrap();
        assert!((sv.value / 24.0 - 2.0).abs() < 1e-5, "{}", sv.value);
    }

    #[test]
    fn tiny_step_is_rejected() {
        let g = SphereGrid::new(8).unwrap();
        let y = y2(&g, 8, 0);
        let err = second_variation_dir(&g, &flat(&g, 8), &y, Some(1e-4));
        assert!(matches!(err, Err(Error::Numerical(_))));
    }

    #[test]
    fn hawking_mass_signs() {
        assert_eq!(hawking_mass(16.0 * PI, 3.0).unwrap(), 0.0);
        assert!(hawking_mass(16.0 * PI - 0.1, 1.0).unwrap() > 0.0);
        assert!(hawking_mass(16.0 * PI, -1.0).is_err());
    }
}
