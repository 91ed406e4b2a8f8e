use std::sync::Arc;

use serde::Serialize;

use crate::metric::{ChartPoint, MetricProvider, NormalChart};
use crate::spectral::{SpectralField, SphereGrid};
use crate::surface::{compute_geometry, hawking_mass, willmore_energy, SurfaceShape};
use crate::{Mat3, Result, Vec3};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HawkingSample {
    pub r: f64,
    /// Area in the background metric.
    pub area: f64,
    pub willmore: f64,
    pub hawking: f64,
}

/// Hawking mass of the coordinate sphere `|x − c| = r`. The centre itself
/// need not lie in the provider's domain, only the sphere.
pub fn coordinate_sphere_hawking(
    grid: &SphereGrid,
    provider: Arc<dyn MetricProvider>,
    center: Vec3,
    r: f64,
) -> Result<HawkingSample> {
    let chart = NormalChart::with_frame(provider, ChartPoint(center), r, Mat3::identity())?;
    let shape = SurfaceShape::radial(chart, SpectralField::zeros(grid, grid.band()));
    let geom = compute_geometry(grid, &shape)?;
    let w = willmore_energy(&geom);
    let area = geom.area * r * r;
    Ok(HawkingSample {
        r,
        area,
        willmore: w,
        hawking: hawking_mass(w, area)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Euclidean, Schwarzschild};

    #[test]
    fn schwarzschild_spheres_carry_the_mass() {
        let g = SphereGrid::new(8).unwrap();
        for r in [2.0, 3.0, 4.0] {
            let s = coordinate_sphere_hawking(
                &g,
                Arc::new(Schwarzschild { mass: 1.0 }),
                Vec3::zeros(),
                r,
            )
            .unwrap();
            assert!((s.hawking - 1.0).abs() < 1e-8, "r = {r}: {}", s.hawking);
        }
    }

    #[test]
    fn flat_spheres_are_massless() {
        let g = SphereGrid::new(8).unwrap();
        let s = coordinate_sphere_hawking(&g, Arc::new(Euclidean), Vec3::new(1.0, 0.0, 0.0), 0.5)
            .unwrap();
        assert!(s.hawking.abs() < 1e-12);
        assert!((s.area - std::f64::consts::PI).abs() < 1e-12);
    }
}
