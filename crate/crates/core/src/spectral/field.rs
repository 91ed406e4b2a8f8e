use super::grid::{n_coeffs, SphereGrid};
use crate::{Error, Result};

/// Real scalar field on S², band-limited, stored both as harmonic
/// coefficients and as collocation values on a [`SphereGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    band: usize,
    coeffs: Vec<f64>,
    values: Vec<f64>,
}

impl SpectralField {
    pub fn from_coeffs(grid: &SphereGrid, coeffs: Vec<f64>) -> Result<Self> {
        let values = grid.synthesize(&coeffs)?;
        let band = (coeffs.len() as f64).sqrt() as usize - 1;
        Ok(SpectralField {
            band,
            coeffs,
            values,
        })
    }

    /// Band-limited projection of arbitrary collocation values.
    pub fn from_values(grid: &SphereGrid, values: &[f64], band: usize) -> Result<Self> {
        Self::from_coeffs(grid, grid.analyze(values, band)?)
    }

    pub fn zeros(grid: &SphereGrid, band: usize) -> Self {
        SpectralField {
            band,
            coeffs: vec![0.0; n_coeffs(band)],
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &SphereGrid, c: f64, band: usize) -> Self {
        let mut coeffs = vec![0.0; n_coeffs(band)];
        coeffs[0] = c * (4.0 * std::f64::consts::PI).sqrt();
        SpectralField {
            band,
            coeffs,
            values: vec![c; grid.len()],
        }
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Round-sphere `L²` norm, from the coefficients.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    fn check(&self, other: &SpectralField) -> Result<()> {
        if self.coeffs.len() != other.coeffs.len() || self.values.len() != other.values.len() {
            return Err(Error::Shape {
                expected: self.coeffs.len(),
                got: other.coeffs.len(),
            });
        }
        Ok(())
    }

    /// `self + a · other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> Result<Self> {
        self.check(other)?;
        Ok(SpectralField {
            band: self.band,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x + a * y)
                .collect(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + a * y)
                .collect(),
        })
    }

    pub fn scaled(&self, a: f64) -> Self {
        SpectralField {
            band: self.band,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
            values: self.values.iter().map(|v| v * a).collect(),
        }
    }

    /// Same field at another band: truncated, or zero-padded.
    pub fn with_band(&self, grid: &SphereGrid, band: usize) -> Result<Self> {
        let mut c = vec![0.0; n_coeffs(band)];
        let n = c.len().min(self.coeffs.len());
        c[..n].copy_from_slice(&self.coeffs[..n]);
        Self::from_coeffs(grid, c)
    }

    /// `max |values − synthesize(analyze(values))|` relative to the sup norm.
    pub fn round_trip_error(&self, grid: &SphereGrid) -> Result<f64> {
        let c = grid.analyze(&self.values, self.band)?;
        let v = grid.synthesize(&c)?;
        let err = v
            .iter()
            .zip(&self.values)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        Ok(err / self.sup_norm().max(1e-300))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::coeff_index;

    #[test]
    fn constant_is_single_coefficient() {
        let g = SphereGrid::new(8).unwrap();
        let f = SpectralField::from_values(&g, &vec![1.0; g.len()], 8).unwrap();
        assert!((f.coeffs()[0] - (4.0 * std::f64::consts::PI).sqrt()).abs() < 1e-13);
        assert!(f.coeffs()[1..].iter().all(|c| c.abs() < 1e-13));
        assert_eq!(
            SpectralField::constant(&g, 1.0, 8).values(),
            &vec![1.0; g.len()][..]
        );
    }

    #[test]
    fn cos_theta_is_l1_m0() {
        let g = SphereGrid::new(8).unwrap();
        let z: Vec<f64> = g.unit_points.iter().map(|q| q.z).collect();
        let f = SpectralField::from_values(&g, &z, 8).unwrap();
        for (i, c) in f.coeffs().iter().enumerate() {
            if i == coeff_index(1, 0) {
                assert!((c - (4.0 * std::f64::consts::PI / 3.0).sqrt()).abs() < 1e-13);
            } else {
                assert!(c.abs() < 1e-13);
            }
        }
        assert!(f.round_trip_error(&g).unwrap() < 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        let g = SphereGrid::new(8).unwrap();
        let a = SpectralField::zeros(&g, 8);
        let b = SpectralField::zeros(&g, 6);
        assert!(matches!(a.axpy(1.0, &b), Err(Error::Shape { .. })));
        assert!(matches!(g.analyze(&[0.0; 3], 4), Err(Error::Shape { .. })));
    }
}
