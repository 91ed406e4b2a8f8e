use nalgebra::Matrix4;

use crate::spectral::{SpectralField, SphereGrid};
use crate::surface::SurfaceGeometry;
use crate::{Error, Result};

/// Orthonormal basis of `span{H, Z₁, Z₂, Z₃}` in `⟨u, v⟩ = ∫_Σ u v dσ`.
///
/// `y[0]` comes from `H`, `y[i]` from `Z_i`. The Z's are orthonormalised
/// first, then `H` against them.
#[derive(Clone, Debug)]
pub struct KernelBasis {
    /// Nodal values of `Y₀..Y₃`.
    pub y: [Vec<f64>; 4],
    /// `Y_j = Σ_k T_{jk} B_k` with `B = (H, Z₁, Z₂, Z₃)`.
    pub transform: Matrix4<f64>,
}

impl KernelBasis {
    /// `(⟨f, Y_j⟩)_j`.
    pub fn coefficients(&self, geom: &SurfaceGeometry, f: &[f64]) -> [f64; 4] {
        std::array::from_fn(|j| geom.inner(f, &self.y[j]))
    }

    /// Coordinates in `(H, Z₁, Z₂, Z₃)` of `Σ c_j Y_j`.
    pub fn to_natural(&self, c: [f64; 4]) -> [f64; 4] {
        let v = self.transform.transpose() * nalgebra::Vector4::from(c);
        [v[0], v[1], v[2], v[3]]
    }

    pub fn gram(&self, geom: &SurfaceGeometry) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| geom.inner(&self.y[i], &self.y[j]))
    }

    pub fn field(&self, grid: &SphereGrid, j: usize, band: usize) -> Result<SpectralField> {
        SpectralField::from_values(grid, &self.y[j], band)
    }
}

/// Gram-Schmidt (with one reorthogonalisation pass) on `Z₁, Z₂, Z₃, H`.
pub fn kernel_basis(grid: &SphereGrid, geom: &SurfaceGeometry) -> Result<KernelBasis> {
    let raw: [Vec<f64>; 4] = [
        geom.mean_curvature.clone(),
        grid.unit_points.iter().map(|q| q.x).collect(),
        grid.unit_points.iter().map(|q| q.y).collect(),
        grid.unit_points.iter().map(|q| q.z).collect(),
    ];
    let mut y: [Vec<f64>; 4] = Default::default();
    let mut t = Matrix4::zeros();
    let mut done: Vec<usize> = Vec::with_capacity(4);
    for k in [1, 2, 3, 0] {
        let mut v = raw[k].clone();
        let mut row = nalgebra::RowVector4::zeros();
        row[k] = 1.0;
        for _ in 0..2 {
            for &j in &done {
                let c = geom.inner(&v, &y[j]);
                v.iter_mut().zip(&y[j]).for_each(|(a, b)| *a -= c * b);
                row -= t.row(j) * c;
            }
        }
        let norm = geom.inner(&v, &v).sqrt();
        let scale = geom.inner(&raw[k], &raw[k]).sqrt();
        if !(norm > 1e-8 * scale) {
            return Err(Error::DegenerateBasis(format!(
                "direction {k} collapses under orthogonalisation ({norm:.3e} of {scale:.3e})"
            )));
        }
        y[k] = v.iter().map(|a| a / norm).collect();
        t.set_row(k, &(row / norm));
        done.push(k);
    }
    Ok(KernelBasis { y, transform: t })
}

/// `f − Σ_j ⟨f, Y_j⟩ Y_j`.
pub fn project_perp(geom: &SurfaceGeometry, basis: &KernelBasis, f: &[f64]) -> Vec<f64> {
    let c = basis.coefficients(geom, f);
    let mut out = f.to_vec();
    for (cj, yj) in c.iter().zip(&basis.y) {
        out.iter_mut().zip(yj).for_each(|(a, b)| *a -= cj * b);
    }
    out
}
