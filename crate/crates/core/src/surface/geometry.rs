use nalgebra::Matrix2;
use rayon::prelude::*;

use crate::metric::NormalChart;
use crate::spectral::{SpectralField, SphereGrid};
use crate::{Error, Mat3, Result, Vec3};

/// How parameter points `q ∈ S²` are carried into the chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Embedding {
    /// `y(q) = exp((1 + φ(q)) q)` in the rescaled chart.
    Geodesic,
    /// `y(q) = (1 + φ(q)) q`: coordinate spheres of the affine chart.
    Radial,
}

/// A perturbed geodesic sphere `Σ_{ε,P}[φ]`.
#[derive(Clone, Debug)]
pub struct SurfaceShape {
    pub chart: NormalChart,
    pub phi: SpectralField,
    pub embedding: Embedding,
}

impl SurfaceShape {
    pub fn new(chart: NormalChart, phi: SpectralField) -> Self {
        SurfaceShape {
            chart,
            phi,
            embedding: Embedding::Geodesic,
        }
    }

    pub fn radial(chart: NormalChart, phi: SpectralField) -> Self {
        SurfaceShape {
            chart,
            phi,
            embedding: Embedding::Radial,
        }
    }

    pub fn with_phi(&self, phi: SpectralField) -> Self {
        SurfaceShape {
            chart: self.chart.clone(),
            phi,
            embedding: self.embedding,
        }
    }

    /// Affine chart coordinates of the surface at every node.
    pub fn positions(&self, grid: &SphereGrid) -> Result<Vec<Vec3>> {
        Ok(self
            .displacements(grid)?
            .iter()
            .zip(&grid.unit_points)
            .map(|(d, q)| q + d)
            .collect())
    }

    /// `y(q) − q` at every node, accurate relative to its own size.
    pub fn displacements(&self, grid: &SphereGrid) -> Result<Vec<Vec3>> {
        let min = self.phi.min_value();
        if 1.0 + min <= 0.0 {
            return Err(Error::Geometry(format!(
                "embedding degenerate: 1 + min φ = {:.3e}",
                1.0 + min
            )));
        }
        let phi = self.phi.values();
        match self.embedding {
            Embedding::Radial => Ok(grid
                .unit_points
                .iter()
                .zip(phi)
                .map(|(q, p)| q * *p)
                .collect()),
            Embedding::Geodesic => grid
                .unit_points
                .par_iter()
                .zip(phi.par_iter())
                .map(|(q, p)| Ok(q * *p + self.chart.exp_deviation(&(q * (1.0 + p)))?))
                .collect(),
        }
    }
}

/// Extrinsic geometry at one node, in the affine chart coordinates and the
/// Mercator parameters `(s, λ)`.
#[derive(Clone, Debug)]
pub struct NodeGeometry {
    pub position: Vec3,
    pub d_s: Vec3,
    pub d_l: Vec3,
    /// Ambient metric `g_ε` at the node.
    pub ambient: Mat3,
    /// Induced metric `ḡ` in `(s, λ)`.
    pub induced: Matrix2<f64>,
    pub induced_inv: Matrix2<f64>,
    /// `√det ḡ / sin²θ`: area element relative to the round measure.
    pub density: f64,
    pub normal: Vec3,
    pub second_form: Matrix2<f64>,
    /// Surface Christoffel symbols `Γ̄^k_{ij}`, `[k]` indexing `(i, j)`.
    pub surface_christoffel: [Matrix2<f64>; 2],
    pub mean_curvature: f64,
    pub a_norm_sq: f64,
    pub traceless_norm_sq: f64,
    pub traceless_trace: f64,
    pub ric_nn: f64,
    pub scalar: f64,
}

/// Geometry of a perturbed sphere on the collocation grid.
#[derive(Clone, Debug)]
pub struct SurfaceGeometry {
    pub nodes: Vec<NodeGeometry>,
    pub node_weights: Vec<f64>,
    /// `H` at the nodes.
    pub mean_curvature: Vec<f64>,
    /// Area element relative to the round measure.
    pub density: Vec<f64>,
    /// `Δ_ḡ H` at the nodes.
    pub laplace_h: Vec<f64>,
    /// `W' = −ΔH − |A|²H − H Ric(n, n) + ½H³` at the nodes.
    pub willmore_gradient: Vec<f64>,
    /// Area in `g_ε`.
    pub area: f64,
}

impl SurfaceGeometry {
    /// `∫_Σ f dσ` for nodal values `f`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter()
            .zip(&self.node_weights)
            .zip(&self.density)
            .map(|((f, w), r)| f * w * r)
            .sum()
    }

    /// `⟨u, v⟩ = ∫_Σ u v dσ`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter()
            .zip(v)
            .zip(&self.node_weights)
            .zip(&self.density)
            .map(|(((u, v), w), r)| u * v * w * r)
            .sum()
    }

    pub fn mean_curvature_field(&self, grid: &SphereGrid, band: usize) -> Result<SpectralField> {
        SpectralField::from_values(grid, &self.mean_curvature, band)
    }

    pub fn max_normal_error(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| (n.normal.dot(&(n.ambient * n.normal)) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max |tr Å| / max |A|`.
    pub fn max_traceless_trace(&self) -> f64 {
        let a = self
            .nodes
            .iter()
            .map(|n| n.a_norm_sq.sqrt())
            .fold(0.0, f64::max);
        self.nodes
            .iter()
            .map(|n| n.traceless_trace.abs())
            .fold(0.0, f64::max)
            / a.max(1e-300)
    }
}

fn pointwise(chart: &NormalChart, q: &Vec3, sin2: f64, y: [Vec3; 6]) -> Result<NodeGeometry> {
    let [pos, ys, yl, yss, ysl, yll] = y;
    let g = chart.affine_metric(&pos)?;
    let ip = |a: &Vec3, b: &Vec3| a.dot(&(g * b));
    let induced = Matrix2::new(ip(&ys, &ys), ip(&ys, &yl), ip(&yl, &ys), ip(&yl, &yl));
    let det = induced.determinant();
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::Geometry(format!(
            "induced metric not positive definite (det {det:.3e})"
        )));
    }
    let induced_inv = induced
        .try_inverse()
        .ok_or_else(|| Error::Geometry("singular induced metric".into()))?;
    let ginv = g
        .try_inverse()
        .ok_or_else(|| Error::Geometry("singular ambient metric".into()))?;
    let mut n = ginv * ys.cross(&yl);
    n /= ip(&n, &n).sqrt();
    if n.dot(q) < 0.0 {
        n = -n;
    }
    let cov = [
        yss + chart.affine_gamma(&pos, &ys, &ys)?,
        ysl + chart.affine_gamma(&pos, &ys, &yl)?,
        yll + chart.affine_gamma(&pos, &yl, &yl)?,
    ];
    let second_form = Matrix2::new(
        -ip(&n, &cov[0]),
        -ip(&n, &cov[1]),
        -ip(&n, &cov[1]),
        -ip(&n, &cov[2]),
    );
    let h = (induced_inv.component_mul(&second_form)).sum();
    let mixed = induced_inv * second_form;
    let a_norm_sq = (mixed * mixed).trace();
    let traceless = second_form - induced * (0.5 * h);
    let tmixed = induced_inv * traceless;
    let traceless_norm_sq = (tmixed * tmixed).trace();
    let traceless_trace = tmixed.trace();
    // Γ̄^k_{ij} = ḡ^{kl} g(∇_i y_j, y_l)
    let proj = |c: &Vec3| nalgebra::Vector2::new(ip(c, &ys), ip(c, &yl));
    let p = [proj(&cov[0]), proj(&cov[1]), proj(&cov[2])];
    let up = [induced_inv * p[0], induced_inv * p[1], induced_inv * p[2]];
    let surface_christoffel = [
        Matrix2::new(up[0][0], up[1][0], up[1][0], up[2][0]),
        Matrix2::new(up[0][1], up[1][1], up[1][1], up[2][1]),
    ];
    let ric = chart.affine_ricci(&pos)?;
    Ok(NodeGeometry {
        position: pos,
        d_s: ys,
        d_l: yl,
        ambient: g,
        induced,
        induced_inv,
        density: det.sqrt() / sin2,
        normal: n,
        second_form,
        surface_christoffel,
        mean_curvature: h,
        a_norm_sq,
        traceless_norm_sq,
        traceless_trace,
        ric_nn: n.dot(&(ric * n)),
        scalar: chart.affine_scalar(&pos)?,
    })
}

/// Mercator derivatives `[q_s, q_λ, q_ss, q_sλ, q_λλ]` of the unit sphere.
fn round_derivatives(grid: &SphereGrid, i: usize) -> [Vec3; 5] {
    let k = grid.lat_of(i);
    let (s, c) = (grid.sin_theta[k], grid.cos_theta[k]);
    let q = grid.unit_points[i];
    let (sl, cl) = (q.y / s, q.x / s);
    let q_t = Vec3::new(c * cl, c * sl, -s);
    let q_l = Vec3::new(-s * sl, s * cl, 0.0);
    [
        q_t * s,
        q_l,
        q_t * (s * c) - q * (s * s),
        Vec3::new(-s * c * sl, s * c * cl, 0.0),
        Vec3::new(-q.x, -q.y, 0.0),
    ]
}

/// Spectral derivatives of `f − mean f`, so that roundoff scales with the
/// variation of `f` rather than its size.
fn centered_derivatives(
    grid: &SphereGrid,
    f: &[f64],
    band: usize,
) -> Result<crate::spectral::Derivatives> {
    let mean = grid.integrate(f) / (4.0 * std::f64::consts::PI);
    let v: Vec<f64> = f.iter().map(|x| x - mean).collect();
    let mut d = grid.synthesize_derivatives(&grid.analyze(&v, band)?)?;
    d.f.iter_mut().for_each(|x| *x += mean);
    Ok(d)
}

/// Full extrinsic geometry of `shape`, with parametric derivatives taken
/// spectrally at the grid's full analysis band.
pub fn compute_geometry(grid: &SphereGrid, shape: &SurfaceShape) -> Result<SurfaceGeometry> {
    geometry_from_displacements(grid, &shape.chart, &shape.displacements(grid)?)
}

pub fn geometry_from_positions(
    grid: &SphereGrid,
    chart: &NormalChart,
    pos: &[Vec3],
) -> Result<SurfaceGeometry> {
    let d: Vec<Vec3> = pos
        .iter()
        .zip(&grid.unit_points)
        .map(|(p, q)| p - q)
        .collect();
    geometry_from_displacements(grid, chart, &d)
}

/// Geometry of `y = q + d`. The round part `q` is differentiated exactly;
/// only `d` goes through the transform.
pub fn geometry_from_displacements(
    grid: &SphereGrid,
    chart: &NormalChart,
    disp: &[Vec3],
) -> Result<SurfaceGeometry> {
    if disp.len() != grid.len() {
        return Err(Error::Shape {
            expected: grid.len(),
            got: disp.len(),
        });
    }
    let band = grid.max_band();
    let mut comps = Vec::with_capacity(3);
    for c in 0..3 {
        let v: Vec<f64> = disp.iter().map(|d| d[c]).collect();
        comps.push(grid.synthesize_derivatives(&grid.analyze(&v, band)?)?);
    }
    let pick = |i: usize, f: fn(&crate::spectral::Derivatives) -> &Vec<f64>| {
        Vec3::new(f(&comps[0])[i], f(&comps[1])[i], f(&comps[2])[i])
    };
    let nodes: Vec<NodeGeometry> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let s = grid.sin_theta[grid.lat_of(i)];
            let r = round_derivatives(grid, i);
            pointwise(
                chart,
                &grid.unit_points[i],
                s * s,
                [
                    grid.unit_points[i] + disp[i],
                    r[0] + pick(i, |d| &d.s),
                    r[1] + pick(i, |d| &d.l),
                    r[2] + pick(i, |d| &d.ss),
                    r[3] + pick(i, |d| &d.sl),
                    r[4] + pick(i, |d| &d.ll),
                ],
            )
        })
        .collect::<Result<_>>()?;
    let h: Vec<f64> = nodes.iter().map(|n| n.mean_curvature).collect();
    let dh = centered_derivatives(grid, &h, band)?;
    let laplace_h: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let d1 = [dh.s[i], dh.l[i]];
            let d2 = Matrix2::new(dh.ss[i], dh.sl[i], dh.sl[i], dh.ll[i]);
            let corr = n.surface_christoffel[0] * d1[0] + n.surface_christoffel[1] * d1[1];
            n.induced_inv.component_mul(&(d2 - corr)).sum()
        })
        .collect();
    let willmore_gradient = nodes
        .iter()
        .zip(&laplace_h)
        .map(|(n, lh)| {
            let h = n.mean_curvature;
            -lh - n.a_norm_sq * h - h * n.ric_nn + 0.5 * h * h * h
        })
        .collect();
    let density: Vec<f64> = nodes.iter().map(|n| n.density).collect();
    let area = density
        .iter()
        .zip(&grid.node_weights)
        .map(|(r, w)| r * w)
        .sum();
    Ok(SurfaceGeometry {
        nodes,
        node_weights: grid.node_weights.clone(),
        mean_curvature: h,
        density,
        laplace_h,
        willmore_gradient,
        area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{ChartPoint, Euclidean, RoundS3};
    use crate::spectral::{coeff_index, n_coeffs};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn flat_chart() -> NormalChart {
        NormalChart::new(Arc::new(Euclidean), ChartPoint::origin(), 0.1).unwrap()
    }

    #[test]
    fn unit_sphere() {
        let g = SphereGrid::new(16).unwrap();
        let shape = SurfaceShape::new(flat_chart(), SpectralField::zeros(&g, 16));
        let geo = compute_geometry(&g, &shape).unwrap();
        assert!((geo.area - 4.0 * PI).abs() < 1e-12);
        for n in &geo.nodes {
            assert!((n.mean_curvature - 2.0).abs() < 1e-13);
            assert!((n.second_form - n.induced).amax() < 1e-11);
            assert!(n.traceless_norm_sq.abs() < 1e-20);
        }
        assert!(geo.max_normal_error() < 1e-12);
        assert!(geo.willmore_gradient.iter().all(|w| w.abs() < 1e-11));
    }

    #[test]
    fn dilated_sphere() {
        let g = SphereGrid::new(12).unwrap();
        let c = 0.1;
        let shape = SurfaceShape::new(flat_chart(), SpectralField::constant(&g, c, 12));
        let geo = compute_geometry(&g, &shape).unwrap();
        assert!((geo.area - 4.0 * PI * (1.0 + c) * (1.0 + c)).abs() < 1e-11);
        for h in &geo.mean_curvature {
            assert!((h - 2.0 / (1.0 + c)).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbed_sphere_invariants() {
        let g = SphereGrid::new(16).unwrap();
        let mut cf = vec![0.0; n_coeffs(16)];
        cf[coeff_index(2, 1)] = 0.05;
        cf[coeff_index(3, -2)] = 0.03;
        let phi = SpectralField::from_coeffs(&g, cf).unwrap();
        let chart = NormalChart::new(
            Arc::new(RoundS3 { radius: 1.0 }),
            ChartPoint::new(0.1, 0.0, 0.0),
            0.2,
        )
        .unwrap();
        let geo = compute_geometry(&g, &SurfaceShape::new(chart, phi)).unwrap();
        assert!(geo.max_normal_error() < 1e-10);
        assert!(geo.max_traceless_trace() < 1e-8);
    }

    #[test]
    fn degenerate_embedding() {
        let g = SphereGrid::new(8).unwrap();
        let shape = SurfaceShape::new(flat_chart(), SpectralField::constant(&g, -1.5, 8));
        assert!(matches!(
            compute_geometry(&g, &shape),
            Err(Error::Geometry(_))
        ));
    }
}
