use std::sync::Arc;

use super::connection::{christoffel, christoffel_derivatives, Christoffel};
use super::curvature::{ricci, scalar_curvature};
use super::geodesic::{
    integrate_deviation, integrate_with_jacobi, GeodesicSystem, DEFAULT_GEODESIC_STEPS,
};
use super::{checked_metric, cholesky_frame, ChartPoint, MetricProvider};
use crate::{Error, Mat3, Result, Vec3};

/// Rescaled chart at a base point `P` and scale `ε`.
///
/// Two coordinate systems live here. The *affine* coordinates `y` are
/// `x = P + ε F y`, in which the rescaled metric `g_ε = ε⁻² g` reads
/// `Fᵀ g(x) F`; all surface geometry is computed in them. The *normal*
/// coordinates are `y ↦ exp_P(ε F y)`, in which the metric is
/// `δ + ε² h` ([`NormalChart::metric_at`]).
#[derive(Clone, Debug)]
pub struct NormalChart {
    provider: Arc<dyn MetricProvider>,
    pub base: ChartPoint,
    pub eps: f64,
    /// Orthonormal frame at the base point, `Fᵀ g(P) F = I`.
    pub frame: Mat3,
    frame_inv: Mat3,
    pub steps: usize,
    /// `sup |metric_at(y) − δ| / ε²` over a sample of `|y| ≤ 1`, once measured.
    pub h_bound: Option<f64>,
}

const SAMPLE_DIRS: [[f64; 3]; 14] = [
    [1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0],
    [1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0],
    [1.0, -1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, 1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [-1.0, -1.0, -1.0],
];

impl NormalChart {
    /// Chart with the Cholesky frame; `h_bound` is not measured.
    pub fn new(provider: Arc<dyn MetricProvider>, base: ChartPoint, eps: f64) -> Result<Self> {
        let base = base.validated(provider.as_ref())?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Domain(format!("scale must be positive, got {eps}")));
        }
        let frame = cholesky_frame(provider.as_ref(), &base.0)?;
        Self::with_frame(provider, base, eps, frame)
    }

    /// Chart with an explicit frame, which must be orthonormal for `g(P)`.
    pub fn with_frame(
        provider: Arc<dyn MetricProvider>,
        base: ChartPoint,
        eps: f64,
        frame: Mat3,
    ) -> Result<Self> {
        let frame_inv = frame
            .try_inverse()
            .ok_or_else(|| Error::Metric("singular chart frame".into()))?;
        Ok(NormalChart {
            provider,
            base,
            eps,
            frame,
            frame_inv,
            steps: DEFAULT_GEODESIC_STEPS,
            h_bound: None,
        })
    }

    /// The Cholesky frame rotated by `r` (`F ↦ F r`).
    pub fn rotated(&self, r: &Mat3) -> Result<Self> {
        let mut c = Self::with_frame(self.provider.clone(), self.base, self.eps, self.frame * r)?;
        c.steps = self.steps;
        Ok(c)
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    /// Same base and frame convention at another scale.
    pub fn rescaled(&self, eps: f64) -> Self {
        let mut c = self.clone();
        c.eps = eps;
        c.h_bound = None;
        c
    }

    pub fn provider(&self) -> &dyn MetricProvider {
        self.provider.as_ref()
    }

    pub fn provider_arc(&self) -> &Arc<dyn MetricProvider> {
        &self.provider
    }

    pub fn frame_inv(&self) -> &Mat3 {
        &self.frame_inv
    }

    /// `x = P + ε F y`.
    #[inline]
    pub fn to_background(&self, y: &Vec3) -> Vec3 {
        self.base.0 + self.frame * y * self.eps
    }

    pub fn from_background(&self, x: &Vec3) -> Vec3 {
        self.frame_inv * (x - self.base.0) / self.eps
    }

    /// Rescaled metric in affine coordinates, `Fᵀ g(x) F`.
    pub fn affine_metric(&self, y: &Vec3) -> Result<Mat3> {
        let g = checked_metric(self.provider(), &self.to_background(y))?;
        Ok(self.frame.transpose() * g * self.frame)
    }

    pub fn affine_connection(&self, y: &Vec3) -> Result<Christoffel> {
        let x = self.to_background(y);
        Ok(christoffel(self.provider(), &x)?.transform(&self.frame, &self.frame_inv, self.eps))
    }

    /// `Γ̂(a, b) = ε F⁻¹ Γ(x)(F a, F b)`.
    #[inline]
    pub fn affine_gamma(&self, y: &Vec3, a: &Vec3, b: &Vec3) -> Result<Vec3> {
        let x = self.to_background(y);
        let fa = self.frame * a;
        let fb = self.frame * b;
        let g = match self.provider.conformal() {
            Some(c) => {
                let du = c.gradient(&x);
                fa * du.dot(&fb) + fb * du.dot(&fa) - du * fa.dot(&fb)
            }
            None => christoffel(self.provider(), &x)?.contract(&fa, &fb),
        };
        Ok(self.frame_inv * g * self.eps)
    }

    /// `Ric` of `g_ε` in affine coordinates, `ε² Fᵀ Ric(x) F`.
    pub fn affine_ricci(&self, y: &Vec3) -> Result<Mat3> {
        let ric = ricci(self.provider(), &self.to_background(y))?;
        Ok(self.frame.transpose() * ric * self.frame * (self.eps * self.eps))
    }

    /// Scalar curvature of `g_ε`, `ε² Sc(x)`.
    pub fn affine_scalar(&self, y: &Vec3) -> Result<f64> {
        Ok(scalar_curvature(self.provider(), &self.to_background(y))? * self.eps * self.eps)
    }

    /// Affine coordinates of `exp_P(ε F v)`: the `g_ε`-geodesic from the
    /// origin with initial velocity `v`, at unit time.
    pub fn exp(&self, v: &Vec3) -> Result<Vec3> {
        Ok(v + self.exp_deviation(v)?)
    }

    /// `exp(v) − v`, computed without forming `exp(v)`.
    pub fn exp_deviation(&self, v: &Vec3) -> Result<Vec3> {
        if v.norm() == 0.0 {
            return Ok(Vec3::zeros());
        }
        if self.provider.is_flat() {
            self.check(v)?;
            return Ok(Vec3::zeros());
        }
        integrate_deviation(self, v, self.steps)
    }

    /// Rescaled metric pulled back to normal coordinates,
    /// `metric_at(y) = Jᵀ ĝ(exp y) J` with `J = D exp(y)`.
    pub fn metric_at(&self, y: &Vec3) -> Result<Mat3> {
        if y.norm() == 0.0 {
            return Ok(Mat3::identity());
        }
        let out = integrate_with_jacobi(self, &Vec3::zeros(), y, self.steps)?;
        let g = self.affine_metric(&out.point)?;
        Ok(out.jacobian.transpose() * g * out.jacobian)
    }

    /// `sup |metric_at(y) − δ|` (entrywise) over `|y| ∈ {1/2, 1}` along a
    /// fixed set of directions.
    pub fn sup_metric_deviation(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for d in SAMPLE_DIRS {
            let dir = Vec3::from(d).normalize();
            for r in [0.5, 1.0] {
                let m = self.metric_at(&(dir * r))?;
                worst = worst.max((m - Mat3::identity()).amax());
            }
        }
        Ok(worst)
    }

    pub fn measure_h_bound(&mut self) -> Result<f64> {
        let h = self.sup_metric_deviation()? / (self.eps * self.eps);
        self.h_bound = Some(h);
        Ok(h)
    }
}

impl GeodesicSystem for NormalChart {
    fn check(&self, y: &Vec3) -> Result<()> {
        let x = self.to_background(y);
        self.provider.domain().check(&x).map_err(|_| {
            Error::Domain(format!(
                "geodesic exits chart at ({:.6}, {:.6}, {:.6})",
                x.x, x.y, x.z
            ))
        })
    }
    fn metric(&self, y: &Vec3) -> Result<Mat3> {
        self.affine_metric(y)
    }
    fn connection(&self, y: &Vec3) -> Result<Christoffel> {
        self.affine_connection(y)
    }
    fn connection_derivatives(&self, y: &Vec3) -> Result<[Christoffel; 3]> {
        let d = christoffel_derivatives(self.provider(), &self.to_background(y))?;
        let s = self.eps * self.eps;
        let mut out = [Christoffel::zero(); 3];
        for (k, ok) in out.iter_mut().enumerate() {
            // ∂/∂y^k = ε F^j_k ∂/∂x^j
            let mut sum = Christoffel::zero();
            for (j, dj) in d.iter().enumerate() {
                let w = self.frame[(j, k)];
                for a in 0..3 {
                    sum.gamma[a] += dj.gamma[a] * w;
                }
            }
            *ok = sum.transform(&self.frame, &self.frame_inv, s);
        }
        Ok(out)
    }
    fn gamma_vv(&self, y: &Vec3, v: &Vec3) -> Result<Vec3> {
        self.affine_gamma(y, v, v)
    }
}

/// Builds a chart and records its `h_bound`.
pub fn build_normal_chart(
    provider: Arc<dyn MetricProvider>,
    base: ChartPoint,
    eps: f64,
) -> Result<NormalChart> {
    let mut c = NormalChart::new(provider, base, eps)?;
    c.measure_h_bound()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{ConformalBump, RoundS3, Schwarzschild};
    use approx::assert_relative_eq;

    fn chart(p: Arc<dyn MetricProvider>, base: [f64; 3], eps: f64) -> NormalChart {
        NormalChart::new(p, base.into(), eps).unwrap()
    }

    #[test]
    fn identity_at_origin() {
        let c = chart(Arc::new(Schwarzschild { mass: 1.0 }), [3.0, 0.5, 0.0], 0.1);
        assert_eq!(c.metric_at(&Vec3::zeros()).unwrap(), Mat3::identity());
        assert_relative_eq!(
            c.affine_metric(&Vec3::zeros()).unwrap(),
            Mat3::identity(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn first_derivatives_vanish_at_origin() {
        let c = chart(
            Arc::new(ConformalBump {
                eta: 0.1,
                sigma: 1.0,
            }),
            [0.3, 0.2, -0.1],
            0.2,
        );
        let h = 1e-3;
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = h;
            let d = (c.metric_at(&e).unwrap() - c.metric_at(&-e).unwrap()) / (2.0 * h);
            assert!(d.amax() < 1e-6, "derivative {k}: {}", d.amax());
        }
    }

    #[test]
    fn gauss_lemma() {
        let c = chart(Arc::new(RoundS3 { radius: 1.0 }), [0.2, 0.0, 0.1], 0.3);
        for d in SAMPLE_DIRS {
            let y = Vec3::from(d).normalize() * 0.9;
            let m = c.metric_at(&y).unwrap();
            assert_relative_eq!(y.dot(&(m * y)), y.norm_squared(), epsilon = 1e-8);
        }
    }

    #[test]
    fn affine_connection_paths_agree() {
        let c = chart(
            Arc::new(ConformalBump {
                eta: 0.1,
                sigma: 1.0,
            }),
            [0.3, 0.2, -0.1],
            0.2,
        );
        let y = Vec3::new(0.4, -0.3, 0.5);
        let a = Vec3::new(1.0, 0.2, -0.5);
        let b = Vec3::new(-0.3, 0.7, 0.1);
        assert_relative_eq!(
            c.affine_gamma(&y, &a, &b).unwrap(),
            c.affine_connection(&y).unwrap().contract(&a, &b),
            epsilon = 1e-14
        );
    }

    #[test]
    fn h_bound_is_order_one() {
        let c = build_normal_chart(Arc::new(RoundS3 { radius: 1.0 }), ChartPoint::origin(), 0.1)
            .unwrap();
        let h = c.h_bound.unwrap();
        assert!(h > 0.05 && h < 1.0, "h_bound {h}");
    }
}
