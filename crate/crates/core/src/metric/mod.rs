//! Ambient Riemannian 3-metrics on a single coordinate chart.
//!
//! A metric is supplied by a [`MetricProvider`], looked up by name in a
//! [`ProviderRegistry`]. Conformally flat providers expose their conformal
//! exponent through [`ConformalFactor`], which gives closed-form Christoffel
//! symbols and curvature; any other provider falls back to finite
//! differences of [`MetricProvider::metric`].

mod chart;
mod connection;
mod curvature;
mod geodesic;
mod providers;
mod registry;

use std::fmt;

use crate::{Error, Mat3, Result, Vec3};

pub use chart::{build_normal_chart, NormalChart};
pub use connection::{
    christoffel, christoffel_contract, christoffel_derivative_contract, christoffel_derivatives,
    eval_metric, fd_christoffel, fd_christoffel_derivatives, Christoffel, MetricJet,
};
pub use curvature::{
    curvature_bundle, curvature_fd, ricci, scalar_curvature, scalar_gradient, scalar_hessian,
    CurvatureBundle, Riemann,
};
pub use geodesic::{
    exp_map, integrate, integrate_deviation, integrate_for, integrate_with_jacobi,
    AmbientGeodesics, ExpMapResult, GeodesicSystem, DEFAULT_GEODESIC_STEPS,
};
pub use providers::{ConformalBump, ConformalQuadratic, Euclidean, RoundS3, Schwarzschild};
pub use registry::{ParamSpec, ProviderEntry, ProviderRegistry};

/// A point of the background chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint(pub Vec3);

impl ChartPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        ChartPoint(Vec3::new(x, y, z))
    }

    pub fn origin() -> Self {
        ChartPoint(Vec3::zeros())
    }

    pub fn coords(&self) -> &Vec3 {
        &self.0
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    /// Checks finiteness and membership in the provider's domain.
    pub fn validated(self, provider: &dyn MetricProvider) -> Result<Self> {
        if !self.0.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite chart point {:?}",
                self.0
            )));
        }
        provider.domain().check(&self.0)?;
        Ok(self)
    }
}

impl From<[f64; 3]> for ChartPoint {
    fn from(a: [f64; 3]) -> Self {
        ChartPoint::new(a[0], a[1], a[2])
    }
}

/// Region of the chart where a provider is valid: the open shell
/// `inner < |x| < validity_radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub inner: f64,
    pub validity_radius: f64,
}

impl Domain {
    pub fn ball(radius: f64) -> Self {
        Domain {
            inner: 0.0,
            validity_radius: radius,
        }
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        let r = x.norm();
        r < self.validity_radius && (self.inner <= 0.0 || r > self.inner)
    }

    pub fn check(&self, x: &Vec3) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "point ({:.6}, {:.6}, {:.6}) outside validity region {} < |x| < {}",
                x.x, x.y, x.z, self.inner, self.validity_radius
            )))
        }
    }
}

/// `g = e^{2u} δ`: the exponent `u` with its first two derivatives.
pub trait ConformalFactor: Send + Sync {
    fn exponent(&self, x: &Vec3) -> f64;
    fn gradient(&self, x: &Vec3) -> Vec3;
    fn hessian(&self, x: &Vec3) -> Mat3;
}

/// An analytic ambient 3-metric on a single chart.
pub trait MetricProvider: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Named parameters, in declaration order.
    fn params(&self) -> Vec<(String, f64)>;

    fn domain(&self) -> Domain;

    /// `g_{αβ}(x)`. Callers are responsible for domain checks.
    fn metric(&self, x: &Vec3) -> Mat3;

    /// Closed-form conformal structure, when the metric is conformally flat.
    fn conformal(&self) -> Option<&dyn ConformalFactor> {
        None
    }

    /// Flat metrics skip geodesic integration entirely.
    fn is_flat(&self) -> bool {
        false
    }

    fn validity_radius(&self) -> f64 {
        self.domain().validity_radius
    }

    /// Step for the central-difference fallbacks.
    fn fd_step(&self) -> f64 {
        1e-3 * self.validity_radius()
    }
}

/// `g(x)` after the domain and positive-definiteness checks.
pub fn checked_metric(provider: &dyn MetricProvider, x: &Vec3) -> Result<Mat3> {
    provider.domain().check(x)?;
    let g = provider.metric(x);
    if !g.iter().all(|v| v.is_finite()) || g.cholesky().is_none() {
        return Err(Error::Metric(format!(
            "metric not positive definite at ({:.6}, {:.6}, {:.6})",
            x.x, x.y, x.z
        )));
    }
    Ok(g)
}

/// Orthonormal frame at `x`: columns `F_α` with `Fᵀ g F = I`, taken as the
/// inverse transpose of the Cholesky factor of `g(x)`.
pub fn cholesky_frame(provider: &dyn MetricProvider, x: &Vec3) -> Result<Mat3> {
    let g = checked_metric(provider, x)?;
    let l = g
        .cholesky()
        .ok_or_else(|| Error::Metric("Cholesky factorisation failed".into()))?
        .l();
    let linv = l
        .try_inverse()
        .ok_or_else(|| Error::Metric("singular Cholesky factor".into()))?;
    Ok(linv.transpose())
}
