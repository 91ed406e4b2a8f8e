#![allow(dead_code)]

use std::sync::Arc;

use willmore::metric::{
    ConformalFactor, Domain, MetricProvider, ParamSpec, ProviderEntry, ProviderRegistry,
};
use willmore::{Mat3, Vec3};

/// `u = η|x|² + κ x₁⁵`. `Sc` keeps the quadratic well's critical point at the
/// origin with the same Hessian, but `∇ΔSc(0) ≠ 0`, so the `ε⁴` term of `Φ_ε`
/// pushes `P_ε` off the origin.
#[derive(Clone, Debug)]
pub struct Skewed {
    pub eta: f64,
    pub kappa: f64,
}

impl ConformalFactor for Skewed {
    fn exponent(&self, x: &Vec3) -> f64 {
        self.eta * x.norm_squared() + self.kappa * x.x.powi(5)
    }
    fn gradient(&self, x: &Vec3) -> Vec3 {
        x * (2.0 * self.eta) + Vec3::new(5.0 * self.kappa * x.x.powi(4), 0.0, 0.0)
    }
    fn hessian(&self, x: &Vec3) -> Mat3 {
        let mut h = Mat3::identity() * (2.0 * self.eta);
        h[(0, 0)] += 20.0 * self.kappa * x.x.powi(3);
        h
    }
}

impl MetricProvider for Skewed {
    fn name(&self) -> &str {
        "skewed"
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![("eta".into(), self.eta), ("kappa".into(), self.kappa)]
    }
    fn domain(&self) -> Domain {
        Domain::ball(2.0)
    }
    fn metric(&self, x: &Vec3) -> Mat3 {
        Mat3::identity() * (2.0 * self.exponent(x)).exp()
    }
    fn conformal(&self) -> Option<&dyn ConformalFactor> {
        Some(self)
    }
}

pub const ETA: f64 = -0.02;
pub const KAPPA: f64 = 1e-5;

pub fn skewed() -> Arc<dyn MetricProvider> {
    Arc::new(Skewed {
        eta: ETA,
        kappa: KAPPA,
    })
}

/// Built-in providers plus `skewed`.
pub fn registry() -> ProviderRegistry {
    let mut reg = ProviderRegistry::builtin();
    reg.register(ProviderEntry::new(
        "skewed",
        vec![ParamSpec::required("eta"), ParamSpec::required("kappa")],
        |p| {
            Ok(Arc::new(Skewed {
                eta: p["eta"],
                kappa: p["kappa"],
            }))
        },
    ));
    reg
}
