use super::{ConformalFactor, Domain, MetricProvider};
use crate::{Mat3, Vec3};

fn conformal_metric(u: f64) -> Mat3 {
    Mat3::identity() * (2.0 * u).exp()
}

#[derive(Clone, Debug, Default)]
pub struct Euclidean;

impl ConformalFactor for Euclidean {
    fn exponent(&self, _x: &Vec3) -> f64 {
        0.0
    }
    fn gradient(&self, _x: &Vec3) -> Vec3 {
        Vec3::zeros()
    }
    fn hessian(&self, _x: &Vec3) -> Mat3 {
        Mat3::zeros()
    }
}

impl MetricProvider for Euclidean {
    fn name(&self) -> &str {
        "euclidean"
    }
    fn params(&self) -> Vec<(String, f64)> {
        Vec::new()
    }
    fn domain(&self) -> Domain {
        Domain::ball(10.0)
    }
    fn metric(&self, _x: &Vec3) -> Mat3 {
        Mat3::identity()
    }
    fn conformal(&self) -> Option<&dyn ConformalFactor> {
        Some(self)
    }
    fn is_flat(&self) -> bool {
        true
    }
}

/// Stereographic chart of the round 3-sphere of radius `R`:
/// `u = −ln(1 + |x|²/(4R²))`.
#[derive(Clone, Debug)]
pub struct RoundS3 {
    pub radius: f64,
}

impl RoundS3 {
    fn s(&self, x: &Vec3) -> f64 {
        1.0 + x.norm_squared() / (4.0 * self.radius * self.radius)
    }
}

impl ConformalFactor for RoundS3 {
    fn exponent(&self, x: &Vec3) -> f64 {
        -self.s(x).ln()
    }
    fn gradient(&self, x: &Vec3) -> Vec3 {
        let r2 = self.radius * self.radius;
        -x / (2.0 * r2 * self.s(x))
    }
    fn hessian(&self, x: &Vec3) -> Mat3 {
        let r2 = self.radius * self.radius;
        let s = self.s(x);
        -Mat3::identity() / (2.0 * r2 * s) + x * x.transpose() / (4.0 * r2 * r2 * s * s)
    }
}

impl MetricProvider for RoundS3 {
    fn name(&self) -> &str {
        "round_s3"
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![("R".into(), self.radius)]
    }
    fn domain(&self) -> Domain {
        Domain::ball(4.0 * self.radius)
    }
    fn metric(&self, x: &Vec3) -> Mat3 {
        conformal_metric(self.exponent(x))
    }
    fn conformal(&self) -> Option<&dyn ConformalFactor> {
        Some(self)
    }
}

/// Spatial Schwarzschild slice in isotropic coordinates:
/// `u = 2 ln(1 + m/(2|x|))`. The puncture is excluded by an inner radius.
#[derive(Clone, Debug)]
pub struct Schwarzschild {
    pub mass: f64,
}

impl Schwarzschild {
    fn psi(&self, x: &Vec3) -> f64 {
        1.0 + self.mass / (2.0 * x.norm())
    }
    fn grad_psi(&self, x: &Vec3) -> Vec3 {
        let r = x.norm();
        -x * (self.mass / (2.0 * r * r * r))
    }
    fn hess_psi(&self, x: &Vec3) -> Mat3 {
        let r = x.norm();
        let r3 = r * r * r;
        (Mat3::identity() / r3 - x * x.transpose() * (3.0 / (r3 * r * r))) * (-0.5 * self.mass)
    }
}

impl ConformalFactor for Schwarzschild {
    fn exponent(&self, x: &Vec3) -> f64 {
        2.0 * self.psi(x).ln()
    }
    fn gradient(&self, x: &Vec3) -> Vec3 {
        self.grad_psi(x) * (2.0 / self.psi(x))
    }
    fn hessian(&self, x: &Vec3) -> Mat3 {
        let p = self.psi(x);
        let gp = self.grad_psi(x);
        (self.hess_psi(x) / p - gp * gp.transpose() / (p * p)) * 2.0
    }
}

impl MetricProvider for Schwarzschild {
    fn name(&self) -> &str {
        "schwarzschild"
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![("m".into(), self.mass)]
    }
    fn domain(&self) -> Domain {
        Domain {
            inner: 0.25 * self.mass,
            validity_radius: 10.0 * self.mass,
        }
    }
    fn metric(&self, x: &Vec3) -> Mat3 {
        conformal_metric(self.exponent(x))
    }
    fn conformal(&self) -> Option<&dyn ConformalFactor> {
        Some(self)
    }
}

/// `u = η|x|²`.
#[derive(Clone, Debug)]
pub struct ConformalQuadratic {
    pub eta: f64,
}

impl ConformalFactor for ConformalQuadratic {
    fn exponent(&self, x: &Vec3) -> f64 {
        self.eta * x.norm_squared()
    }
    fn gradient(&self, x: &Vec3) -> Vec3 {
        x * (2.0 * self.eta)
    }
    fn hessian(&self, _x: &Vec3) -> Mat3 {
        Mat3::identity() * (2.0 * self.eta)
    }
}

impl MetricProvider for ConformalQuadratic {
    fn name(&self) -> &str {
        "conformal_quadratic"
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![("eta".into(), self.eta)]
    }
    fn domain(&self) -> Domain {
        Domain::ball(5.0)
    }
    fn metric(&self, x: &Vec3) -> Mat3 {
        conformal_metric(self.exponent(x))
    }
    fn conformal(&self) -> Option<&dyn ConformalFactor> {
        Some(self)
    }
}

/// `u = η exp(−|x|²/σ²)`.
#[derive(Clone, Debug)]
pub struct ConformalBump {
    pub eta: f64,
    pub sigma: f64,
}

impl ConformalFactor for ConformalBump {
    fn exponent(&self, x: &Vec3) -> f64 {
        self.eta * (-x.norm_squared() / (self.sigma * self.sigma)).exp()
    }
    fn gradient(&self, x: &Vec3) -> Vec3 {
        x * (-2.0 * self.exponent(x) / (self.sigma * self.sigma))
    }
    fn hessian(&self, x: &Vec3) -> Mat3 {
        let s2 = self.sigma * self.sigma;
        let u = self.exponent(x);
        (Mat3::identity() * (-2.0 / s2) + x * x.transpose() * (4.0 / (s2 * s2))) * u
    }
}

impl MetricProvider for ConformalBump {
    fn name(&self) -> &str {
        "conformal_bump"
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![("eta".into(), self.eta), ("sigma".into(), self.sigma)]
    }
    fn domain(&self) -> Domain {
        Domain::ball(5.0 * self.sigma)
    }
    fn metric(&self, x: &Vec3) -> Mat3 {
        conformal_metric(self.exponent(x))
    }
    fn conformal(&self) -> Option<&dyn ConformalFactor> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd_grad(c: &dyn ConformalFactor, x: &Vec3) -> Vec3 {
        let h = 1e-5;
        Vec3::from_fn(|i, _| {
            let mut e = Vec3::zeros();
            e[i] = h;
            (c.exponent(&(x + e)) - c.exponent(&(x - e))) / (2.0 * h)
        })
    }

    fn fd_hess(c: &dyn ConformalFactor, x: &Vec3) -> Mat3 {
        let h = 1e-5;
        let mut m = Mat3::zeros();
        for j in 0..3 {
            let mut e = Vec3::zeros();
            e[j] = h;
            m.set_column(
                j,
                &((c.gradient(&(x + e)) - c.gradient(&(x - e))) / (2.0 * h)),
            );
        }
        m
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        let x = Vec3::new(0.7, -0.4, 1.1);
        let cases: Vec<Box<dyn ConformalFactor>> = vec![
            Box::new(RoundS3 { radius: 1.3 }),
            Box::new(Schwarzschild { mass: 0.8 }),
            Box::new(ConformalQuadratic { eta: -0.02 }),
            Box::new(ConformalBump {
                eta: 0.1,
                sigma: 1.0,
            }),
        ];
        for c in &cases {
            assert_relative_eq!(c.gradient(&x), fd_grad(c.as_ref(), &x), epsilon = 1e-8);
            assert_relative_eq!(c.hessian(&x), fd_hess(c.as_ref(), &x), epsilon = 1e-8);
        }
    }

    #[test]
    fn schwarzschild_value() {
        let s = Schwarzschild { mass: 1.0 };
        let g = s.metric(&Vec3::new(2.0, 0.0, 0.0));
        assert_relative_eq!(g, Mat3::identity() * 2.44140625, epsilon = 1e-14);
    }

    #[test]
    fn round_s3_identity_at_origin() {
        let s = RoundS3 { radius: 1.0 };
        assert_eq!(s.metric(&Vec3::zeros()), Mat3::identity());
    }
}
