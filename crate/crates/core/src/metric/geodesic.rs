use super::connection::{christoffel, christoffel_contract, christoffel_derivatives, Christoffel};
use super::{checked_metric, cholesky_frame, ChartPoint, MetricProvider};
use crate::{Error, Mat3, Result, Vec3};

pub const DEFAULT_GEODESIC_STEPS: usize = 256;

/// Coordinates in which geodesics are integrated.
pub trait GeodesicSystem {
    /// Fails with a domain error when `y` leaves the chart.
    fn check(&self, y: &Vec3) -> Result<()>;
    fn metric(&self, y: &Vec3) -> Result<Mat3>;
    fn connection(&self, y: &Vec3) -> Result<Christoffel>;
    /// `∂_k Γ` at `y`.
    fn connection_derivatives(&self, y: &Vec3) -> Result<[Christoffel; 3]>;

    /// `Γ(y)(v, v)`.
    fn gamma_vv(&self, y: &Vec3, v: &Vec3) -> Result<Vec3> {
        Ok(self.connection(y)?.contract(v, v))
    }
}

/// Geodesics of the provider metric in background chart coordinates.
pub struct AmbientGeodesics<'a> {
    pub provider: &'a dyn MetricProvider,
}

impl GeodesicSystem for AmbientGeodesics<'_> {
    fn check(&self, y: &Vec3) -> Result<()> {
        self.provider.domain().check(y).map_err(|_| {
            Error::Domain(format!(
                "geodesic exits chart at ({:.6}, {:.6}, {:.6})",
                y.x, y.y, y.z
            ))
        })
    }
    fn metric(&self, y: &Vec3) -> Result<Mat3> {
        checked_metric(self.provider, y)
    }
    fn connection(&self, y: &Vec3) -> Result<Christoffel> {
        christoffel(self.provider, y)
    }
    fn connection_derivatives(&self, y: &Vec3) -> Result<[Christoffel; 3]> {
        christoffel_derivatives(self.provider, y)
    }
    fn gamma_vv(&self, y: &Vec3, v: &Vec3) -> Result<Vec3> {
        christoffel_contract(self.provider, y, v, v)
    }
}

fn finite(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

fn validate_steps(steps: usize, t_end: f64) -> Result<f64> {
    if steps == 0 {
        return Err(Error::Integrator("step count must be positive".into()));
    }
    let dt = t_end / steps as f64;
    if dt < 1e-12 {
        return Err(Error::Integrator(format!("step size {dt:.3e} underflows")));
    }
    Ok(dt)
}

/// Unit-time geodesic from `y0` with velocity `v0` by classical RK4 with a
/// fixed step. Returns the endpoint and final velocity.
pub fn integrate(
    sys: &dyn GeodesicSystem,
    y0: &Vec3,
    v0: &Vec3,
    steps: usize,
) -> Result<(Vec3, Vec3)> {
    integrate_for(sys, y0, v0, 1.0, steps)
}

/// As [`integrate`], up to time `t_end`.
pub fn integrate_for(
    sys: &dyn GeodesicSystem,
    y0: &Vec3,
    v0: &Vec3,
    t_end: f64,
    steps: usize,
) -> Result<(Vec3, Vec3)> {
    let dt = validate_steps(steps, t_end)?;
    let mut y = *y0;
    let mut v = *v0;
    for _ in 0..steps {
        let k1y = v;
        let k1v = -sys.gamma_vv(&y, &v)?;
        let y2 = y + k1y * (0.5 * dt);
        let v2 = v + k1v * (0.5 * dt);
        sys.check(&y2)?;
        let k2v = -sys.gamma_vv(&y2, &v2)?;
        let y3 = y + v2 * (0.5 * dt);
        let v3 = v + k2v * (0.5 * dt);
        sys.check(&y3)?;
        let k3v = -sys.gamma_vv(&y3, &v3)?;
        let y4 = y + v3 * dt;
        let v4 = v + k3v * dt;
        sys.check(&y4)?;
        let k4v = -sys.gamma_vv(&y4, &v4)?;
        y += (k1y + v2 * 2.0 + v3 * 2.0 + v4) * (dt / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
        if !finite(&y) || !finite(&v) {
            return Err(Error::Integrator("non-finite geodesic state".into()));
        }
        sys.check(&y)?;
    }
    Ok((y, v))
}

/// Deviation `w(1) = y(1) − v₀` of the unit-time geodesic from the origin,
/// integrated directly as `w'' = −Γ(tv₀ + w)(v₀ + w', v₀ + w')` so that its
/// roundoff scales with `|w|` rather than `|y|`.
pub fn integrate_deviation(sys: &dyn GeodesicSystem, v0: &Vec3, steps: usize) -> Result<Vec3> {
    let dt = validate_steps(steps, 1.0)?;
    let accel = |t: f64, w: &Vec3, u: &Vec3| -> Result<Vec3> {
        let y = v0 * t + w;
        sys.check(&y)?;
        Ok(-sys.gamma_vv(&y, &(v0 + u))?)
    };
    let mut w = Vec3::zeros();
    let mut u = Vec3::zeros();
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = accel(t, &w, &u)?;
        let w2 = w + u * (0.5 * dt);
        let u2 = u + k1 * (0.5 * dt);
        let k2 = accel(t + 0.5 * dt, &w2, &u2)?;
        let w3 = w + u2 * (0.5 * dt);
        let u3 = u + k2 * (0.5 * dt);
        let k3 = accel(t + 0.5 * dt, &w3, &u3)?;
        let w4 = w + u3 * dt;
        let u4 = u + k3 * dt;
        let k4 = accel(t + dt, &w4, &u4)?;
        w += (u + u2 * 2.0 + u3 * 2.0 + u4) * (dt / 6.0);
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        if !finite(&w) || !finite(&u) {
            return Err(Error::Integrator("non-finite geodesic state".into()));
        }
    }
    sys.check(&(v0 + w))?;
    Ok(w)
}

/// Endpoint data of a unit-time geodesic.
#[derive(Clone, Debug)]
pub struct ExpMapResult {
    pub point: Vec3,
    pub velocity: Vec3,
    /// `∂y(1)/∂v(0)`, from the Jacobi system.
    pub jacobian: Mat3,
    /// Largest relative change of `g(γ', γ')` over the step endpoints.
    pub speed_drift: f64,
}

#[derive(Clone, Copy)]
struct State {
    y: Vec3,
    v: Vec3,
    j: Mat3,
    k: Mat3,
}

impl State {
    fn add(&self, d: &State, s: f64) -> State {
        State {
            y: self.y + d.y * s,
            v: self.v + d.v * s,
            j: self.j + d.j * s,
            k: self.k + d.k * s,
        }
    }
}

fn jacobi_rhs(sys: &dyn GeodesicSystem, s: &State) -> Result<State> {
    sys.check(&s.y)?;
    let gam = sys.connection(&s.y)?;
    let dgam = sys.connection_derivatives(&s.y)?;
    let dv = -gam.contract(&s.v, &s.v);
    let dgvv = [
        dgam[0].contract(&s.v, &s.v),
        dgam[1].contract(&s.v, &s.v),
        dgam[2].contract(&s.v, &s.v),
    ];
    let mut dk = Mat3::zeros();
    for c in 0..3 {
        let jc = s.j.column(c);
        let kc = s.k.column(c).into_owned();
        let col =
            -(dgvv[0] * jc[0] + dgvv[1] * jc[1] + dgvv[2] * jc[2]) - gam.contract(&s.v, &kc) * 2.0;
        dk.set_column(c, &col);
    }
    Ok(State {
        y: s.v,
        v: dv,
        j: s.k,
        k: dk,
    })
}

/// Geodesic together with its first-variation (Jacobi) system
/// `J'' = −∂Γ[J](v, v) − 2Γ(v, J')`, `J(0) = 0`, `J'(0) = I`, in lockstep.
pub fn integrate_with_jacobi(
    sys: &dyn GeodesicSystem,
    y0: &Vec3,
    v0: &Vec3,
    steps: usize,
) -> Result<ExpMapResult> {
    let dt = validate_steps(steps, 1.0)?;
    let speed = |y: &Vec3, v: &Vec3| -> Result<f64> { Ok(v.dot(&(sys.metric(y)? * v))) };
    let s0 = speed(y0, v0)?;
    let mut drift: f64 = 0.0;
    let mut s = State {
        y: *y0,
        v: *v0,
        j: Mat3::zeros(),
        k: Mat3::identity(),
    };
    for _ in 0..steps {
        let k1 = jacobi_rhs(sys, &s)?;
        let k2 = jacobi_rhs(sys, &s.add(&k1, 0.5 * dt))?;
        let k3 = jacobi_rhs(sys, &s.add(&k2, 0.5 * dt))?;
        let k4 = jacobi_rhs(sys, &s.add(&k3, dt))?;
        s = s
            .add(&k1, dt / 6.0)
            .add(&k2, dt / 3.0)
            .add(&k3, dt / 3.0)
            .add(&k4, dt / 6.0);
        if !finite(&s.y) || !finite(&s.v) || !s.j.iter().all(|c| c.is_finite()) {
            return Err(Error::Integrator("non-finite geodesic state".into()));
        }
        sys.check(&s.y)?;
        if s0 > 0.0 {
            drift = drift.max((speed(&s.y, &s.v)? - s0).abs() / s0);
        }
    }
    Ok(ExpMapResult {
        point: s.y,
        velocity: s.v,
        jacobian: s.j,
        speed_drift: drift,
    })
}

/// `exp_P(v)` with `v` given in the Cholesky orthonormal frame at `P`.
/// The returned Jacobian is `D_v exp` with respect to frame components.
pub fn exp_map(
    provider: &dyn MetricProvider,
    p: &ChartPoint,
    v: &Vec3,
    steps: usize,
) -> Result<ExpMapResult> {
    let p = p.validated(provider)?;
    let f = cholesky_frame(provider, &p.0)?;
    if v.norm() == 0.0 || provider.is_flat() {
        provider.domain().check(&(p.0 + f * v))?;
        return Ok(ExpMapResult {
            point: p.0 + f * v,
            velocity: f * v,
            jacobian: f,
            speed_drift: 0.0,
        });
    }
    let sys = AmbientGeodesics { provider };
    let mut out = integrate_with_jacobi(&sys, &p.0, &(f * v), steps)?;
    out.jacobian *= f;
    Ok(out)
}
