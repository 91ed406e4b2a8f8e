use super::connection::{christoffel, fd_christoffel, fd_christoffel_derivatives, Christoffel};
use super::{checked_metric, MetricProvider};
use crate::{Error, Mat3, Result, Vec3};

/// Fully covariant Riemann tensor `R_{abcd}`.
pub type Riemann = [[[[f64; 3]; 3]; 3]; 3];

/// Curvature data at a single chart point.
#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    pub metric: Mat3,
    pub christoffel: Christoffel,
    pub riemann: Riemann,
    pub ricci: Mat3,
    pub scalar: f64,
    pub einstein: Mat3,
    pub grad_scalar: Vec3,
    pub hess_scalar: Mat3,
    /// Relative disagreement between closed-form and difference routes,
    /// when both were computed.
    pub route_deviation: Option<f64>,
}

impl CurvatureBundle {
    pub fn riemann_norm(&self) -> f64 {
        riemann_norm(&self.riemann)
    }

    /// Largest of the antisymmetry, pair-symmetry, first Bianchi and trace
    /// residuals, relative to the tensor norms.
    pub fn symmetry_residual(&self) -> f64 {
        symmetry_residual(&self.riemann, &self.ricci, self.scalar, &self.metric)
    }
}

fn riemann_norm(r: &Riemann) -> f64 {
    r.iter()
        .flatten()
        .flatten()
        .flatten()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

fn symmetry_residual(r: &Riemann, ric: &Mat3, sc: f64, g: &Mat3) -> f64 {
    let scale = riemann_norm(r).max(1e-300);
    let mut worst: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let v = r[a][b][c][d];
                    worst = worst
                        .max((v + r[b][a][c][d]).abs())
                        .max((v + r[a][b][d][c]).abs())
                        .max((v - r[c][d][a][b]).abs())
                        .max((v + r[a][c][d][b] + r[a][d][b][c]).abs());
                }
            }
        }
    }
    let ginv = g.try_inverse().unwrap_or_else(Mat3::identity);
    let contracted = contract_riemann(r, &ginv);
    let ric_res = (contracted - ric).amax() / ric.amax().max(scale).max(1e-300);
    let sc_res = ((ginv.component_mul(ric)).sum() - sc).abs() / sc.abs().max(scale).max(1e-300);
    (worst / scale).max(ric_res).max(sc_res)
}

/// `Ric_{bd} = g^{ac} R_{abcd}`.
fn contract_riemann(r: &Riemann, ginv: &Mat3) -> Mat3 {
    Mat3::from_fn(|b, d| {
        let mut s = 0.0;
        for a in 0..3 {
            for c in 0..3 {
                s += ginv[(a, c)] * r[a][b][c][d];
            }
        }
        s
    })
}

/// Kulkarni–Nomizu form valid in dimension three:
/// `R = P ⊙ g` with Schouten tensor `P = Ric − (Sc/4) g`.
fn riemann_from_ricci(ric: &Mat3, sc: f64, g: &Mat3) -> Riemann {
    let p = ric - g * (sc / 4.0);
    let mut r = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    r[a][b][c][d] = p[(a, c)] * g[(b, d)] + p[(b, d)] * g[(a, c)]
                        - p[(a, d)] * g[(b, c)]
                        - p[(b, c)] * g[(a, d)];
                }
            }
        }
    }
    r
}

/// Riemann from the connection:
/// `R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}`.
fn riemann_from_connection(g: &Mat3, gam: &Christoffel, dgam: &[Christoffel; 3]) -> Riemann {
    let mut up = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let mut v = dgam[c].gamma[a][(d, b)] - dgam[d].gamma[a][(c, b)];
                    for e in 0..3 {
                        v += gam.gamma[a][(c, e)] * gam.gamma[e][(d, b)]
                            - gam.gamma[a][(d, e)] * gam.gamma[e][(c, b)];
                    }
                    up[a][b][c][d] = v;
                }
            }
        }
    }
    let mut r = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    r[a][b][c][d] = (0..3).map(|e| g[(a, e)] * up[e][b][c][d]).sum();
                }
            }
        }
    }
    r
}

/// Riemann, Ricci and scalar curvature from nested central differences of
/// the metric, ignoring any closed form.
pub fn curvature_fd(provider: &dyn MetricProvider, x: &Vec3) -> Result<(Riemann, Mat3, f64)> {
    let g = checked_metric(provider, x)?;
    let h = provider.fd_step();
    let gam = fd_christoffel(provider, x, h)?;
    let dgam = fd_christoffel_derivatives(provider, x, h)?;
    let r = riemann_from_connection(&g, &gam, &dgam);
    let ginv = g
        .try_inverse()
        .ok_or_else(|| Error::Metric("singular metric".into()))?;
    let ric = contract_riemann(&r, &ginv);
    let ric = (ric + ric.transpose()) * 0.5;
    let sc = ginv.component_mul(&ric).sum();
    Ok((r, ric, sc))
}

/// `Ric_{ab}(x)`; closed form for conformal providers.
pub fn ricci(provider: &dyn MetricProvider, x: &Vec3) -> Result<Mat3> {
    match provider.conformal() {
        Some(c) => {
            let du = c.gradient(x);
            let hu = c.hessian(x);
            Ok(-(hu - du * du.transpose()) - Mat3::identity() * (hu.trace() + du.norm_squared()))
        }
        None => Ok(curvature_fd(provider, x)?.1),
    }
}

/// `Sc(x)`; closed form `e^{−2u}(−4Δu − 2|∇u|²)` for conformal providers.
pub fn scalar_curvature(provider: &dyn MetricProvider, x: &Vec3) -> Result<f64> {
    match provider.conformal() {
        Some(c) => {
            let du = c.gradient(x);
            let lap = c.hessian(x).trace();
            Ok((-2.0 * c.exponent(x)).exp() * (-4.0 * lap - 2.0 * du.norm_squared()))
        }
        None => Ok(curvature_fd(provider, x)?.2),
    }
}

fn shifted(x: &Vec3, k: usize, t: f64) -> Vec3 {
    let mut y = *x;
    y[k] += t;
    y
}

/// `∇Sc(x)` by fourth-order central differences.
pub fn scalar_gradient(provider: &dyn MetricProvider, x: &Vec3) -> Result<Vec3> {
    let h = provider.fd_step();
    let mut g = Vec3::zeros();
    for k in 0..3 {
        let f = |t: f64| scalar_curvature(provider, &shifted(x, k, t));
        g[k] = (-f(2.0 * h)? + 8.0 * f(h)? - 8.0 * f(-h)? + f(-2.0 * h)?) / (12.0 * h);
    }
    Ok(g)
}

/// `Hess Sc(x)` (coordinate second derivatives) by fourth-order central differences.
pub fn scalar_hessian(provider: &dyn MetricProvider, x: &Vec3) -> Result<Mat3> {
    let h = provider.fd_step();
    let f0 = scalar_curvature(provider, x)?;
    let mut m = Mat3::zeros();
    for k in 0..3 {
        let f = |t: f64| scalar_curvature(provider, &shifted(x, k, t));
        m[(k, k)] = (-f(2.0 * h)? + 16.0 * f(h)? - 30.0 * f0 + 16.0 * f(-h)? - f(-2.0 * h)?)
            / (12.0 * h * h);
    }
    const W: [(f64, f64); 4] = [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)];
    for k in 0..3 {
        for l in (k + 1)..3 {
            let mut s = 0.0;
            for (ok, wk) in W {
                for (ol, wl) in W {
                    let y = shifted(&shifted(x, k, ok * h), l, ol * h);
                    s += wk * wl * scalar_curvature(provider, &y)?;
                }
            }
            m[(k, l)] = s / (144.0 * h * h);
            m[(l, k)] = m[(k, l)];
        }
    }
    Ok(m)
}

const SYMMETRY_TOL: f64 = 1e-8;
const ROUTE_TOL: f64 = 1e-5;

/// All curvature tensors at `x`. Conformal providers are evaluated in closed
/// form and cross-checked against the difference route.
pub fn curvature_bundle(provider: &dyn MetricProvider, x: &Vec3) -> Result<CurvatureBundle> {
    let g = checked_metric(provider, x)?;
    let gam = christoffel(provider, x)?;
    let (riemann, ric, sc, route_deviation) = if provider.conformal().is_some() {
        let ric = ricci(provider, x)?;
        let sc = scalar_curvature(provider, x)?;
        let r = riemann_from_ricci(&ric, sc, &g);
        let (rfd, _, scfd) = curvature_fd(provider, x)?;
        let mut diff: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        diff = diff.max((r[a][b][c][d] - rfd[a][b][c][d]).abs());
                    }
                }
            }
        }
        let scale = riemann_norm(&r).max(1.0);
        let dev = (diff / scale).max((sc - scfd).abs() / sc.abs().max(1.0));
        if dev > ROUTE_TOL {
            return Err(Error::NumericalDifferentiation(format!(
                "closed-form and difference curvature disagree by {dev:.3e} at {x:?}"
            )));
        }
        (r, ric, sc, Some(dev))
    } else {
        let (r, ric, sc) = curvature_fd(provider, x)?;
        (r, ric, sc, None)
    };
    let residual = symmetry_residual(&riemann, &ric, sc, &g);
    let norm = riemann_norm(&riemann);
    // Below this norm the tensor is zero to working precision.
    if norm > 1e-10 && residual > SYMMETRY_TOL {
        return Err(Error::NumericalDifferentiation(format!(
            "Riemann symmetry residual {residual:.3e} exceeds {SYMMETRY_TOL:.0e} (|R| = {norm:.3e})"
        )));
    }
    Ok(CurvatureBundle {
        metric: g,
        christoffel: gam,
        riemann,
        ricci: ric,
        scalar: sc,
        einstein: ric - g * (0.5 * sc),
        grad_scalar: scalar_gradient(provider, x)?,
        hess_scalar: scalar_hessian(provider, x)?,
        route_deviation,
    })
}
