use super::{checked_metric, MetricProvider};
use crate::{Error, Mat3, Result, Vec3};

/// Christoffel symbols of the second kind, `gamma[a][(b, c)] = Γ^a_{bc}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Christoffel {
    pub gamma: [Mat3; 3],
}

impl Christoffel {
    pub fn zero() -> Self {
        Christoffel {
            gamma: [Mat3::zeros(); 3],
        }
    }

    /// `Γ^a_{bc} = δ^a_b w_c + δ^a_c w_b − δ_{bc} w_a` for `g = e^{2u}δ`, `w = ∇u`.
    /// With `w` a column of `Hess u` this is the matching partial derivative.
    pub fn conformal(w: &Vec3) -> Self {
        let mut gamma = [Mat3::zeros(); 3];
        for (a, ga) in gamma.iter_mut().enumerate() {
            for b in 0..3 {
                for c in 0..3 {
                    let mut v = 0.0;
                    if a == b {
                        v += w[c];
                    }
                    if a == c {
                        v += w[b];
                    }
                    if b == c {
                        v -= w[a];
                    }
                    ga[(b, c)] = v;
                }
            }
        }
        Christoffel { gamma }
    }

    /// `Γ(v, w)^a = Γ^a_{bc} v^b w^c`.
    #[inline]
    pub fn contract(&self, v: &Vec3, w: &Vec3) -> Vec3 {
        Vec3::new(
            v.dot(&(self.gamma[0] * w)),
            v.dot(&(self.gamma[1] * w)),
            v.dot(&(self.gamma[2] * w)),
        )
    }

    /// Symbols in the linear coordinates `x = x₀ + s F y`:
    /// `Γ̂^a_{bc} = s (F⁻¹)^a_d Γ^d_{ef} F^e_b F^f_c`.
    pub fn transform(&self, f: &Mat3, finv: &Mat3, s: f64) -> Self {
        let m = [
            f.transpose() * self.gamma[0] * f,
            f.transpose() * self.gamma[1] * f,
            f.transpose() * self.gamma[2] * f,
        ];
        let mut gamma = [Mat3::zeros(); 3];
        for (a, ga) in gamma.iter_mut().enumerate() {
            *ga = (m[0] * finv[(a, 0)] + m[1] * finv[(a, 1)] + m[2] * finv[(a, 2)]) * s;
        }
        Christoffel { gamma }
    }

    fn axpy(&mut self, alpha: f64, other: &Christoffel) {
        for a in 0..3 {
            self.gamma[a] += other.gamma[a] * alpha;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().map(|m| m.amax()).fold(0.0, f64::max)
    }
}

/// Metric value with coordinate derivatives up to some order.
///
/// `derivs[k - 1]` holds the `3^k` matrices `∂_{i₁}…∂_{i_k} g`, flattened with
/// `i₁` most significant.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub value: Mat3,
    pub derivs: Vec<Vec<Mat3>>,
}

impl MetricJet {
    pub fn order(&self) -> usize {
        self.derivs.len()
    }

    pub fn derivative(&self, idx: &[usize]) -> Mat3 {
        if idx.is_empty() {
            return self.value;
        }
        let flat = idx.iter().fold(0, |acc, &i| acc * 3 + i);
        self.derivs[idx.len() - 1][flat]
    }
}

const STENCIL: [(f64, f64); 4] = [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)];

/// Fourth-order central difference of a vector-space-valued function.
fn central<T, F>(x: &Vec3, k: usize, h: f64, mut f: F) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    F: FnMut(&Vec3) -> T,
{
    let mut acc: Option<T> = None;
    for (off, w) in STENCIL {
        let mut y = *x;
        y[k] += off * h;
        let term = f(&y) * (w / (12.0 * h));
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    acc.expect("stencil is non-empty")
}

fn conformal_derivs(provider: &dyn MetricProvider, x: &Vec3, order: usize) -> Option<Vec<Mat3>> {
    let c = provider.conformal()?;
    let e2u = (2.0 * c.exponent(x)).exp();
    match order {
        1 => {
            let du = c.gradient(x);
            Some(
                (0..3)
                    .map(|k| Mat3::identity() * (2.0 * du[k] * e2u))
                    .collect(),
            )
        }
        2 => {
            let du = c.gradient(x);
            let hu = c.hessian(x);
            Some(
                (0..9)
                    .map(|i| {
                        let (k, l) = (i / 3, i % 3);
                        Mat3::identity() * (e2u * (2.0 * hu[(k, l)] + 4.0 * du[k] * du[l]))
                    })
                    .collect(),
            )
        }
        _ => None,
    }
}

fn deriv_tensor(provider: &dyn MetricProvider, x: &Vec3, order: usize, h: f64) -> Vec<Mat3> {
    if order == 0 {
        return vec![provider.metric(x)];
    }
    if let Some(d) = conformal_derivs(provider, x, order) {
        return d;
    }
    let inner = 3usize.pow(order as u32 - 1);
    let mut out = vec![Mat3::zeros(); 3 * inner];
    for k in 0..3 {
        for (off, w) in STENCIL {
            let mut y = *x;
            y[k] += off * h;
            let lower = deriv_tensor(provider, &y, order - 1, h);
            for (j, m) in lower.iter().enumerate() {
                out[k * inner + j] += m * (w / (12.0 * h));
            }
        }
    }
    out
}

/// `g(x)` and its coordinate derivatives up to `order` (at most 4).
///
/// Conformal providers use closed forms through second order; everything
/// else is fourth-order central differencing with the provider's step.
pub fn eval_metric(provider: &dyn MetricProvider, x: &Vec3, order: usize) -> Result<MetricJet> {
    if order > 4 {
        return Err(Error::Configuration(format!(
            "metric derivative order must be at most 4, got {order}"
        )));
    }
    let value = checked_metric(provider, x)?;
    let h = provider.fd_step();
    let derivs = (1..=order)
        .map(|k| deriv_tensor(provider, x, k, h))
        .collect();
    Ok(MetricJet { value, derivs })
}

/// Christoffel symbols from a metric and its first derivatives.
fn from_first_derivatives(g: &Mat3, dg: &[Mat3]) -> Result<Christoffel> {
    let ginv = g
        .try_inverse()
        .ok_or_else(|| Error::Metric("singular metric".into()))?;
    // Γ_{dbc} = ½(∂_b g_{dc} + ∂_c g_{db} − ∂_d g_{bc})
    let mut lower = [Mat3::zeros(); 3];
    for (d, ld) in lower.iter_mut().enumerate() {
        for b in 0..3 {
            for c in 0..3 {
                ld[(b, c)] = 0.5 * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
            }
        }
    }
    let mut gamma = [Mat3::zeros(); 3];
    for (a, ga) in gamma.iter_mut().enumerate() {
        *ga = lower[0] * ginv[(a, 0)] + lower[1] * ginv[(a, 1)] + lower[2] * ginv[(a, 2)];
    }
    Ok(Christoffel { gamma })
}

/// Christoffel symbols by central differences of the metric with step `h`,
/// ignoring any closed form.
pub fn fd_christoffel(provider: &dyn MetricProvider, x: &Vec3, h: f64) -> Result<Christoffel> {
    let g = provider.metric(x);
    let dg: Vec<Mat3> = (0..3)
        .map(|k| central(x, k, h, |y| provider.metric(y)))
        .collect();
    from_first_derivatives(&g, &dg)
}

/// `Γ^a_{bc}(x)`; no domain check.
pub fn christoffel(provider: &dyn MetricProvider, x: &Vec3) -> Result<Christoffel> {
    match provider.conformal() {
        Some(c) => Ok(Christoffel::conformal(&c.gradient(x))),
        None => fd_christoffel(provider, x, provider.fd_step()),
    }
}

/// `∂_k Γ^a_{bc}(x)` for `k = 0, 1, 2`; no domain check.
pub fn christoffel_derivatives(
    provider: &dyn MetricProvider,
    x: &Vec3,
) -> Result<[Christoffel; 3]> {
    if let Some(c) = provider.conformal() {
        let hu = c.hessian(x);
        return Ok([
            Christoffel::conformal(&hu.column(0).into_owned()),
            Christoffel::conformal(&hu.column(1).into_owned()),
            Christoffel::conformal(&hu.column(2).into_owned()),
        ]);
    }
    fd_christoffel_derivatives(provider, x, provider.fd_step())
}

/// Nested central differences: `∂_k` of the difference-quotient symbols.
pub fn fd_christoffel_derivatives(
    provider: &dyn MetricProvider,
    x: &Vec3,
    h: f64,
) -> Result<[Christoffel; 3]> {
    let mut out = [Christoffel::zero(); 3];
    for (k, ok) in out.iter_mut().enumerate() {
        for (off, w) in STENCIL {
            let mut y = *x;
            y[k] += off * h;
            ok.axpy(w / (12.0 * h), &fd_christoffel(provider, &y, h)?);
        }
    }
    Ok(out)
}

/// `Γ(v, w)` at `x`.
pub fn christoffel_contract(
    provider: &dyn MetricProvider,
    x: &Vec3,
    v: &Vec3,
    w: &Vec3,
) -> Result<Vec3> {
    if let Some(c) = provider.conformal() {
        let du = c.gradient(x);
        return Ok(v * du.dot(w) + w * du.dot(v) - du * v.dot(w));
    }
    Ok(christoffel(provider, x)?.contract(v, w))
}

/// Directional derivative `(∂_d Γ)(a, b)` at `x`.
pub fn christoffel_derivative_contract(
    provider: &dyn MetricProvider,
    x: &Vec3,
    d: &Vec3,
    a: &Vec3,
    b: &Vec3,
) -> Result<Vec3> {
    if let Some(c) = provider.conformal() {
        let hd = c.hessian(x) * d;
        return Ok(a * hd.dot(b) + b * hd.dot(a) - hd * a.dot(b));
    }
    let dg = christoffel_derivatives(provider, x)?;
    Ok((0..3).fold(Vec3::zeros(), |acc, k| acc + dg[k].contract(a, b) * d[k]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{ConformalBump, Euclidean, RoundS3, Schwarzschild};
    use approx::assert_relative_eq;

    #[test]
    fn euclidean_jet_is_flat() {
        let jet = eval_metric(&Euclidean, &Vec3::new(1.0, 2.0, -0.5), 4).unwrap();
        assert_eq!(jet.value, Mat3::identity());
        for d in &jet.derivs {
            assert!(d.iter().all(|m| m.amax() == 0.0));
        }
        assert_eq!(jet.derivs[3].len(), 81);
    }

    #[test]
    fn closed_form_matches_differences() {
        let p = ConformalBump {
            eta: 0.1,
            sigma: 1.0,
        };
        let x = Vec3::new(0.3, -0.2, 0.5);
        let closed = christoffel(&p, &x).unwrap();
        let fd = fd_christoffel(&p, &x, 1e-3).unwrap();
        for a in 0..3 {
            assert_relative_eq!(closed.gamma[a], fd.gamma[a], epsilon = 1e-9);
        }
        let dc = christoffel_derivatives(&p, &x).unwrap();
        let dfd = fd_christoffel_derivatives(&p, &x, 1e-3).unwrap();
        for k in 0..3 {
            for a in 0..3 {
                assert_relative_eq!(dc[k].gamma[a], dfd[k].gamma[a], epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn higher_order_jet_matches_closed_form() {
        let p = Schwarzschild { mass: 1.0 };
        let x = Vec3::new(2.0, 0.4, -0.3);
        let jet = eval_metric(&p, &x, 3).unwrap();
        let h = 1e-4;
        let mut e = Vec3::zeros();
        e[1] = h;
        let fd = (eval_metric(&p, &(x + e), 2).unwrap().derivative(&[0, 2])
            - eval_metric(&p, &(x - e), 2).unwrap().derivative(&[0, 2]))
            / (2.0 * h);
        assert_relative_eq!(jet.derivative(&[1, 0, 2]), fd, epsilon = 1e-6);
    }

    #[test]
    fn order_limit_and_domain() {
        let p = RoundS3 { radius: 1.0 };
        assert!(eval_metric(&p, &Vec3::zeros(), 5).is_err());
        assert!(matches!(
            eval_metric(&p, &Vec3::new(5.0, 0.0, 0.0), 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn transform_identity_frame() {
        let c = Christoffel::conformal(&Vec3::new(0.1, 0.2, 0.3));
        let t = c.transform(&Mat3::identity(), &Mat3::identity(), 2.0);
        for a in 0..3 {
            assert_relative_eq!(t.gamma[a], c.gamma[a] * 2.0, epsilon = 1e-15);
        }
    }
}
