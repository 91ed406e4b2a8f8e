use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::Serialize;

use crate::metric::{checked_metric, scalar_gradient, scalar_hessian, ChartPoint, MetricProvider};
use crate::reduction::{ReducedFunctional, ReducedSample};
use crate::spectral::SpectralField;
use crate::{Error, Mat3, Result, Vec3};

/// Search settings for [`find_critical_point`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    /// Absolute bound on `‖∇Φ_ε‖`; `None` means `10⁻⁸ ε²`.
    pub tol: Option<f64>,
    pub max_iter: usize,
    /// Hessian difference step relative to `ε`.
    pub hessian_step: f64,
    /// Condition number above which the landscape is degenerate.
    pub max_condition: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            tol: None,
            max_iter: 30,
            hessian_step: 1e-2,
            max_condition: 1e8,
        }
    }
}

impl SearchOptions {
    pub fn tolerance(&self, eps: f64) -> f64 {
        self.tol.unwrap_or(1e-8 * eps * eps)
    }
}

/// A critical point `P_ε` of the reduced functional.
#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub p_eps: ChartPoint,
    pub eps: f64,
    pub grad_norm: f64,
    pub hessian: Mat3,
    /// Eigenvalues of `hessian`, ascending.
    pub eigenvalues: [f64; 3],
    /// Number of negative eigenvalues.
    pub index: usize,
    pub betas: [f64; 4],
    pub iterations: usize,
    pub trajectory: Vec<[f64; 3]>,
    pub sample: ReducedSample,
}

impl CriticalPoint {
    pub fn value(&self) -> f64 {
        self.sample.value
    }

    pub fn phi(&self) -> &SpectralField {
        &self.sample.correction.phi
    }
}

fn ascending(m: &Mat3) -> [f64; 3] {
    let mut e: Vec<f64> = SymmetricEigen::new(*m)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    e.sort_by(|a, b| a.total_cmp(b));
    [e[0], e[1], e[2]]
}

/// Symmetrised central difference of the translation-field gradient with
/// step `δ = step·ε`.
pub fn reduced_hessian(
    f: &ReducedFunctional,
    eps: f64,
    p: ChartPoint,
    warm: Option<&SpectralField>,
    step: f64,
) -> Result<Mat3> {
    let d = step * eps;
    let grads: Vec<[f64; 3]> = (0..6)
        .into_par_iter()
        .map(|k| {
            let mut x = p.0;
            x[k / 2] += if k % 2 == 0 { d } else { -d };
            Ok(f.sample(eps, ChartPoint(x), warm)?.grad)
        })
        .collect::<Result<_>>()?;
    let h = Mat3::from_fn(|i, j| (grads[2 * j][i] - grads[2 * j + 1][i]) / (2.0 * d));
    Ok((h + h.transpose()) * 0.5)
}

/// Rejects Hessians that cannot support a Newton step: below the scale
/// floor `10⁻⁶ ε²` or with condition number above the limit.
fn check_hessian(h: &Mat3, eps: f64, max_condition: f64) -> Result<[f64; 3]> {
    let ev = ascending(h);
    let big = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let small = ev.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if big <= 1e-6 * eps * eps {
        return Err(Error::DegenerateLandscape(format!(
            "Hessian of Φ_ε vanishes to noise level (max |λ| = {big:.3e})"
        )));
    }
    if big > max_condition * small {
        return Err(Error::DegenerateLandscape(format!(
            "Hessian condition number {:.3e} exceeds {max_condition:.1e}",
            big / small
        )));
    }
    Ok(ev)
}

/// Newton iteration on `∇Φ_ε` with a finite-difference Hessian, refreshed
/// whenever a step fails to halve the gradient. Steps are capped at half the
/// provider's validity radius.
pub fn find_critical_point(
    f: &ReducedFunctional,
    eps: f64,
    start: ChartPoint,
    options: &SearchOptions,
) -> Result<CriticalPoint> {
    let provider = f.provider().clone();
    let cap = 0.5 * provider.validity_radius();
    let tol = options.tolerance(eps);
    let mut p = start.validated(provider.as_ref())?;
    let mut trajectory = vec![p.to_array()];
    let mut s = f.sample(eps, p, None)?;
    let mut hess: Option<Mat3> = None;
    let mut last_norm = f64::INFINITY;
    for it in 0..=options.max_iter {
        let gn = s.grad_norm();
        let stale = gn > 0.5 * last_norm;
        if gn <= tol || hess.is_none() || stale {
            let h = reduced_hessian(f, eps, p, Some(&s.correction.phi), options.hessian_step)?;
            let ev = check_hessian(&h, eps, options.max_condition)?;
            if gn <= tol {
                return Ok(CriticalPoint {
                    p_eps: p,
                    eps,
                    grad_norm: gn,
                    hessian: h,
                    eigenvalues: ev,
                    index: ev.iter().filter(|v| **v < 0.0).count(),
                    betas: s.betas,
                    iterations: it,
                    trajectory,
                    sample: s,
                });
            }
            hess = Some(h);
        }
        if it == options.max_iter {
            break;
        }
        let h = hess.expect("Hessian set above");
        let g = Vec3::from(s.grad);
        let mut step = -(h
            .try_inverse()
            .ok_or_else(|| Error::DegenerateLandscape("singular Hessian of Φ_ε".into()))?
            * g);
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        let mut next = ChartPoint(p.0 + step);
        while !provider.domain().contains(&next.0) {
            step *= 0.5;
            if step.norm() < 1e-14 {
                return Err(Error::Search {
                    reason: "Newton step leaves the chart".into(),
                    trajectory,
                });
            }
            next = ChartPoint(p.0 + step);
        }
        last_norm = gn;
        p = next;
        trajectory.push(p.to_array());
        s = f.sample(eps, p, Some(&s.correction.phi))?;
    }
    Err(Error::Search {
        reason: format!(
            "‖∇Φ_ε‖ = {:.3e} above {tol:.3e} after {} iterations",
            s.grad_norm(),
            options.max_iter
        ),
        trajectory,
    })
}

/// Newton iteration on `∇Sc` from closed-form or finite-difference
/// derivatives.
pub fn scalar_critical_point(
    provider: &dyn MetricProvider,
    start: ChartPoint,
) -> Result<ChartPoint> {
    let mut p = start.validated(provider)?;
    let scale = provider.validity_radius();
    let mut last = f64::INFINITY;
    for _ in 0..50 {
        let g = scalar_gradient(provider, &p.0)?;
        let h = scalar_hessian(provider, &p.0)?;
        let step = -(h
            .try_inverse()
            .ok_or_else(|| Error::DegenerateLandscape("singular Hessian of Sc".into()))?
            * g);
        p = ChartPoint(p.0 + step).validated(provider)?;
        let n = step.norm();
        // difference noise in ∇Sc stops the steps from shrinking further
        if n <= 1e-13 * scale || (n <= 1e-8 * scale && n >= 0.5 * last) {
            return Ok(p);
        }
        last = n;
    }
    Err(Error::Search {
        reason: "no critical point of Sc".into(),
        trajectory: vec![p.to_array()],
    })
}

/// Eigenvalue signs of `Hess Φ_ε(P_ε)` against those of
/// `−(8π/3) ε² Hess Sc(P₀)`.
#[derive(Clone, Debug, Serialize)]
pub struct IndexReport {
    pub phi_eigenvalues: [f64; 3],
    pub model_eigenvalues: [f64; 3],
    /// Negative eigenvalues of `Hess Φ_ε`, i.e. the Willmore index `k`.
    pub willmore_index: usize,
    /// Negative eigenvalues of `Hess Sc(P₀)`.
    pub sc_index: usize,
    pub inconclusive: bool,
    pub matches: bool,
}

fn signs(ev: &[f64; 3], band: f64) -> ([i8; 3], bool) {
    let norm = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut weak = norm == 0.0;
    let s = ev.map(|v| {
        if v.abs() < band * norm {
            weak = true;
        }
        if v < 0.0 {
            -1
        } else {
            1
        }
    });
    (s, weak)
}

pub fn hessian_index(hess_phi: &Mat3, hess_sc: &Mat3, eps: f64) -> IndexReport {
    let model = hess_sc * (-8.0 * std::f64::consts::PI / 3.0 * eps * eps);
    let pe = ascending(hess_phi);
    let me = ascending(&model);
    let (ps, pw) = signs(&pe, 1e-3);
    let (ms, mw) = signs(&me, 1e-3);
    let sc_index = ascending(hess_sc).iter().filter(|v| **v < 0.0).count();
    IndexReport {
        phi_eigenvalues: pe,
        model_eigenvalues: me,
        willmore_index: pe.iter().filter(|v| **v < 0.0).count(),
        sc_index,
        inconclusive: pw || mw,
        matches: !(pw || mw) && ps == ms,
    }
}

/// `|a|_{g(x)}` for a coordinate displacement `a` at `x`.
pub fn metric_norm(provider: &dyn MetricProvider, x: &Vec3, a: &Vec3) -> Result<f64> {
    let g = checked_metric(provider, x)?;
    Ok(a.dot(&(g * a)).sqrt())
}
