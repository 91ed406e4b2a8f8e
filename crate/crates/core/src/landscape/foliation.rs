use std::f64::consts::PI;

use serde::Serialize;

use super::critical::{
    find_critical_point, metric_norm, scalar_critical_point, CriticalPoint, SearchOptions,
};
use crate::fit::{fit_power_law, SlopeFit};
use crate::metric::{checked_metric, ChartPoint};
use crate::reduction::ReducedFunctional;
use crate::spectral::SpectralField;
use crate::surface::hawking_mass;
use crate::{Error, Result, Vec3};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FoliationOptions {
    pub search: SearchOptions,
    /// Keep every leaf centred at the starting point instead of searching
    /// for `P_ε` (for landscapes without isolated critical points).
    pub pin_center: bool,
}

/// One solved leaf `Σ_ε`.
#[derive(Clone, Debug)]
pub struct FoliationLeaf {
    pub eps: f64,
    pub p_eps: ChartPoint,
    /// `Φ_ε(P_ε)`.
    pub value: f64,
    pub betas: [f64; 4],
    pub grad_norm: f64,
    /// Absent for pinned leaves.
    pub critical: Option<CriticalPoint>,
    pub phi: SpectralField,
    pub hawking: f64,
    /// `|P_ε − P₀|` in `g(P₀)`.
    pub center_drift: f64,
    /// Background coordinates of the leaf at the grid nodes.
    pub surface: Vec<Vec3>,
    /// `g(N, ·)` for the `g`-unit outward normal `N`.
    pub normal_covector: Vec<Vec3>,
    /// `|area_{g_ε} − 4π|`.
    pub area_residual: f64,
    /// `max_i |⟨Y_i, φ⟩|` over the translation directions.
    pub orthogonality: f64,
}

impl FoliationLeaf {
    pub fn index(&self) -> Option<usize> {
        self.critical.as_ref().map(|c| c.index)
    }

    pub fn phi_sup(&self) -> f64 {
        self.phi.sup_norm()
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub p0: ChartPoint,
    pub leaves: Vec<FoliationLeaf>,
    /// Why the sweep stopped early, if it did.
    pub truncated: Option<String>,
}

fn leaf(
    f: &ReducedFunctional,
    eps: f64,
    start: ChartPoint,
    p0: ChartPoint,
    options: &FoliationOptions,
) -> Result<FoliationLeaf> {
    let provider = f.provider().clone();
    let (p, critical, correction, grad_norm) = if options.pin_center {
        let c = f.correction(eps, start, None)?;
        (start, None, c, 0.0)
    } else {
        let cp = find_critical_point(f, eps, start, &options.search)?;
        let c = cp.sample.correction.clone();
        (cp.p_eps, Some(cp.clone()), c, cp.grad_norm)
    };
    let chart = f.chart(eps, p)?;
    let finv_t = chart.frame_inv().transpose();
    let surface = correction
        .positions
        .iter()
        .map(|y| chart.to_background(y))
        .collect();
    let normal_covector = correction
        .geometry
        .nodes
        .iter()
        .map(|n| finv_t * (n.ambient * n.normal))
        .collect();
    Ok(FoliationLeaf {
        eps,
        p_eps: p,
        value: correction.energy,
        betas: correction.betas,
        grad_norm,
        critical,
        hawking: hawking_mass(correction.energy, 4.0 * PI * eps * eps)?,
        area_residual: (correction.area_in_g_eps - 4.0 * PI).abs(),
        orthogonality: correction
            .orthogonality
            .iter()
            .fold(0.0, |a, o| a.max(o.abs())),
        center_drift: metric_norm(provider.as_ref(), &p0.0, &(p.0 - p0.0))?,
        phi: correction.phi,
        surface,
        normal_covector,
    })
}

/// Leaves over a decreasing grid of scales, each search warm-started from
/// the previous `P_ε`. `P₀` is the critical point of `Sc` nearest `start`
/// (or `start` itself when pinned). A failing leaf truncates the sweep.
pub fn foliate_sweep(
    f: &ReducedFunctional,
    start: ChartPoint,
    eps_grid: &[f64],
    options: &FoliationOptions,
) -> Result<SweepResult> {
    if eps_grid.is_empty() || eps_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain(
            "scale grid must be non-empty and strictly decreasing".into(),
        ));
    }
    let p0 = if options.pin_center {
        start
    } else {
        scalar_critical_point(f.provider().as_ref(), start)?
    };
    let mut leaves: Vec<FoliationLeaf> = Vec::with_capacity(eps_grid.len());
    let mut truncated = None;
    for &eps in eps_grid {
        let from = leaves.last().map_or(start, |l| l.p_eps);
        match leaf(f, eps, from, p0, options) {
            Ok(l) => leaves.push(l),
            Err(e) => {
                truncated = Some(format!("leaf at ε = {eps}: {e}"));
                break;
            }
        }
    }
    Ok(SweepResult {
        p0,
        leaves,
        truncated,
    })
}

/// Normal speed between two consecutive leaves.
#[derive(Clone, Debug, Serialize)]
pub struct LeafPair {
    pub eps_outer: f64,
    pub eps_inner: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    /// `max_q |speed − 1|`.
    pub deviation: f64,
    /// `min r(outer) − max r(inner)` about the inner centre, in `g` there.
    pub radial_gap: f64,
}

impl LeafPair {
    pub fn eps_mid(&self) -> f64 {
        0.5 * (self.eps_outer + self.eps_inner)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FoliationReport {
    pub verified: bool,
    pub verdict: String,
    pub eps_range: [f64; 2],
    pub pairs: Vec<LeafPair>,
    pub violations: Vec<String>,
    /// `max_q |speed − 1|` against the pair midpoint scale.
    pub deviation_slope: SlopeFit,
    /// `|P_ε − P₀|` against `ε`.
    pub drift_slope: SlopeFit,
    /// `‖φ_ε‖∞` against `ε`.
    pub phi_slope: SlopeFit,
}

fn radius(g: &nalgebra::Matrix3<f64>, c: &Vec3, x: &Vec3) -> f64 {
    let d = x - c;
    d.dot(&(g * d)).sqrt()
}

/// Finite-difference normal speed `g(∂F/∂ε, n)` between consecutive leaves,
/// averaged over the two leaves' normals, plus the radial nesting gap.
pub fn foliation_diagnostics(
    f: &ReducedFunctional,
    leaves: &[FoliationLeaf],
) -> Result<FoliationReport> {
    if leaves.len() < 3 {
        return Err(Error::Domain(format!(
            "need at least 3 leaves, got {}",
            leaves.len()
        )));
    }
    let provider = f.provider();
    let mut pairs = Vec::with_capacity(leaves.len() - 1);
    let mut violations = Vec::new();
    for w in leaves.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let de = a.eps - b.eps;
        let (mut lo, mut hi, mut dev) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for i in 0..a.surface.len() {
            let v = (a.surface[i] - b.surface[i]) / de;
            let s = 0.5 * (v.dot(&a.normal_covector[i]) + v.dot(&b.normal_covector[i]));
            lo = lo.min(s);
            hi = hi.max(s);
            dev = dev.max((s - 1.0).abs());
        }
        let c = b.p_eps.0;
        let g = checked_metric(provider.as_ref(), &c)?;
        let outer = a
            .surface
            .iter()
            .map(|x| radius(&g, &c, x))
            .fold(f64::INFINITY, f64::min);
        let inner = b
            .surface
            .iter()
            .map(|x| radius(&g, &c, x))
            .fold(0.0, f64::max);
        let pair = LeafPair {
            eps_outer: a.eps,
            eps_inner: b.eps,
            speed_min: lo,
            speed_max: hi,
            deviation: dev,
            radial_gap: outer - inner,
        };
        if !(pair.speed_min > 0.0) {
            violations.push(format!(
                "normal speed {:.3e} between ε = {} and {}",
                pair.speed_min, a.eps, b.eps
            ));
        }
        if !(pair.radial_gap > 0.0) {
            violations.push(format!(
                "leaves at ε = {} and {} not nested (gap {:.3e})",
                a.eps, b.eps, pair.radial_gap
            ));
        }
        pairs.push(pair);
    }
    let eps_min = leaves.iter().map(|l| l.eps).fold(f64::INFINITY, f64::min);
    let eps_max = leaves.iter().map(|l| l.eps).fold(0.0, f64::max);
    let verified = violations.is_empty();
    let verdict = if verified {
        format!("foliation verified on [{eps_min}, {eps_max}]")
    } else {
        format!("foliation violated on [{eps_min}, {eps_max}]")
    };
    let mids: Vec<f64> = pairs.iter().map(LeafPair::eps_mid).collect();
    let devs: Vec<f64> = pairs.iter().map(|p| p.deviation).collect();
    let eps: Vec<f64> = leaves.iter().map(|l| l.eps).collect();
    let drift: Vec<f64> = leaves.iter().map(|l| l.center_drift).collect();
    let phi: Vec<f64> = leaves.iter().map(FoliationLeaf::phi_sup).collect();
    Ok(FoliationReport {
        verified,
        verdict,
        eps_range: [eps_min, eps_max],
        pairs,
        violations,
        deviation_slope: fit_power_law(&mids, &devs, 1e-12)?,
        drift_slope: fit_power_law(&eps, &drift, 1e-12)?,
        phi_slope: fit_power_law(&eps, &phi, 1e-12)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Euclidean;
    use crate::spectral::SphereGrid;
    use std::sync::Arc;

    #[test]
    fn concentric_euclidean_spheres() {
        let g = SphereGrid::new(6).unwrap();
        let f = ReducedFunctional::new(&g, Arc::new(Euclidean));
        let opts = FoliationOptions {
            pin_center: true,
            ..Default::default()
        };
        let sweep = foliate_sweep(&f, ChartPoint::origin(), &[0.2, 0.1, 0.05], &opts).unwrap();
        assert!(sweep.truncated.is_none());
        let rep = foliation_diagnostics(&f, &sweep.leaves).unwrap();
        assert!(rep.verified, "{}", rep.verdict);
        for p in &rep.pairs {
            assert!(p.deviation < 1e-8);
        }
        assert!(sweep.leaves.iter().all(|l| l.hawking.abs() < 1e-12));
    }

    #[test]
    fn diagnostics_need_three_leaves() {
        let g = SphereGrid::new(6).unwrap();
        let f = ReducedFunctional::new(&g, Arc::new(Euclidean));
        assert!(foliation_diagnostics(&f, &[]).is_err());
    }

    #[test]
    fn increasing_grid_is_rejected() {
        let g = SphereGrid::new(6).unwrap();
        let f = ReducedFunctional::new(&g, Arc::new(Euclidean));
        let r = foliate_sweep(
            &f,
            ChartPoint::origin(),
            &[0.1, 0.2],
            &FoliationOptions::default(),
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
