use std::sync::Arc;

use rayon::prelude::*;

use super::correction::{solve_correction, CorrectionResult, SolverOptions};
use crate::metric::{ChartPoint, MetricProvider, NormalChart, DEFAULT_GEODESIC_STEPS};
use crate::spectral::{SpectralField, SphereGrid};
use crate::{Mat3, Result, Vec3};

/// `Φ_ε(P) = W_{g_ε}(Σ_{ε,P}[φ_{ε,P}])` and its gradient over `P`.
#[derive(Clone, Debug)]
pub struct ReducedSample {
    pub p: ChartPoint,
    pub eps: f64,
    pub value: f64,
    /// `∂_{P^i}Φ_ε = 2⟨W' − β₀H, ψ_i⟩` with the translation fields `ψ_i`;
    /// `⟨H, ψ_i⟩` is the `P`-derivative of the constrained area and vanishes.
    pub grad: [f64; 3],
    /// Central difference of `Φ_ε` over the same displaced solves.
    pub fd_grad: [f64; 3],
    pub betas: [f64; 4],
    /// `‖∂_{P^i} φ_{ε,P}‖∞` by central differences.
    pub dphi_dp: [f64; 3],
    pub correction: CorrectionResult,
}

impl ReducedSample {
    pub fn grad_norm(&self) -> f64 {
        self.grad.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// `‖grad − fd_grad‖ / ‖grad‖`.
    pub fn route_mismatch(&self) -> f64 {
        let d: f64 = self
            .grad
            .iter()
            .zip(&self.fd_grad)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        d / self.grad_norm().max(1e-300)
    }
}

/// Reduced functional over one provider at a fixed discretisation.
#[derive(Clone, Debug)]
pub struct ReducedFunctional<'a> {
    pub grid: &'a SphereGrid,
    provider: Arc<dyn MetricProvider>,
    pub options: SolverOptions,
    pub steps: usize,
    /// Applied to every chart frame, `F_P ↦ F_P R`.
    pub rotation: Mat3,
}

impl<'a> ReducedFunctional<'a> {
    pub fn new(grid: &'a SphereGrid, provider: Arc<dyn MetricProvider>) -> Self {
        ReducedFunctional {
            grid,
            provider,
            options: SolverOptions::default(),
            steps: DEFAULT_GEODESIC_STEPS,
            rotation: Mat3::identity(),
        }
    }

    pub fn with_options(mut self, options: SolverOptions) -> Self {
        self.options = options;
        self
    }

    pub fn with_rotation(mut self, rotation: Mat3) -> Self {
        self.rotation = rotation;
        self
    }

    pub fn provider(&self) -> &Arc<dyn MetricProvider> {
        &self.provider
    }

    pub fn chart(&self, eps: f64, p: ChartPoint) -> Result<NormalChart> {
        let c = NormalChart::new(self.provider.clone(), p, eps)?;
        let c = if self.rotation == Mat3::identity() {
            c
        } else {
            c.rotated(&self.rotation)?
        };
        Ok(c.with_steps(self.steps))
    }

    pub fn correction(
        &self,
        eps: f64,
        p: ChartPoint,
        initial: Option<&SpectralField>,
    ) -> Result<CorrectionResult> {
        solve_correction(self.grid, &self.chart(eps, p)?, initial, &self.options)
    }

    pub fn value(&self, eps: f64, p: ChartPoint) -> Result<f64> {
        Ok(self.correction(eps, p, None)?.energy)
    }

    /// Step of the central differences over `P`: `10⁻⁴ ε`.
    pub fn fd_step(eps: f64) -> f64 {
        1e-4 * eps
    }

    /// Value and both gradients at `p`. Displaced solves are warm-started from
    /// the solution at `p` and polished to the residual floor, since their
    /// differences are divided by `2·10⁻⁴ ε`.
    pub fn sample(
        &self,
        eps: f64,
        p: ChartPoint,
        initial: Option<&SpectralField>,
    ) -> Result<ReducedSample> {
        let polished = SolverOptions {
            polish: true,
            ..self.options
        };
        let chart = self.chart(eps, p)?;
        let base = solve_correction(self.grid, &chart, initial, &polished)?;
        let h = Self::fd_step(eps);
        let displaced: Vec<(NormalChart, CorrectionResult)> = (0..6)
            .into_par_iter()
            .map(|k| {
                let mut x = p.0;
                x[k / 2] += if k % 2 == 0 { h } else { -h };
                let c = self.chart(eps, ChartPoint(x))?;
                let r = solve_correction(self.grid, &c, Some(&base.phi), &polished)?;
                Ok((c, r))
            })
            .collect::<Result<_>>()?;
        let geom = &base.geometry;
        let w: Vec<f64> = geom
            .willmore_gradient
            .iter()
            .zip(&geom.mean_curvature)
            .map(|(w, h)| w - base.betas[0] * h)
            .collect();
        let mut grad = [0.0; 3];
        let mut fd_grad = [0.0; 3];
        let mut dphi_dp = [0.0; 3];
        for i in 0..3 {
            let (cp, rp) = &displaced[2 * i];
            let (cm, rm) = &displaced[2 * i + 1];
            let psi: Vec<f64> = geom
                .nodes
                .iter()
                .zip(rp.positions.iter().zip(&rm.positions))
                .map(|(node, (yp, ym))| {
                    let dx: Vec3 = (cp.to_background(yp) - cm.to_background(ym)) / (2.0 * h);
                    let v = chart.frame_inv() * dx / eps;
                    node.normal.dot(&(node.ambient * v))
                })
                .collect();
            grad[i] = 2.0 * geom.inner(&w, &psi);
            fd_grad[i] = (rp.energy - rm.energy) / (2.0 * h);
            dphi_dp[i] = rp.phi.axpy(-1.0, &rm.phi)?.sup_norm() / (2.0 * h);
        }
        Ok(ReducedSample {
            p,
            eps,
            value: base.energy,
            grad,
            fd_grad,
            betas: base.betas,
            dphi_dp,
            correction: base,
        })
    }
}
