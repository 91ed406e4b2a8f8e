use std::f64::consts::PI;

use super::field::SpectralField;
use super::grid::{coeff_index, index_lm, n_coeffs, SphereGrid};
use crate::Result;

/// Diagonal round-sphere operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundOperator {
    /// `Δ`, eigenvalue `−ℓ(ℓ+1)`.
    Laplace,
    /// `Δ + 2`.
    LaplacePlusTwo,
    /// `L̃₀ = Δ(Δ + 2)`, eigenvalue `ℓ(ℓ+1)(ℓ(ℓ+1) − 2)`.
    L0Tilde,
}

impl RoundOperator {
    pub fn eigenvalue(self, l: usize) -> f64 {
        let k = (l * (l + 1)) as f64;
        match self {
            RoundOperator::Laplace => -k,
            RoundOperator::LaplacePlusTwo => 2.0 - k,
            RoundOperator::L0Tilde => k * (k - 2.0),
        }
    }
}

pub fn apply_round_operator(
    grid: &SphereGrid,
    field: &SpectralField,
    op: RoundOperator,
) -> Result<SpectralField> {
    let c = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, a)| a * op.eigenvalue(index_lm(i).0))
        .collect();
    SpectralField::from_coeffs(grid, c)
}

/// `|∇f|²` at the nodes, `(f_s² + f_λ²)/sin²θ` from spectral derivatives.
pub fn grad_sq(grid: &SphereGrid, field: &SpectralField) -> Result<Vec<f64>> {
    let d = grid.synthesize_derivatives(field.coeffs())?;
    Ok((0..grid.len())
        .map(|i| {
            let s = grid.sin_theta[grid.lat_of(i)];
            (d.s[i] * d.s[i] + d.l[i] * d.l[i]) / (s * s)
        })
        .collect())
}

/// `Z₀ ≡ 1` and `Z_i(q) = q_i`.
#[derive(Clone, Debug)]
pub struct KernelFunctions {
    pub z: [SpectralField; 4],
}

impl KernelFunctions {
    pub fn new(grid: &SphereGrid, band: usize) -> Result<Self> {
        let r = (4.0 * PI / 3.0).sqrt();
        let single = |l: usize, m: i64, a: f64| -> Result<SpectralField> {
            let mut c = vec![0.0; n_coeffs(band)];
            c[coeff_index(l, m)] = a;
            SpectralField::from_coeffs(grid, c)
        };
        Ok(KernelFunctions {
            z: [
                single(0, 0, (4.0 * PI).sqrt())?,
                single(1, 1, r)?,
                single(1, -1, r)?,
                single(1, 0, r)?,
            ],
        })
    }
}

/// Eigenvalue of `D_φG₀(0)` on constants: `⟨H₀, 1⟩H₀ = 16π` for `H₀ = 2`.
pub const ELL0_EIGENVALUE: f64 = 16.0 * PI;
/// Eigenvalue on `ℓ = 1`: `Σ⟨Y_i, ·⟩Y_i` with `Y_i` orthonormal is the identity there.
pub const ELL1_EIGENVALUE: f64 = 1.0;

fn linearization_eigenvalue(l: usize) -> f64 {
    match l {
        0 => ELL0_EIGENVALUE,
        1 => ELL1_EIGENVALUE,
        _ => RoundOperator::L0Tilde.eigenvalue(l),
    }
}

/// `D_φG₀(0)[ψ] = L̃₀ψ + ⟨H₀, ψ⟩H₀ + Σ⟨Y_{i,0}, ψ⟩Y_{i,0}`, diagonal in harmonics.
pub fn apply_euclidean_linearization(
    grid: &SphereGrid,
    psi: &SpectralField,
) -> Result<SpectralField> {
    let c = psi
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, a)| a * linearization_eigenvalue(index_lm(i).0))
        .collect();
    SpectralField::from_coeffs(grid, c)
}

/// Inverse of [`apply_euclidean_linearization`].
pub fn solve_euclidean_linearization(
    grid: &SphereGrid,
    rhs: &SpectralField,
) -> Result<SpectralField> {
    SpectralField::from_coeffs(grid, solve_coeffs(rhs.coeffs()))
}

/// Coefficient-level inverse, used by the correction iteration.
pub fn solve_coeffs(rhs: &[f64]) -> Vec<f64> {
    rhs.iter()
        .enumerate()
        .map(|(i, a)| a / linearization_eigenvalue(index_lm(i).0))
        .collect()
}
