//! Scalar fields on the round unit sphere.
//!
//! Fields are band-limited real spherical-harmonic expansions, orthonormal
//! in `L²(S²)`, collocated on a Gauss-Legendre grid. Tangential derivatives
//! use the Mercator pair `∂_s = sinθ ∂_θ`, `∂_λ`, which are smooth on the
//! whole sphere and never divide by `sinθ`.

mod field;
mod grid;
mod operators;

pub use field::SpectralField;
pub use grid::{coeff_index, gauss_legendre, index_lm, n_coeffs, Derivatives, SphereGrid};
pub use operators::{
    apply_euclidean_linearization, apply_round_operator, grad_sq, solve_coeffs,
    solve_euclidean_linearization, KernelFunctions, RoundOperator, ELL0_EIGENVALUE,
    ELL1_EIGENVALUE,
};
