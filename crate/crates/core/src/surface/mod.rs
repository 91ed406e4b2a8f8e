//! Perturbed geodesic spheres `Σ_{ε,P}[φ] = {exp_P(ε(1 + φ(q))F q)}` and
//! their Willmore data, all in the rescaled metric `g_ε`.
//!
//! Mean curvature follows `A(X, Y) = g(∇_X n, Y)` with the outward normal,
//! so the unit sphere has `H = 2`.

mod geometry;
mod variation;

pub use geometry::{
    compute_geometry, geometry_from_displacements, geometry_from_positions, Embedding,
    NodeGeometry, SurfaceGeometry, SurfaceShape,
};
pub use variation::{
    default_second_variation_step, energy_of, hawking_mass, second_variation_bilinear,
    second_variation_dir, willmore_energy, willmore_gradient, SecondVariation,
};
