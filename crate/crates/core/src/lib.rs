//! Numerical construction of area-constrained Willmore spheres of small area
//! `4πε²` concentrating at a non-degenerate critical point of the scalar
//! curvature of a Riemannian 3-manifold.
//!
//! The pipeline is a Lyapunov-Schmidt reduction carried out on a spectral
//! discretisation of the unit sphere:
//!
//! * [`metric`]: ambient metrics (a name-keyed registry of providers),
//!   curvature, geodesics and normal-coordinate charts at scale `ε`.
//! * [`spectral`]: Gauss-Legendre grids, real spherical-harmonic transforms
//!   and the round-sphere operators.
//! * [`surface`]: geometry of perturbed geodesic spheres, Willmore energy,
//!   its gradient, second variation and the Hawking mass.
//! * [`reduction`]: kernel basis, the corrected surfaces `φ_{ε,P}` and the
//!   reduced functional `Φ_ε`.
//! * [`landscape`]: critical points of `Φ_ε`, expansion diagnostics and
//!   foliation sweeps.
//! * [`cli`]: key/value configuration, dispatch and CSV/JSON export.

pub mod cli;
pub mod error;
pub mod fit;
pub mod landscape;
pub mod metric;
pub mod reduction;
pub mod spectral;
pub mod surface;

pub use error::{Error, Result};

/// Three-vector used for chart coordinates and tangent vectors.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 matrix used for metrics, frames and curvature tensors.
pub type Mat3 = nalgebra::Matrix3<f64>;
