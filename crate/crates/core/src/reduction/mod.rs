//! Lyapunov-Schmidt correction and the reduced functional `Φ_ε`.

mod basis;
mod correction;
mod functional;

pub use basis::{kernel_basis, project_perp, KernelBasis};
pub use correction::{
    default_tolerance, evaluate_g, solve_correction, CorrectionResult, GEvaluation, SolverOptions,
    FLOOR_SLACK, FLOOR_STALLS,
};
pub use functional::{ReducedFunctional, ReducedSample};
