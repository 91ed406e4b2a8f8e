//! Critical points of `Φ_ε`, expansion checks and foliation sweeps.
//!
//! Near a non-degenerate critical point `P₀` of `Sc`,
//! `Φ_ε ≈ 16π − (8π/3) ε² Sc`, so `Φ_ε` has a critical point `P_ε` within
//! `O(ε²)` of `P₀` whose Hessian has the sign pattern of `−Hess Sc(P₀)`.

mod critical;
mod expansion;
mod foliation;
mod hawking;

pub use critical::{
    find_critical_point, hessian_index, metric_norm, reduced_hessian, scalar_critical_point,
    CriticalPoint, IndexReport, SearchOptions,
};
pub use expansion::{
    expansion_diagnostics, validate_halving_grid, ExpansionReport, ExpansionRow, ExpansionSlopes,
    SPECTRAL_FLOOR,
};
pub use foliation::{
    foliate_sweep, foliation_diagnostics, FoliationLeaf, FoliationOptions, FoliationReport,
    LeafPair, SweepResult,
};
pub use hawking::{coordinate_sphere_hawking, HawkingSample};
