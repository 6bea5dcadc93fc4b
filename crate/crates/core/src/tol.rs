//! Global numerical tolerances.
//!
//! Equality and Hermiticity are compared in relative Frobenius norm with a floor of one,
//! i.e. `‖a − b‖_F ≤ ε · max(1, ‖b‖_F)`. Positivity accepts eigenvalues down to
//! `−EPS_POS · max(1, λ_max)`.

/// Equality tolerance (relative Frobenius).
pub const EPS_EQ: f64 = 1e-8;
/// Hermiticity tolerance (relative Frobenius).
pub const EPS_HERM: f64 = 1e-8;
/// Positivity tolerance on eigenvalues, scaled by `max(1, λ_max)`.
pub const EPS_POS: f64 = 1e-9;
/// Entries below this magnitude are skipped when fixing eigenvector phases.
pub const PHASE_THRESHOLD: f64 = 1e-10;
/// Relative singular-value cutoff for numerical rank.
pub const RANK_REL: f64 = 1e-8;
