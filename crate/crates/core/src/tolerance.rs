//! Global numerical tolerances.

/// Tolerance for Hermiticity checks: `|entry(i,j) - conj(entry(j,i))|`.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Threshold below which an outcome probability is treated as impossible,
/// so conditioning on it is refused rather than renormalized.
pub const IMPOSSIBLE_OUTCOME_TOL: f64 = 1e-14;

/// Eigenvalue cutoff separating the support of a density operator from its
/// numerical null space.
pub const SUPPORT_CUT: f64 = 1e-10;

/// Default value of the global positivity/completeness tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// The global positivity/completeness tolerance.
///
/// Reads `POSTFID_TOL` from the environment on every call so the override
/// takes effect without process restarts; falls back to [`DEFAULT_TOL`] when
/// unset or unparsable.
pub fn global_tol() -> f64 {
    match std::env::var("POSTFID_TOL") {
        Ok(s) => s.trim().parse::<f64>().unwrap_or(DEFAULT_TOL),
        Err(_) => DEFAULT_TOL,
    }
}
