//! Repo-wide numeric tolerances. One knob per kind of check.

/// Absolute floor for the minimum eigenvalue of an operator that must be PSD.
pub const PSD_MIN_EIG: f64 = -1e-9;

/// Kraus completeness: max |(sum E_i^dag E_i - I)| entry.
pub const KRAUS_COMPLETENESS: f64 = 1e-10;

/// Isometry check: max |V^dag V - I| entry.
pub const ISOMETRY: f64 = 1e-10;

/// Tester normalization: max |sum T_i - rho_A (x) I_B| entry.
pub const TESTER_NORM: f64 = 1e-9;

/// Eigenvalues above this are kept when extracting Kraus operators from a Choi.
pub const CHOI_RANK_CUT: f64 = 1e-9;

/// Non-PSD rejection threshold for Choi inputs (min eigenvalue below this errors).
pub const CHOI_PSD_REJECT: f64 = -1e-8;

/// Relative singular-value cutoff for pseudo-inverses.
pub const PINV_REL_CUT: f64 = 1e-10;

/// Schur transform unitarity: max |U U^dag - I| entry.
pub const SCHUR_UNITARITY: f64 = 1e-10;

/// Bipartite power decomposition reconstruction residual (hard failure above this).
pub const DECOMPOSE_RESIDUAL: f64 = 1e-9;

/// Exact identities checked across two independent code paths.
pub const EXACT_IDENTITY: f64 = 1e-8;

/// Denominator floor in phase alignment.
pub const PHASE_DEGENERACY: f64 = 1e-12;

/// Returns the full tolerance table, for embedding in reports.
pub fn table() -> Vec<(&'static str, f64)> {
    vec![
        ("psd_min_eig", PSD_MIN_EIG),
        ("kraus_completeness", KRAUS_COMPLETENESS),
        ("isometry", ISOMETRY),
        ("tester_norm", TESTER_NORM),
        ("choi_rank_cut", CHOI_RANK_CUT),
        ("choi_psd_reject", CHOI_PSD_REJECT),
        ("pinv_rel_cut", PINV_REL_CUT),
        ("schur_unitarity", SCHUR_UNITARITY),
        ("decompose_residual", DECOMPOSE_RESIDUAL),
        ("exact_identity", EXACT_IDENTITY),
        ("phase_degeneracy", PHASE_DEGENERACY),
    ]
}
