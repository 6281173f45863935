//! Numerical tolerances and size limits used across the crate.
//!
//! All thresholds live here so no module carries ad-hoc magic numbers.
//! The working scale is dense complex algebra on dimensions up to
//! [`MAX_DIM`], where accumulated round-off stays near 1e-13; validation
//! tolerances sit two orders above that.

/// Hard cap on matrix dimension. All algorithms are exact-dense.
pub const MAX_DIM: usize = 64;

/// Max-entry asymmetry allowed when a matrix must be Hermitian.
pub const TOL_HERM: f64 = 1e-9;

/// Orthonormality slack for eigenvector columns.
pub const TOL_ORTH: f64 = 1e-9;

/// Reconstruction slack for the eigensolver (max-entry norm of
/// `V diag(λ) V† − M`).
pub const TOL_EIG: f64 = 1e-9;

/// Positive semidefiniteness slack on the smallest eigenvalue.
pub const TOL_PSD: f64 = 1e-9;

/// Norm and trace slack for state validation.
pub const TOL_STATE: f64 = 1e-9;

/// Slack for the ±1-spectrum test on dichotomic observables,
/// checked as the max-entry norm of `M² − 𝟙`.
pub const TOL_UNIT_SQUARE: f64 = 1e-8;

/// Max-entry slack when POVM effects must sum to identity.
pub const TOL_POVM_SUM: f64 = 1e-9;

/// Cross-wing commutator slack (max-entry norm) for joint scenarios.
pub const TOL_COMMUTE: f64 = 1e-9;

/// One-sided slack when comparing a correlation value against an
/// inequality bound. Round-off must not produce false violations.
pub const TOL_REPORT: f64 = 1e-9;

/// Off-diagonal Frobenius norm at which the Jacobi sweep stops.
pub const JACOBI_OFF_TOL: f64 = 1e-12;

/// Sweep limit for the Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Agreement required between the two routes of the difference-operator
/// norm identity, and realness/sign slack for its inner product.
pub const TOL_NORM_IDENTITY: f64 = 1e-10;

/// Slack on the operator-norm-≤-1 bound for difference operators.
pub const TOL_NORM_BOUND: f64 = 1e-9;

/// Simplex diameter at which a direct-search restart terminates.
pub const SIMPLEX_DIAMETER_TOL: f64 = 1e-7;

/// Distance from the analytic bound under which an optimizer run
/// counts as converged.
pub const TOL_ATTAIN: f64 = 1e-4;
