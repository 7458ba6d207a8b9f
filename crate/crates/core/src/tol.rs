//! Numerical tolerances shared across modules.

/// Default equality tolerance for closed-form checks.
pub const DEFAULT: f64 = 1e-9;

/// Entrywise Hermiticity tolerance.
pub const HERMITIAN: f64 = 1e-10;

/// Trace-one tolerance for density matrices.
pub const TRACE: f64 = 1e-9;

/// Eigenvalues in `[-NEG_EIGEN, 0)` are treated as zero.
pub const NEG_EIGEN: f64 = 1e-9;

/// Normalization tolerance on squared norms.
pub const NORM: f64 = 1e-9;

/// Unit-circle constraints on canonical triple amplitudes.
pub const TRIPLE_NORM: f64 = 1e-10;

/// Jacobi convergence: off-diagonal Frobenius mass.
pub const JACOBI_OFF: f64 = 1e-13;

/// Jacobi sweep cap.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Coplanarity tolerance on the raw Bloch determinant.
pub const GREAT_CIRCLE: f64 = 1e-9;

/// Below this, the optimizer reports a vanishing deviation.
pub const SEARCH_ZERO: f64 = 1e-6;
