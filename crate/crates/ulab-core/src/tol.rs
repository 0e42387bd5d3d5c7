//! Centralized numeric tolerances.
//!
//! Every comparison in the crate routes through one of these constants so
//! that the precision story is auditable in one place.  The rationale in
//! each case: averages are compensated (Kahan) sums of at most ~10^9 terms
//! of modulus O(1), so floating-point drift stays far below 1e-9, while the
//! identities being checked are exact in exact arithmetic.

/// Absolute tolerance for identities that hold exactly in exact arithmetic
/// (counting-operator identities, norm recursions, projection equalities).
pub const EXACT_IDENTITY: f64 = 1e-9;

/// Absolute slack granted to one side of a proved inequality to absorb
/// floating-point drift.  Inequalities are never "rounded" to true by more
/// than this.
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Tolerance for sup-norm bound checks on function values.  Tighter than
/// the identity tolerance because no averaging is involved.
pub const SUP_BOUND: f64 = 1e-12;

/// Tolerance for unit-modulus checks (phases, eigenvalues).
pub const UNIT_MODULUS: f64 = 1e-12;

/// Averages of difference products are provably nonnegative reals; values
/// above this negative floor are clamped to zero before taking roots,
/// anything lower is treated as a logic error.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// Tolerance for checking that means are preserved by projections.
pub const MEAN_PRESERVATION: f64 = 1e-12;
