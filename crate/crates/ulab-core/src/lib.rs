//! Numerical and symbolic toolkit for averaged correlation estimates on
//! finite vector spaces `F_p^D`.
//!
//! The crate has five layers, each usable on its own:
//!
//! * [`field`] — the ambient group: prime-field configuration, points,
//!   subgroups, bounded complex-valued functions, and conditional
//!   expectation over subgroup cosets.
//! * [`norms`] — box norms along tuples of subgroups (Gowers norms as the
//!   special case of repeated cyclic directions), dual functions, and an
//!   explicit degree-2 inverse construction.
//! * [`counting`] — multilinear averages along polynomial progressions,
//!   their structured (conditional-expectation) counterparts, and the
//!   Cauchy–Schwarz exchange lemmas used to compare the two.
//! * [`pet`] — a symbolic van der Corput induction engine over multivariate
//!   integer polynomials, with direction extraction and coefficient audits.
//! * [`concat`] — verifiers for concatenation inequalities that merge box
//!   norms along varying subgroup families into norms along their spans.
//!
//! Everything is deterministic: random inputs are produced by seeded
//! counter-based generators, and all enumeration orders are fixed.

pub mod concat;
pub mod counting;
pub mod field;
pub mod norms;
pub mod pet;
pub mod tol;

pub(crate) mod csum;
