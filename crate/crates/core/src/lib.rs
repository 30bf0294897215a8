//! Exact-arithmetic machinery for F-set computations over finitely generated
//! modules with a Frobenius-like endomorphism: integer lattices and Hermite
//! normal forms, finite fields and rational functions, fundamental recurrence
//! sequences and their solvers, the orbit/subgroup intersection pipeline,
//! twisted polynomials with Drinfeld-module actions, and a multiplicative
//! torus demo.
//!
//! Everything is exact: arbitrary-precision integers, finite-field residues
//! and reduced rational functions. No floating point anywhere.

pub mod drinfeld;
pub mod error;
pub mod fq;
pub mod frobmod;
pub mod fsets;
pub mod matrix;
pub mod orbit;
pub mod recsolve;
pub mod sampling;
pub mod torus;

pub use error::{Error, Result};
pub use frobmod::{FgModule, IntPoly, ModElement};
pub use fsets::{BoundedLatticeCoset, ExponentSet, FSet, GrouplessFSet};
pub use matrix::IntMatrix;
pub use recsolve::{CompletenessStatus, PeriodProfile, StatusTag};
