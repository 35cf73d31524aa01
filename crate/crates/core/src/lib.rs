//! Invariant Einstein metrics on aligned homogeneous spaces `G1 x G2 / K`
//! whose isotropy representation splits into three irreducible summands.
//!
//! Everything that decides existence runs in exact rational arithmetic.
//! Floating point only appears in plotting grids and in the independent
//! numerical oracles used by the tests.

pub mod cli;
pub mod curvature;
pub mod einstein;
pub mod exact;
pub mod families;
pub mod spaces;
pub mod stability;

pub use exact::Rational;
