//! Finite-scale combinatorial machinery for cone-avoidance tree forcing:
//! clopen-set algebra, disperse families and supporters, the Cross
//! operation, abandonment-constrained splitting classes, the forcing step
//! loop, and enumeration/path extraction, each paired with brute-force
//! verifiers at exhaustive scale.

pub mod bits;
pub mod clopen;
pub mod enumeration;
pub mod error;
pub mod forcing;
pub mod functionals;
pub mod machine;
pub mod partitions;
pub mod pattern;
pub mod scenario;
pub mod sim;
pub mod trace;
pub mod trees;
pub mod verify;

pub use error::{Error, Result};
