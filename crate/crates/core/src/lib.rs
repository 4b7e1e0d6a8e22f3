//! Exact homomorphic-style aggregation over packed slot vectors: ring and
//! encoding parameters, rank-based robust aggregation circuits with depth
//! and operation accounting, cleartext oracles, canonical attacks, data
//! simulation, and the distributed training protocol tying them together.

pub mod attacks;
pub mod circuit;
pub mod config;
pub mod datasim;
pub mod encoding;
pub mod error;
pub mod numt;
pub mod oracle;
pub mod protocol;
pub mod slot;

pub use error::{Error, Result};

/// Scalar type used by the cleartext-side numerics (oracles, attacks,
/// training). The integer slot pipeline is exact and fixed to `u64` residues.
pub type Real = f64;
