//! Numerical evaluation of inner and outer bounds on the capacity region of
//! two-receiver discrete memoryless broadcast channels.
//!
//! * [`probcore`]: pmfs, channels, labeled joint tables, entropies and
//!   (conditional) mutual information in bits.
//! * [`envelope`]: one-dimensional upper concave envelopes and the
//!   skew-symmetric-channel functions built on them.
//! * [`constructions`]: the independence and deterministic-input liftings of
//!   auxiliary triples, and constructive support reduction.
//! * [`bounds`]: Marton's inner bound, the computable outer bound, the
//!   time-division and T-split sum rates, and the sum-rate gap search.

pub mod bounds;
pub mod constructions;
pub mod envelope;
pub mod error;
pub mod probcore;
pub mod sampling;

pub use error::{Error, Result};
