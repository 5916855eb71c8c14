//! Desk-scale laboratory for interactive Kolmogorov complexity and its
//! relation to key agreement.
//!
//! * [`bitcore`]: bit strings, pair encoding, padding.
//! * [`toyvm`]: a fixed interactive toy machine and exact complexities.
//! * [`protocols`]: two-party bit-exchange protocols and property checks.
//! * [`hashing`]: matrix hashing and exact distributional checks.
//! * [`reductions`]: deciders, the breaker predicate, Eve-driven deciders
//!   and Goldreich–Levin list decoding.

pub mod bitcore;
pub mod error;
pub mod hashing;
pub mod protocols;
pub mod reductions;
pub mod seed;
pub mod stats;
pub mod toyvm;

pub use bitcore::{bits, decode_pair, encode_pair, pad_pair, BitString, PairCode};
pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
