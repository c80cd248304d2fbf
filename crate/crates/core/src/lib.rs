//! Twisted conjugacy in restricted wreath products `G wr Z^k` with `G` finite
//! abelian: explicit automorphisms with finite Reidemeister number, exact
//! certificates for them, and brute-force oracles on finite quotients.
//!
//! The lattice layer ([`intlat`]) is generic over the integer scalar
//! ([`IntScalar`]); the aliases below fix the scalar used elsewhere.

pub mod construct;
pub mod error;
pub mod intlat;
pub mod oracle;
pub mod scalar;
pub mod verify;
pub mod wreath;
pub mod zqmod;

use num_bigint::BigInt;

pub use error::{Error, Result};
pub use scalar::{Extended, IntScalar};

/// Matrices acting on `Z^k`; entries fit in `i64`.
pub type IntMatrix = intlat::Matrix<i64>;
/// Arbitrary-precision matrices for elimination intermediates.
pub type BigIntMatrix = intlat::Matrix<BigInt>;
pub type ZkVector = intlat::Vector<i64>;
pub type BigVector = intlat::Vector<BigInt>;
pub type SnfResult = intlat::SnfResult<i64>;
pub type BigSnfResult = intlat::SnfResult<BigInt>;
