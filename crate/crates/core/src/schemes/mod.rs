//! Concrete families and primitives: the generic-group pairing scheme and
//! its public-key twin, random-oracle membership, program-validating
//! oracles, in-key-randomness encryption, and small toy families.

pub mod findq;
pub mod group;
pub mod pairing;
pub mod prob;
pub mod ro;
pub mod toy;

/// Default group order for demos: the smallest prime above 2^31, so the
/// message length l = floor(log2 w) is 31 bits.
pub const DEFAULT_GROUP_ORDER: u64 = 2_147_483_659;
