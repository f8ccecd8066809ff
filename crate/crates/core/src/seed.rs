//! Deterministic fan-out of a root seed into independent per-purpose streams.
//!
//! A stream is identified by `(root, purpose, index...)`. Mixing uses the
//! SplitMix64 finalizer, so neighbouring indices give unrelated seeds.

use rand::SeedableRng;
use rand_pcg::Pcg64;

/// Purpose tags. Each consumer of randomness draws from its own stream so that
/// adding draws in one place never shifts another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Ppp = 1,
    GroundPpp = 2,
    ClusterParents = 3,
    ClusterChildren = 4,
    Uavs = 5,
    Channel = 6,
    Multistream = 7,
    Tandem = 8,
    Replication = 9,
    SweepPoint = 10,
    Estimation = 11,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed, a purpose and an index.
pub fn derive(parent: u64, stream: Stream, index: u64) -> u64 {
    let a = splitmix64(parent ^ splitmix64(stream as u64));
    splitmix64(a ^ splitmix64(index.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// A PCG generator seeded from `derive(parent, stream, index)`.
pub fn rng(parent: u64, stream: Stream, index: u64) -> Pcg64 {
    Pcg64::seed_from_u64(derive(parent, stream, index))
}
