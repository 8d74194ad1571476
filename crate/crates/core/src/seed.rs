//! Deterministic sub-seed derivation.
//!
//! All randomness in this crate flows from explicit u64 seeds. Independent
//! streams (per replication, per lambda grid index, per purpose) are derived
//! as `derive(base, stream)` = one SplitMix64 step of `base + GAMMA * (stream + 1)`,
//! so a single top-level seed reproduces every draw.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for an independent stream from a base seed.
pub fn derive(base: u64, stream: u64) -> u64 {
    splitmix64(base.wrapping_add(GAMMA.wrapping_mul(stream.wrapping_add(1))))
}
