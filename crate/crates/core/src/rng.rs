//! Seeded random streams: one ChaCha8 stream per consumer, keyed by
//! `seed ^ tag`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TAG_OPERATOR: u64 = 0x6f70_6572_6174_6f72;
pub const TAG_RAYLEIGH: u64 = 0x7261_796c_6569_6768;
pub const TAG_DOUBLING: u64 = 0x646f_7562_6c69_6e67;
pub const TAG_DUALITY: u64 = 0x6475_616c_6974_7921;
pub const TAG_INTERP: u64 = 0x696e_7465_7270_6f6c;
pub const TAG_CONTROL: u64 = 0x636f_6e74_726f_6c21;
pub const TAG_VERIFY: u64 = 0x7665_7269_6679_2121;

pub fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ tag)
}

/// SplitMix64 finaliser, used to derive sub-stream keys.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
