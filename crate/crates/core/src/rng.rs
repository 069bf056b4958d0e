//! Reproducible random streams.
//!
//! Every chain draws from a ChaCha8 keystream addressed by `(master seed, stream id)`.
//! ChaCha is counter based, so distinct stream ids give independent sequences
//! from one master seed and any stream can be recreated exactly from its address.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

/// Stream ids reserved for the two random consumers inside one chain.
pub(crate) const KERNEL_STREAM_OFFSET: u64 = 0;
pub(crate) const SCHEDULE_STREAM_OFFSET: u64 = 1;

/// Generator for stream `stream` of master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-chain generators: chain `chain` owns streams `2*chain` and `2*chain + 1`.
pub fn chain_streams(seed: u64, chain: u64) -> (ChainRng, ChainRng) {
    (
        stream_rng(seed, 2 * chain + KERNEL_STREAM_OFFSET),
        stream_rng(seed, 2 * chain + SCHEDULE_STREAM_OFFSET),
    )
}

/// Mixes a base seed with a cell key so grid cells get unrelated master seeds.
pub fn derive_seed(base: u64, key: &[u64]) -> u64 {
    // splitmix64 finaliser applied per key word
    let mut z = base;
    for &k in key {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(k);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}
