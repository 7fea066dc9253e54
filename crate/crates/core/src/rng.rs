//! The toolkit's PRNG contract.
//!
//! Every randomized operation takes an explicit 64-bit seed and draws from a
//! [`ChaCha8Rng`] initialized with `seed_from_u64`. ChaCha8 is a counter-mode
//! stream cipher with a portable, platform-independent output sequence, so
//! the same seed and inputs produce identical results on every platform.
//!
//! Operations that fan work out per item (records, folds, sweep sizes) derive
//! one child seed per item with [`derive_seed`], a SplitMix64 mix of
//! `(seed, stream)`. Deriving child seeds instead of sharing one stream keeps
//! per-item generation order-independent, which is what makes parallel
//! generation safe.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG for a seed. All randomness in the crate flows through
/// this constructor.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed for stream `stream` under `seed`.
///
/// SplitMix64 finalizer over the wrapping combination of seed and stream;
/// bijective in `stream` for a fixed seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
