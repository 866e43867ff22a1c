//! Deterministic randomness streams.
//!
//! Every experiment derives its randomness from a single 64-bit seed. A
//! counter-based generator (ChaCha12) gives cross-run determinism, and
//! per-trial substreams come from the generator's stream id so that trials
//! are independent and order-insensitive.

use rand_core::{RngCore, SeedableRng};

pub use rand_chacha::ChaCha12Rng;

/// Generator name recorded in every report for reproducibility.
pub const RNG_ALGORITHM: &str = "chacha12";

/// Root stream for a 64-bit seed.
pub fn root_stream(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Substream `id` of `seed`. Distinct ids never overlap.
pub fn substream(seed: u64, id: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Uniform residue in `[0, q)` by rejection sampling.
pub fn uniform_residue(rng: &mut impl RngCore, q: u8) -> u8 {
    debug_assert!(q >= 2);
    let bound = u32::MAX - (u32::MAX % q as u32);
    loop {
        let v = rng.next_u32();
        if v < bound {
            return (v % q as u32) as u8;
        }
    }
}

/// Uniform f64 in `[0, 1)` with 53 bits of precision.
pub fn uniform_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `[0, n)`.
pub fn uniform_index(rng: &mut impl RngCore, n: usize) -> usize {
    debug_assert!(n > 0);
    let bound = u64::MAX - (u64::MAX % n as u64);
    loop {
        let v = rng.next_u64();
        if v < bound {
            return (v % n as u64) as usize;
        }
    }
}
