//! Seeded random streams and deterministic child-seed derivation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a; stable across platforms and toolchains, unlike `DefaultHasher`.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Derives the stream seed for one experiment cell from the master seed, a
/// method tag, the projection dimension and the repeat index. Every cell gets
/// an independent stream regardless of evaluation order.
pub fn child_seed(master: u64, tag: &str, k: usize, repeat: usize) -> u64 {
    let mut h = mix64(master);
    h = mix64(h ^ fnv1a(tag.as_bytes()));
    h = mix64(h ^ k as u64);
    mix64(h ^ repeat as u64)
}
