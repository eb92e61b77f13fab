//! Deterministic seed derivation for independent random streams.

/// splitmix64 finalizer; decorrelates nearby integers.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives an independent stream seed from a base seed and a stream index.
///
/// Consecutive indices map to statistically unrelated seeds, so batch run
/// `i` can use `mix_seed(base, i)` without cross-run correlation.
pub fn mix_seed(base: u64, stream: u64) -> u64 {
    splitmix64(base ^ splitmix64(stream))
}

/// Three-way variant for nested derivations (e.g. function × replication).
pub fn mix_seed3(base: u64, a: u64, b: u64) -> u64 {
    mix_seed(mix_seed(base, a), b)
}
