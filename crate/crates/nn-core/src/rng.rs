use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded generator for a named consumer. Every consumer (init, shuffle,
/// sampling, ...) draws from its own ChaCha stream derived from the experiment
/// seed, so adding a consumer never perturbs the others.
pub fn stream_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(name.as_bytes()));
    rng
}

/// FNV-1a 64-bit; stable across platforms and releases, unlike the std hasher.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
