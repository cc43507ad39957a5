//! Counter-based keyed random streams.
//!
//! Every draw that belongs to a sample index `i` comes from its own ChaCha
//! stream keyed by `(seed, i)`, so adding or removing other samples never
//! perturbs it and the work can be split across threads freely.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream for sample `index` under `seed`.
pub fn keyed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives a child seed from a parent seed and a list of labels.
///
/// SplitMix64 finalizer folded over the labels; used for per-cell and
/// per-model seeds.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    let mut state = seed;
    for &label in labels {
        state = splitmix(state ^ splitmix(label.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    state
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
