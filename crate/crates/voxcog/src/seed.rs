//! Stable seed derivation.
//!
//! Every stochastic decision in the pipeline is driven by a ChaCha stream
//! seeded from an FNV-1a hash of the identifying tuple, so results are
//! reproducible across runs, platforms, and worker schedules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

/// 64-bit FNV-1a over concatenated byte chunks.
pub fn fnv1a64(parts: &[&[u8]]) -> u64 {
    let mut h = FNV_OFFSET;
    for part in parts {
        for &b in *part {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
        // separator so ("ab","c") and ("a","bc") hash differently
        h ^= 0xff;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Per-segment augmentation seed: hash of
/// (global_seed, subject_id, recording_id, segment_index, epoch).
pub fn segment_seed(
    global_seed: u64,
    subject_id: &str,
    recording_id: &str,
    segment_index: usize,
    epoch: usize,
) -> u64 {
    fnv1a64(&[
        &global_seed.to_le_bytes(),
        subject_id.as_bytes(),
        recording_id.as_bytes(),
        &(segment_index as u64).to_le_bytes(),
        &(epoch as u64).to_le_bytes(),
    ])
}

/// Derive a named sub-seed from a parent seed.
pub fn derive_seed(parent: u64, tag: &str, index: u64) -> u64 {
    fnv1a64(&[&parent.to_le_bytes(), tag.as_bytes(), &index.to_le_bytes()])
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
