//! Deterministic RNG stream derivation.
//!
//! Every replicate owns a master seed; per-individual streams are derived by
//! hashing the master seed together with the individual's genealogical label,
//! so results do not depend on event interleaving or thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// RNG used throughout the crate. Seeded, portable, and fast enough that it
/// never shows up in profiles next to the kernel evaluations.
pub type Stream = ChaCha8Rng;

pub fn stream_from_seed(seed: u64) -> Stream {
    Stream::seed_from_u64(seed)
}

/// Derive an independent child stream from `(master, label, domain)`.
///
/// `domain` separates different uses of the same label (e.g. the candidate
/// clock vs. auxiliary draws) without risk of overlap.
pub fn child_stream(master: u64, label: &[u32], domain: u8) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update([domain]);
    for part in label {
        hasher.update(part.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    Stream::from_seed(seed)
}
