//! Deterministic random streams for independent trials.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Random generator used for every trial.
pub type TrialRng = ChaCha8Rng;

/// Seed of trial `index` of the instance identified by `instance_key`.
///
/// SHA-256 over the master seed, the key and the index, so the stream of a trial
/// does not depend on which other instances or trials share the run.
pub fn derive_seed(master_seed: u64, instance_key: &[u8], index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(b"cim-trial-v1");
    h.update(master_seed.to_le_bytes());
    h.update((instance_key.len() as u64).to_le_bytes());
    h.update(instance_key);
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Instance key for a coupling matrix that has no canonical graph label.
pub fn matrix_key(values: &[f64]) -> Vec<u8> {
    let mut h = Sha256::new();
    h.update(b"matrix");
    for v in values {
        h.update(v.to_le_bytes());
    }
    h.finalize().to_vec()
}
