//! Per-trial random streams.
//!
//! Trial `t` of a run seeded with `s` draws from ChaCha8 keyed with the 32
//! bytes `s.to_le_bytes() ++ [0; 24]`, on stream number `t`, starting at word
//! position zero. Streams depend only on `(s, t)`, so any partition of trials
//! across workers reproduces the same draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}
