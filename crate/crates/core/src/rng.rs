//! Seeded, stream-splittable randomness.
//!
//! Every stochastic routine takes an explicit RNG handle. Parallel work uses
//! counter-derived streams of one master seed, so results do not depend on
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type Rng = ChaCha12Rng;

/// Master RNG for a run.
pub fn master(seed: u64) -> Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Independent stream `k` of the given master seed.
pub fn stream(seed: u64, k: u64) -> Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(k.into());
    rng
}
