//! Counter-keyed random streams so parallel work is order-independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MIX: u64 = 0x9E37_79B9_7F4A_7C15;

/// Independent stream for `(seed, point, trial)`.
pub fn keyed_rng(seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ point.wrapping_add(1).wrapping_mul(MIX));
    rng.set_stream(trial);
    rng
}
