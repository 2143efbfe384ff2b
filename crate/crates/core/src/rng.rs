//! Counter-based random streams.
//!
//! A stream is identified by `(seed, domain, index)`. ChaCha is a counter
//! cipher, so each stream is an independent keystream and can be created
//! in O(1) from any thread without coordination. Batches of work use their
//! batch index as stream index, which keeps results independent of how the
//! batches are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream domains keep unrelated consumers of the same seed apart.
pub mod domain {
    pub const SURVIVAL: u64 = 0x5355_5256;
    pub const ENDPOINTS: u64 = 0x454e_4450;
    pub const KR_NUMERATOR: u64 = 0x4b52_4e55;
    pub const KR_DENOMINATOR: u64 = 0x4b52_4445;
    pub const ENSEMBLE: u64 = 0x454e_5345;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, domain: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(domain)));
    rng.set_stream(index);
    rng
}
