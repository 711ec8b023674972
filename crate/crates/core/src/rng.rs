//! Seeded, scheduling-independent random streams.
//!
//! Every Monte-Carlo draw is made from its own ChaCha stream addressed by
//! `(seed, domain, index)`, so the value of sample `i` never depends on how
//! many samples were drawn before it or on which thread drew it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub mod domain {
    pub const BASEPOINT: u64 = 1;
    pub const COMPANION: u64 = 2;
    pub const DEFECT: u64 = 3;
    pub const RIGIDITY: u64 = 4;
    pub const BALL: u64 = 5;
    pub const NULL_RADIUS: u64 = 6;
    pub const HISTOGRAM: u64 = 7;
    pub const COMMUTATION: u64 = 8;
    pub const DENSITY: u64 = 9;
    pub const MISC: u64 = 10;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(domain)));
    rng.set_stream(index);
    rng
}

/// Stream index for the `j`-th companion of basepoint `i`.
pub fn pair_index(i: usize, j: usize) -> u64 {
    ((i as u64) << 32) | j as u64
}
