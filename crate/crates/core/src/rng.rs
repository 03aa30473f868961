// SPDX-License-Identifier: Apache-2.0

//! Counter-based random streams.
//!
//! Every independent unit of work (a spectral bin, a trial) gets its own
//! ChaCha8 stream selected by `(seed, index)`. Output therefore depends only
//! on the seed and the unit index, never on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
