//! Reproducible, splittable random streams.
//!
//! A [`RngStream`] names a ChaCha8 keystream by `(seed, stream_id)`. Because
//! ChaCha is counter based, any block of a stream can be reached directly
//! without generating the ones before it, so Monte Carlo loops split work
//! into fixed-size blocks and get identical draws regardless of how many
//! worker threads process those blocks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// log2 of the number of 32-bit words reserved for one block of a stream.
const BLOCK_WORDS_LOG2: u32 = 36;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        self.block(0)
    }

    /// Generator positioned at block `index`. Blocks are disjoint windows of
    /// 2^36 words, far more than any single block of samples consumes.
    pub fn block(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng.set_word_pos(u128::from(index) << BLOCK_WORDS_LOG2);
        rng
    }

    /// A stream derived from this one by `tag`; distinct tags give distinct
    /// streams.
    pub fn fork(&self, tag: u64) -> RngStream {
        RngStream {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
