use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Identifies one reproducible stream of random numbers.
///
/// Backed by ChaCha8, whose 64-bit stream parameter selects an independent
/// keystream for the same seed, so parallel workers can each own a stream
/// without coordinating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Packs (experiment point, chunk, lane) into a stream id.
///
/// 24 bits of point, 32 bits of chunk and 8 bits of lane. Lanes separate
/// the independent sequences a single chunk may need.
pub fn stream_id(point: u32, chunk: u32, lane: u8) -> u64 {
    debug_assert!(point < (1 << 24));
    ((point as u64) << 40) | ((chunk as u64) << 8) | lane as u64
}
