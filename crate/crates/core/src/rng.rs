//! Counter-based, splittable random streams.
//!
//! Every stream is addressed by a `(seed, stream)` key plus a small
//! sub-stream number, so a Monte-Carlo task indexed by `i` always sees the
//! same numbers no matter which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Address of an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub stream: u64,
}

/// Sub-stream numbers used by the samplers.
pub(crate) mod sub {
    pub const FORWARD: u64 = 0;
    pub const BACKWARD: u64 = 1;
    pub const PERIOD: u64 = 2;
    pub const MEMBER: u64 = 3;
    pub const SAMPLES: u64 = 4;
}

impl StreamKey {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Generator for one sub-stream of this key.
    pub fn rng(&self, sub: u64) -> ChaCha8Rng {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&self.seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&self.stream.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(bytes);
        rng.set_stream(sub);
        rng
    }
}

/// Derive a fresh seed from a parent seed and a label (splitmix64 finalizer).
pub fn derive_seed(parent: u64, label: u64) -> u64 {
    let mut z = parent ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
