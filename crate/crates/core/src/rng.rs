//! Reproducible random streams.
//!
//! Every experiment starts from one root seed. A *purpose* label (for example
//! `"clt/birkhoff"`) is hashed together with the root into a ChaCha8 key, and
//! ensemble member `i` reads from ChaCha stream number `i` under that key.
//! Member streams therefore depend only on `(root, purpose, i)`: the same
//! member sees the same numbers no matter how members are spread over worker
//! threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Key material for a family of per-member random streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamSeed {
    root: u64,
    key: u64,
}

impl StreamSeed {
    pub fn new(root: u64, purpose: &str) -> Self {
        Self {
            root,
            key: splitmix64(root ^ fnv1a(purpose.as_bytes())),
        }
    }

    /// A child family, e.g. for the variance pre-pass of a block experiment.
    pub fn derive(&self, purpose: &str) -> Self {
        Self {
            root: self.root,
            key: splitmix64(self.key ^ fnv1a(purpose.as_bytes())),
        }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// The random stream owned by ensemble member `index`.
    pub fn member(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.key);
        rng.set_stream(index);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}
