//! Deterministic RNG stream derivation.
//!
//! A [`Stream`] is a 64-bit key. Child streams are derived by mixing a label
//! into the key, so parallel workers can be handed disjoint generators that
//! depend only on (seed, labels), never on scheduling. The same tree of
//! labels therefore produces the same draws sequentially and in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key for a deterministic, splittable random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stream {
    key: u64,
}

impl Stream {
    pub fn root(seed: u64) -> Self {
        let mut s = seed;
        // One mixing round so that nearby user seeds land on distant keys.
        Stream {
            key: splitmix64(&mut s),
        }
    }

    /// Derives the `label`-th child stream. Distinct (key, label) pairs map
    /// to distinct keys except for negligible 64-bit collisions.
    pub fn child(self, label: u64) -> Self {
        let mut s = self.key
            ^ label
                .wrapping_mul(GOLDEN)
                .wrapping_add(0xD1B5_4A32_D192_ED03);
        Stream {
            key: splitmix64(&mut s),
        }
    }

    pub fn key(self) -> u64 {
        self.key
    }

    /// Expands the key into a full 256-bit ChaCha seed.
    pub fn rng(self) -> ChaCha8Rng {
        let mut state = self.key;
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}
