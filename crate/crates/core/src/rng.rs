//! Seeded random substreams.
//!
//! One run seed fans out into independent ChaCha8 streams, one per
//! `(purpose, key)` pair, so a draw for one tweet or day never depends on
//! how many other draws happened before it or on which thread ran them.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

/// Derive the generator for `purpose` and `key` from the run seed.
pub fn substream(seed: u64, purpose: &str, key: &str) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(b"tg-substream-v1");
    hasher.update(seed.to_le_bytes());
    hasher.update((purpose.len() as u64).to_le_bytes());
    hasher.update(purpose.as_bytes());
    hasher.update((key.len() as u64).to_le_bytes());
    hasher.update(key.as_bytes());
    ChaCha8Rng::from_seed(hasher.finalize().into())
}

/// Uniform sample of `amount` distinct positions out of `len`, returned in
/// increasing order so callers keep the input ordering.
pub(crate) fn sorted_sample(rng: &mut Stream, len: usize, amount: usize) -> Vec<usize> {
    debug_assert!(amount <= len);
    let mut picked = index::sample(rng, len, amount).into_vec();
    picked.sort_unstable();
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_separated() {
        let a: u64 = substream(7, "x", "k").random();
        let b: u64 = substream(7, "x", "k").random();
        assert_eq!(a, b);
        assert_ne!(a, substream(7, "x", "k2").random::<u64>());
        assert_ne!(a, substream(7, "y", "k").random::<u64>());
        assert_ne!(a, substream(8, "x", "k").random::<u64>());
        // length prefixes keep ("ab","c") and ("a","bc") apart
        assert_ne!(
            substream(1, "ab", "c").random::<u64>(),
            substream(1, "a", "bc").random::<u64>()
        );
    }

    #[test]
    fn sorted_sample_is_distinct_and_ordered() {
        let mut rng = substream(3, "t", "");
        let s = sorted_sample(&mut rng, 100, 30);
        assert_eq!(s.len(), 30);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert!(sorted_sample(&mut rng, 5, 0).is_empty());
        assert_eq!(sorted_sample(&mut rng, 5, 5), vec![0, 1, 2, 3, 4]);
    }
}
