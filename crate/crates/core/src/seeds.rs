//! Deterministic seed derivation.
//!
//! Every randomized component takes one top-level `u64` seed and derives an
//! independent stream per component (or per study cell) with a SplitMix64 mix of
//! `(master, stream)`. The scheme is fixed and documented here so that runs are
//! reproducible byte-for-byte from `(config, seed)` alone, independent of thread
//! scheduling: parallel study cells each get `derive(master, cell_index)` and never
//! share RNG state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed for stream `stream` under master seed `master`.
///
/// Two SplitMix64 steps: the first whitens the master seed, the second folds the
/// stream index in. Distinct `(master, stream)` pairs give (for all practical
/// purposes) independent seeds, and the map is pure.
pub fn derive(master: u64, stream: u64) -> u64 {
    let mut s = master;
    let whitened = splitmix64(&mut s);
    let mut s2 = whitened ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03);
    splitmix64(&mut s2)
}

/// A ChaCha8 generator for stream `stream` under `master`.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, stream))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn derivation_is_pure_and_stream_sensitive() {
        assert_eq!(derive(42, 0), derive(42, 0), "same inputs must give same seed");
        assert_ne!(derive(42, 0), derive(42, 1), "streams must differ");
        assert_ne!(derive(42, 0), derive(43, 0), "masters must differ");
    }

    #[test]
    fn stream_rngs_reproduce_and_do_not_collide() {
        let mut a = stream_rng(7, 3);
        let mut b = stream_rng(7, 3);
        let mut c = stream_rng(7, 4);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb, "identical streams must replay identically");
        assert_ne!(xa, xc, "distinct streams should decorrelate immediately");
    }
}
