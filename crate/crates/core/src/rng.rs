//! Seed derivation for reproducible, order-independent sweeps.
//!
//! Every random stream is a ChaCha8 generator whose seed is derived from a
//! master seed and a path of indices (cell, bounce count, restart) through
//! the SplitMix64 finaliser. A cell's randomness never depends on which
//! thread evaluates it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function.
pub fn mix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(mix64(master), |acc, &part| mix64(acc ^ mix64(part)))
}

pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn splitmix_reference_values() {
        // first outputs of SplitMix64 seeded with 0
        assert_eq!(mix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(mix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn paths_are_distinct_and_stable() {
        assert_ne!(derive_seed(42, &[0, 1]), derive_seed(42, &[1, 0]));
        assert_ne!(derive_seed(42, &[3]), derive_seed(43, &[3]));
        let a: f64 = stream(42, &[7, 2, 3]).random();
        let b: f64 = stream(42, &[7, 2, 3]).random();
        assert_eq!(a, b);
    }
}
