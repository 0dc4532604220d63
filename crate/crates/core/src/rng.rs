//! Seeded random streams with a stable key-derivation scheme.
//!
//! Every random draw in the crate flows from a root seed through
//! [`keyed_rng`], so any component can open an independent, reproducible
//! stream identified by a domain string plus arbitrary key parts. The
//! derivation is FNV-1a over length-prefixed parts expanded with
//! splitmix64 into a ChaCha12 key, so identical inputs yield bit-identical
//! streams on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Open the reproducible random stream identified by `(root_seed, domain, parts)`.
pub fn keyed_rng(root_seed: u64, domain: &str, parts: &[&[u8]]) -> ChaCha12Rng {
    let mut hash = fnv1a(FNV_OFFSET, domain.as_bytes());
    hash = fnv1a(hash, &root_seed.to_le_bytes());
    for part in parts {
        hash = fnv1a(hash, &(part.len() as u64).to_le_bytes());
        hash = fnv1a(hash, part);
    }
    let mut state = hash;
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_key_same_stream() {
        let mut a = keyed_rng(7, "noise", &[b"p", &42u64.to_le_bytes()]);
        let mut b = keyed_rng(7, "noise", &[b"p", &42u64.to_le_bytes()]);
        for _ in 0..16 {
            assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
    }

    #[test]
    fn different_domain_different_stream() {
        let mut a = keyed_rng(7, "noise", &[b"p"]);
        let mut b = keyed_rng(7, "offset", &[b"p"]);
        let draws_a: Vec<u64> = (0..4).map(|_| a.random()).collect();
        let draws_b: Vec<u64> = (0..4).map(|_| b.random()).collect();
        assert_ne!(draws_a, draws_b);
    }

    #[test]
    fn part_boundaries_matter() {
        // ["ab", "c"] and ["a", "bc"] must not collide.
        let mut a = keyed_rng(0, "d", &[b"ab", b"c"]);
        let mut b = keyed_rng(0, "d", &[b"a", b"bc"]);
        assert_ne!(a.random::<u64>(), b.random::<u64>());
    }
}
