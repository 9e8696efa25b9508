//! Reproducible seed derivation.
//!
//! Every random draw in the crate comes from a [`RngSeed`]. Child seeds are derived from a
//! parent by hashing `(master, label, index)`, so a stream only depends on its own label path
//! and never on how many sibling streams were drawn before it.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed {
    master: u64,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, byte| (h ^ byte as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

impl RngSeed {
    pub const fn new(master: u64) -> Self {
        RngSeed { master }
    }

    #[inline]
    pub fn master(self) -> u64 {
        self.master
    }

    /// Child seed for stream `(label, index)`.
    pub fn derive(self, label: &str, index: u64) -> RngSeed {
        let h = splitmix64(self.master ^ splitmix64(fnv1a(label)));
        RngSeed { master: splitmix64(h ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019))) }
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.master)
    }
}

/// Uniform digit in `0..b`.
#[inline]
pub(crate) fn digit<R: Rng + ?Sized>(rng: &mut R, b: u8) -> u8 {
    rng.gen_range(0..b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn derivation_is_deterministic_and_label_sensitive() {
        let s = RngSeed::new(42);
        assert_eq!(s.derive("dim", 3), s.derive("dim", 3));
        assert_ne!(s.derive("dim", 3), s.derive("dim", 4));
        assert_ne!(s.derive("dim", 3), s.derive("shift", 3));
        assert_ne!(s.derive("dim", 3), RngSeed::new(43).derive("dim", 3));
        let a: u64 = s.derive("dim", 0).rng().next_u64();
        let b: u64 = s.derive("dim", 0).rng().next_u64();
        assert_eq!(a, b);
    }
}
