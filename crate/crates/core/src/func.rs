//! The one-way function registry and the deterministic mixing primitive that
//! seeds every pseudo-random choice in the crate.

use md5::{Digest, Md5};

use crate::Error;

/// 64-bit finalizer of the splitmix64 generator (Stafford variant 13).
/// Bijective on `u64`; used as the stand-in pseudo-random function and as
/// the seed-mixing primitive for starting points and targets.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fixed key for the `prf-test` function. Arbitrary odd constant; changing it
/// would invalidate every stored table built with `prf-test`.
const PRF_TEST_KEY: u64 = 0xA076_1D64_78BD_642F;

/// Registered one-way functions.
///
/// * `md5-trunc` — encode `x` as 8 bytes little-endian, hash with MD5, read
///   the first 8 digest bytes as a little-endian integer, reduce mod `N`.
/// * `prf-test` — keyed mixing permutation then truncation:
///   `mix64(x + KEY) mod N`. Much faster than MD5; intended for tests and
///   small-space experiments. The construction is fixed for compatibility
///   with stored tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OneWayFn {
    Md5Trunc,
    PrfTest,
}

impl OneWayFn {
    pub fn from_id(id: &str) -> Result<Self, Error> {
        match id {
            "md5-trunc" => Ok(OneWayFn::Md5Trunc),
            "prf-test" => Ok(OneWayFn::PrfTest),
            other => Err(Error::UnknownFunction(other.to_string())),
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            OneWayFn::Md5Trunc => "md5-trunc",
            OneWayFn::PrfTest => "prf-test",
        }
    }

    /// One application of the raw function on the integer domain; the caller
    /// supplies `mask = N - 1`.
    #[inline]
    pub fn eval_raw(self, x: u64, mask: u64) -> u64 {
        match self {
            OneWayFn::Md5Trunc => {
                let digest = Md5::digest(x.to_le_bytes());
                u64::from_le_bytes(digest[..8].try_into().unwrap()) & mask
            }
            OneWayFn::PrfTest => mix64(x.wrapping_add(PRF_TEST_KEY)) & mask,
        }
    }
}

impl serde::Serialize for OneWayFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_roundtrip() {
        for f in [OneWayFn::Md5Trunc, OneWayFn::PrfTest] {
            assert_eq!(OneWayFn::from_id(f.id()).unwrap(), f);
        }
        assert!(matches!(
            OneWayFn::from_id("sha4"),
            Err(Error::UnknownFunction(_))
        ));
    }

    #[test]
    fn md5_trunc_golden_values() {
        // Pinned against an independent MD5 implementation
        // (hashlib: md5(x.to_bytes(8,'little')).digest()[:8] little-endian).
        let mask24 = (1u64 << 24) - 1;
        let mask12 = (1u64 << 12) - 1;
        assert_eq!(
            OneWayFn::Md5Trunc.eval_raw(0, u64::MAX),
            0x008e_ac3f_2b36_ea7d
        );
        assert_eq!(OneWayFn::Md5Trunc.eval_raw(0, mask24), 3_598_973);
        assert_eq!(OneWayFn::Md5Trunc.eval_raw(1, mask24), 15_519_027);
        assert_eq!(OneWayFn::Md5Trunc.eval_raw(123_456, mask24), 16_069_118);
        assert_eq!(OneWayFn::Md5Trunc.eval_raw(0, mask12), 2_685);
        assert_eq!(OneWayFn::Md5Trunc.eval_raw(7, mask12), 3_829);
    }

    #[test]
    fn prf_test_deterministic() {
        let mask = (1u64 << 24) - 1;
        for x in [0u64, 1, 42, mask] {
            assert_eq!(
                OneWayFn::PrfTest.eval_raw(x, mask),
                OneWayFn::PrfTest.eval_raw(x, mask)
            );
            assert!(OneWayFn::PrfTest.eval_raw(x, mask) <= mask);
        }
    }

    #[test]
    fn mix64_bijective_on_low_values() {
        // Injectivity spot check; mix64 is a bijection on u64 by construction.
        let mut seen = std::collections::HashSet::new();
        for x in 0u64..10_000 {
            assert!(seen.insert(mix64(x)));
        }
    }
}
