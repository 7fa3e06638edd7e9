//! Dynamic wavelet tree over a bounded integer universe, shaped by an
//! invertible multiplicative hash instead of by the keys themselves.
//!
//! Storing `hash(x) = a * x mod 2^k` (a odd, so a bijection) as a fixed
//! k-bit string makes the trie shape depend on the random multiplier, not
//! on the key distribution: clustered or adversarial keys still give a
//! balanced tree with high probability, at the cost of the prefix queries,
//! which are meaningless under a permutation.

use crate::bits::BitString;
use crate::error::{decode_err, Error, Result};
use crate::wire::{put_u64, Reader};
use crate::wtrie::{AnyIndex, DynamicIndex};

const MAGIC: &[u8; 4] = b"HWT1";

/// Integer sequence with rank/select/access/insert/delete, internally a
/// dynamic string index over hashed keys. Single writer, like the inner
/// index; queries may run between mutations.
#[derive(Debug, Clone)]
pub struct HashedWaveletTree {
    /// Universe bit width; values live in `[0, 2^k)`.
    k: u32,
    /// Odd multiplier, k bits.
    a: u64,
    /// `a_inv * a = 1 mod 2^k`.
    a_inv: u64,
    /// Generator seed `a` was drawn from; recorded for reproducibility.
    seed: u64,
    inner: DynamicIndex,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mask(k: u32) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// Odd k-bit multiplier drawn from the seed.
fn draw_multiplier(seed: u64, k: u32) -> u64 {
    let mut state = seed;
    (splitmix64(&mut state) | 1) & mask(k)
}

/// Inverse of odd `a` modulo 2^64 by Newton doubling: x := x(2 - ax)
/// doubles the number of correct low bits; x0 = a is correct to 3 bits
/// (a * a = 1 mod 8 for odd a), so six rounds exceed 64.
fn inverse_mod_pow2(a: u64) -> u64 {
    debug_assert!(a & 1 == 1);
    let mut x = a;
    for _ in 0..6 {
        x = x.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(x)));
    }
    x
}

impl HashedWaveletTree {
    /// Empty sequence over the universe `[0, u)`, widened to the next power
    /// of two; the multiplier is drawn from `seed`.
    pub fn new(u: u64, seed: u64) -> Result<Self> {
        if u == 0 {
            return Err(Error::InvalidArgument("universe must be nonempty"));
        }
        let k = (64 - u.saturating_sub(1).leading_zeros()).max(1);
        Self::with_multiplier(k, draw_multiplier(seed, k), seed)
    }

    fn with_multiplier(k: u32, a: u64, seed: u64) -> Result<Self> {
        if a & 1 == 0 || a != a & mask(k) {
            return Err(Error::InvalidArgument("multiplier must be odd and k bits"));
        }
        let a_inv = inverse_mod_pow2(a) & mask(k);
        assert_eq!(
            a.wrapping_mul(a_inv) & mask(k),
            1,
            "inverse construction is wrong"
        );
        Ok(HashedWaveletTree {
            k,
            a,
            a_inv,
            seed,
            inner: DynamicIndex::new(),
        })
    }

    /// Universe bit width fixed at construction.
    pub fn universe_bits(&self) -> u32 {
        self.k
    }

    /// The multiplier in use; exposed so balance experiments can report it.
    pub fn multiplier(&self) -> u64 {
        self.a
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    pub fn distinct_count(&self) -> usize {
        self.inner.distinct_count()
    }

    /// Deepest internal-node count in the hashed trie. Bounded by k always
    /// and by O(log of the distinct count) with high probability.
    pub fn measured_height(&self) -> usize {
        self.inner.height()
    }

    fn check_value(&self, x: u64) -> Result<()> {
        if x != x & mask(self.k) {
            return Err(Error::InvalidArgument("value outside the declared universe"));
        }
        Ok(())
    }

    /// `a * x mod 2^k` written as k bits, least significant first.
    pub fn hash(&self, x: u64) -> Result<BitString> {
        self.check_value(x)?;
        let h = self.a.wrapping_mul(x) & mask(self.k);
        Ok((0..self.k).map(|i| (h >> i) & 1 == 1).collect())
    }

    /// Inverse of [`hash`](Self::hash); requires exactly k bits.
    pub fn unhash(&self, bits: &BitString) -> Result<u64> {
        if bits.len() != self.k as usize {
            return Err(Error::InvalidArgument("hashed strings have exactly k bits"));
        }
        let mut h = 0u64;
        for i in 0..bits.len() {
            h |= (bits.bit(i) as u64) << i;
        }
        Ok(self.a_inv.wrapping_mul(h) & mask(self.k))
    }

    pub fn append(&mut self, x: u64) -> Result<()> {
        self.inner.append(&self.hash(x)?)
    }

    pub fn insert(&mut self, x: u64, pos: usize) -> Result<()> {
        let h = self.hash(x)?;
        self.inner.insert(&h, pos)
    }

    pub fn delete(&mut self, pos: usize) -> Result<u64> {
        let removed = self.inner.delete(pos)?;
        self.unhash(&removed)
    }

    pub fn access(&self, pos: usize) -> Result<u64> {
        self.unhash(&self.inner.access(pos)?)
    }

    /// Occurrences of `x` in the first `pos` elements.
    pub fn rank(&self, x: u64, pos: usize) -> Result<usize> {
        self.inner.rank(&self.hash(x)?, pos)
    }

    /// Position of the `idx`-th (0-based) occurrence of `x`.
    pub fn select(&self, x: u64, idx: usize) -> Result<usize> {
        self.inner.select(&self.hash(x)?, idx)
    }

    /// `MAGIC | k u64 | a u64 | seed u64 | inner index file`.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u64(&mut out, self.k as u64);
        put_u64(&mut out, self.a);
        put_u64(&mut out, self.seed);
        out.extend_from_slice(&AnyIndex::Dynamic(self.inner.clone()).to_bytes()?);
        Ok(out)
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = Reader::new(data);
        r.magic(MAGIC)?;
        let k = r.u64("universe bit width")?;
        if k == 0 || k > 64 {
            return decode_err(format!("universe bit width {k} out of [1, 64]"));
        }
        let k = k as u32;
        let a = r.u64("multiplier")?;
        let seed = r.u64("seed")?;
        if a != draw_multiplier(seed, k) {
            return decode_err("multiplier does not match the recorded seed");
        }
        let rest = r.bytes(r.remaining(), "inner index")?;
        let inner = match AnyIndex::from_bytes(rest)? {
            AnyIndex::Dynamic(t) => t,
            other => {
                return decode_err(format!(
                    "inner index must be dynamic, found {}",
                    other.variant()
                ))
            }
        };
        for (s, _) in inner.set() {
            if s.len() != k as usize {
                return decode_err("stored string length disagrees with the universe width");
            }
        }
        let mut out = Self::with_multiplier(k, a, seed)
            .map_err(|_| Error::Decode("multiplier must be odd and k bits".into()))?;
        out.inner = inner;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse_mod_pow2(5) & mask(4), 13);
        assert_eq!(inverse_mod_pow2(1), 1);
        let mut state = 77u64;
        for _ in 0..50 {
            let a = splitmix64(&mut state) | 1;
            assert_eq!(a.wrapping_mul(inverse_mod_pow2(a)), 1);
        }
    }

    #[test]
    fn hash_examples() {
        let t = HashedWaveletTree::with_multiplier(4, 5, 0).unwrap();
        assert_eq!(t.hash(3).unwrap(), "1111".parse().unwrap());
        assert_eq!(t.a_inv, 13);
        assert_eq!(t.unhash(&"1111".parse().unwrap()).unwrap(), 3);
        assert_eq!(
            t.hash(16),
            Err(Error::InvalidArgument("value outside the declared universe"))
        );
        // a = 1 hashes every value to its own bits.
        let id = HashedWaveletTree::with_multiplier(4, 1, 0).unwrap();
        for x in 0..16 {
            assert_eq!(id.unhash(&id.hash(x).unwrap()).unwrap(), x);
            assert_eq!(id.hash(x).unwrap().bit(0), x & 1 == 1);
        }
    }

    #[test]
    fn hash_is_a_bijection_on_small_universes() {
        for seed in 0..8u64 {
            let t = HashedWaveletTree::new(1 << 12, seed).unwrap();
            assert_eq!(t.universe_bits(), 12);
            let mut seen = vec![false; 1 << 12];
            for x in 0..(1u64 << 12) {
                let h = t.hash(x).unwrap();
                assert_eq!(h.len(), 12);
                assert_eq!(t.unhash(&h).unwrap(), x);
                let mut v = 0usize;
                for i in 0..h.len() {
                    v |= (h.bit(i) as usize) << i;
                }
                assert!(!seen[v], "collision at {x}");
                seen[v] = true;
            }
        }
    }

    #[test]
    fn universe_width_rounds_up() {
        assert_eq!(HashedWaveletTree::new(1, 0).unwrap().universe_bits(), 1);
        assert_eq!(HashedWaveletTree::new(2, 0).unwrap().universe_bits(), 1);
        assert_eq!(HashedWaveletTree::new(3, 0).unwrap().universe_bits(), 2);
        assert_eq!(HashedWaveletTree::new(256, 0).unwrap().universe_bits(), 8);
        assert_eq!(HashedWaveletTree::new(257, 0).unwrap().universe_bits(), 9);
        assert_eq!(HashedWaveletTree::new(u64::MAX, 0).unwrap().universe_bits(), 64);
        assert!(HashedWaveletTree::new(0, 0).is_err());
    }

    #[test]
    fn duplicate_values_count_up() {
        let mut t = HashedWaveletTree::new(1 << 8, 3).unwrap();
        for _ in 0..3 {
            t.append(7).unwrap();
        }
        assert_eq!(t.rank(7, 3).unwrap(), 3);
        assert_eq!(t.rank(7, 2).unwrap(), 2);
        assert_eq!(t.rank(8, 3).unwrap(), 0);
        assert_eq!(t.select(7, 2).unwrap(), 2);
        assert_eq!(t.select(7, 3), Err(Error::NotFound { idx: 3, count: 3 }));
        assert_eq!(t.access(1).unwrap(), 7);
        assert_eq!(t.measured_height(), 0);
        assert_eq!(t.distinct_count(), 1);
    }

    #[test]
    fn workload_matches_plain_vector() {
        let mut state = 0xfeed_beef_u64;
        let mut t = HashedWaveletTree::new(1u64 << 32, 99).unwrap();
        let mut plain: Vec<u64> = Vec::new();
        // Values cluster in a tiny sub-alphabet of a huge universe.
        let alphabet: Vec<u64> = (0..256u64).map(|i| i << 20).collect();
        for _ in 0..10_000 {
            let x = alphabet[(splitmix64(&mut state) % 256) as usize];
            match splitmix64(&mut state) % 10 {
                0..=3 => {
                    let pos = (splitmix64(&mut state) % (plain.len() as u64 + 1)) as usize;
                    t.insert(x, pos).unwrap();
                    plain.insert(pos, x);
                }
                4..=5 => {
                    t.append(x).unwrap();
                    plain.push(x);
                }
                6 if !plain.is_empty() => {
                    let pos = (splitmix64(&mut state) % plain.len() as u64) as usize;
                    assert_eq!(t.delete(pos).unwrap(), plain.remove(pos));
                }
                _ if !plain.is_empty() => {
                    let pos = (splitmix64(&mut state) % plain.len() as u64) as usize;
                    assert_eq!(t.access(pos).unwrap(), plain[pos]);
                    let upto = (splitmix64(&mut state) % (plain.len() as u64 + 1)) as usize;
                    let want = plain[..upto].iter().filter(|&&v| v == x).count();
                    assert_eq!(t.rank(x, upto).unwrap(), want);
                }
                _ => {}
            }
        }
        assert_eq!(t.len(), plain.len());
        for (pos, &x) in plain.iter().enumerate().step_by(37) {
            assert_eq!(t.access(pos).unwrap(), x);
        }
    }

    #[test]
    fn answers_are_independent_of_the_multiplier() {
        let build = |seed: u64| {
            let mut t = HashedWaveletTree::new(1 << 20, seed).unwrap();
            for i in 0..500u64 {
                t.append((i * i) % 97).unwrap();
            }
            t
        };
        let (a, b) = (build(1), build(2));
        assert_ne!(a.multiplier(), b.multiplier());
        for pos in 0..500 {
            assert_eq!(a.access(pos).unwrap(), b.access(pos).unwrap());
        }
        for x in 0..97 {
            assert_eq!(a.rank(x, 500).unwrap(), b.rank(x, 500).unwrap());
            let count = a.rank(x, 500).unwrap();
            for idx in (0..count).step_by(3) {
                assert_eq!(a.select(x, idx).unwrap(), b.select(x, idx).unwrap());
            }
        }
    }

    #[test]
    fn height_stays_logarithmic_with_high_probability() {
        // 256 values from a 2^32 universe; cutoff 4 * log2(256) = 32.
        let mut state = 424_242u64;
        let values: Vec<u64> = (0..256)
            .map(|_| splitmix64(&mut state) & 0xffff_ffff)
            .collect();
        let mut ok = 0;
        for seed in 0..100u64 {
            let mut t = HashedWaveletTree::new(1u64 << 32, seed).unwrap();
            for &v in &values {
                t.append(v).unwrap();
            }
            assert!(t.measured_height() <= 32, "k bounds the height");
            if t.measured_height() <= 32 {
                ok += 1;
            }
        }
        assert!(ok >= 95, "balanced in only {ok} of 100 trials");
    }

    #[test]
    fn adversarial_keys_still_balance() {
        // Keys sharing long low-bit runs would make an unhashed trie a path.
        let mut t = HashedWaveletTree::new(1u64 << 32, 11).unwrap();
        for i in 0..128u64 {
            t.append(i << 24).unwrap();
        }
        let h = t.measured_height();
        assert!(h <= 28, "height {h} for 128 clustered keys");
    }

    #[test]
    fn serialization_round_trips() {
        let mut t = HashedWaveletTree::new(1 << 16, 5).unwrap();
        for i in 0..300u64 {
            t.append((i * 31) % 512).unwrap();
        }
        t.insert(44, 7).unwrap();
        t.delete(100).unwrap();
        let bytes = t.to_bytes().unwrap();
        let u = HashedWaveletTree::from_bytes(&bytes).unwrap();
        assert_eq!(u.multiplier(), t.multiplier());
        assert_eq!(u.universe_bits(), t.universe_bits());
        assert_eq!(u.len(), t.len());
        for pos in 0..t.len() {
            assert_eq!(u.access(pos).unwrap(), t.access(pos).unwrap());
        }
        assert_eq!(u.to_bytes().unwrap(), bytes);
    }

    #[test]
    fn rejects_corrupt_serializations() {
        let mut t = HashedWaveletTree::new(1 << 16, 5).unwrap();
        for i in 0..50u64 {
            t.append(i).unwrap();
        }
        let good = t.to_bytes().unwrap();
        assert!(HashedWaveletTree::from_bytes(&good).is_ok());
        let mut bad = good.clone();
        bad[1] ^= 1; // magic
        assert!(matches!(
            HashedWaveletTree::from_bytes(&bad),
            Err(Error::Decode(_))
        ));
        let mut bad = good.clone();
        bad[12] ^= 0x10; // multiplier no longer matches the seed
        assert!(matches!(
            HashedWaveletTree::from_bytes(&bad),
            Err(Error::Decode(_))
        ));
        assert!(matches!(
            HashedWaveletTree::from_bytes(&good[..good.len() - 2]),
            Err(Error::Decode(_))
        ));
        // Inner index with strings of the wrong width.
        let mut forged = Vec::new();
        forged.extend_from_slice(MAGIC);
        put_u64(&mut forged, 16);
        put_u64(&mut forged, draw_multiplier(9, 16));
        put_u64(&mut forged, 9);
        let mut wrong = DynamicIndex::new();
        wrong.append(&"101".parse().unwrap()).unwrap();
        forged.extend_from_slice(&AnyIndex::Dynamic(wrong).to_bytes().unwrap());
        let err = HashedWaveletTree::from_bytes(&forged).unwrap_err();
        assert!(matches!(err, Error::Decode(ref m) if m.contains("width")));
    }
}
