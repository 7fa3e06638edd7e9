//! Bit-level foundations: packed bit buffers, word rank/select primitives,
//! Elias gamma/delta codecs, prefix-free byte-string binarization, and the
//! entropy/binomial arithmetic used by space accounting.
//!
//! Bit `i` of a [`BitString`] lives in bit `i % 64` of word `i / 64`
//! (least-significant bit first), so a word-level rank is a mask and a
//! popcount.

use std::fmt;
use std::str::FromStr;

use crate::error::{decode_err, Error, Result};
use crate::wire::{put_u64, Reader};

/// Number of `b`-bits of `word` strictly before bit `pos` (`pos <= 64`).
#[inline]
pub fn rank_word(word: u64, pos: u32, b: bool) -> u32 {
    debug_assert!(pos <= 64);
    let masked = if pos >= 64 { word } else { word & ((1u64 << pos) - 1) };
    let ones = masked.count_ones();
    if b {
        ones
    } else {
        pos - ones
    }
}

/// Position of the `(idx+1)`-th `b`-bit of `word`, if it exists.
#[inline]
pub fn select_word(word: u64, idx: u32, b: bool) -> Option<u32> {
    let mut w = if b { word } else { !word };
    if w.count_ones() <= idx {
        return None;
    }
    for _ in 0..idx {
        w &= w - 1; // clear lowest set bit
    }
    Some(w.trailing_zeros())
}

/// A growable sequence of bits with value semantics.
///
/// Equality, ordering and hashing look at the logical bits only; unused
/// high bits of the last word are kept zero so the derived impls are exact.
/// Ordering is lexicographic, with a proper prefix sorting before its
/// extensions.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitString {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    /// A run of `len` copies of `b`.
    pub fn repeat(b: bool, len: usize) -> Self {
        let mut words = vec![if b { !0u64 } else { 0 }; len.div_ceil(64)];
        if b && len % 64 != 0 {
            *words.last_mut().unwrap() = (1u64 << (len % 64)) - 1;
        }
        BitString { words, len }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> Option<bool> {
        if i < self.len {
            Some(self.words[i / 64] >> (i % 64) & 1 == 1)
        } else {
            None
        }
    }

    /// Bit at index `i`. Panics if out of range.
    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn push(&mut self, b: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        if b {
            *self.words.last_mut().unwrap() |= 1u64 << (self.len % 64);
        }
        self.len += 1;
    }

    /// Appends the `n` low bits of `word`, lowest first.
    pub fn push_word(&mut self, word: u64, n: u32) {
        debug_assert!(n <= 64);
        debug_assert!(n == 64 || word >> n == 0, "word has bits above n");
        if n == 0 {
            return;
        }
        let off = self.len % 64;
        if off == 0 {
            self.words.push(word);
        } else {
            *self.words.last_mut().unwrap() |= word << off;
            if off + n as usize > 64 {
                self.words.push(word >> (64 - off));
            }
        }
        self.len += n as usize;
    }

    /// The `n` bits starting at `start`, packed low-first into a word.
    pub fn get_word(&self, start: usize, n: u32) -> u64 {
        debug_assert!(n <= 64 && start + n as usize <= self.len);
        if n == 0 {
            return 0;
        }
        let w = start / 64;
        let off = start % 64;
        let mut out = self.words[w] >> off;
        if off + n as usize > 64 {
            out |= self.words[w + 1] << (64 - off);
        }
        if n < 64 {
            out &= (1u64 << n) - 1;
        }
        out
    }

    /// Shortens to `n` bits. No-op if already at most `n` long.
    pub fn truncate(&mut self, n: usize) {
        if n >= self.len {
            return;
        }
        self.len = n;
        self.words.truncate(n.div_ceil(64));
        // Keep dropped positions zeroed; serialization and equality assume
        // padding bits above `len` are clear.
        if n % 64 != 0 {
            *self.words.last_mut().unwrap() &= (1u64 << (n % 64)) - 1;
        }
    }

    pub fn extend(&mut self, other: &BitString) {
        self.extend_range(other, 0, other.len);
    }

    /// Appends `other[start..end)`.
    pub fn extend_range(&mut self, other: &BitString, start: usize, end: usize) {
        debug_assert!(start <= end && end <= other.len);
        let mut i = start;
        while i < end {
            let n = (end - i).min(64) as u32;
            self.push_word(other.get_word(i, n), n);
            i += n as usize;
        }
    }

    /// Copy of `self[start..end)`.
    pub fn slice(&self, start: usize, end: usize) -> BitString {
        let mut out = BitString::with_capacity(end - start);
        out.extend_range(self, start, end);
        out
    }

    /// Number of `b`-bits strictly before `pos` by word scan.
    pub fn rank(&self, b: bool, pos: usize) -> usize {
        assert!(pos <= self.len);
        let mut ones = 0u32 as usize;
        for w in 0..pos / 64 {
            ones += self.words[w].count_ones() as usize;
        }
        if pos % 64 != 0 {
            ones += rank_word(self.words[pos / 64], (pos % 64) as u32, true) as usize;
        }
        if b {
            ones
        } else {
            pos - ones
        }
    }

    pub fn count(&self, b: bool) -> usize {
        self.rank(b, self.len)
    }

    /// Length of the longest common prefix of `self[from..]` and
    /// `other[other_from..]`.
    pub fn common_prefix(&self, from: usize, other: &BitString, other_from: usize) -> usize {
        let max = (self.len - from).min(other.len - other_from);
        let mut done = 0usize;
        while done < max {
            let n = (max - done).min(64) as u32;
            let x = self.get_word(from + done, n) ^ other.get_word(other_from + done, n);
            if x != 0 {
                return done + (x.trailing_zeros().min(n)) as usize;
            }
            done += n as usize;
        }
        max
    }

    pub fn starts_with(&self, prefix: &BitString) -> bool {
        prefix.len <= self.len && self.common_prefix(0, prefix, 0) == prefix.len
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Heap footprint of the payload in bits (capacity is ignored; this is
    /// the size the buffer serializes to, minus the length header).
    pub fn payload_bits(&self) -> usize {
        self.len.div_ceil(64) * 64
    }

    pub fn write_into(&self, out: &mut Vec<u8>) {
        put_u64(out, self.len as u64);
        for w in &self.words {
            put_u64(out, *w);
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.words.len() * 8);
        self.write_into(&mut out);
        out
    }

    pub fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let len = r.len("bit length")?;
        let nwords = len.div_ceil(64);
        let raw = r.bytes(nwords.saturating_mul(8), "bit words")?;
        let mut words = Vec::with_capacity(nwords);
        for c in raw.chunks_exact(8) {
            words.push(u64::from_le_bytes(c.try_into().unwrap()));
        }
        if len % 64 != 0 && words[nwords - 1] >> (len % 64) != 0 {
            return decode_err("nonzero padding bits after bit string payload");
        }
        Ok(BitString { words, len })
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = Reader::new(data);
        let out = Self::read_from(&mut r)?;
        r.finish("bit string")?;
        Ok(out)
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let common = self.len.min(other.len);
        let mut done = 0usize;
        while done < common {
            let n = (common - done).min(64) as u32;
            let a = self.get_word(done, n);
            let b = other.get_word(done, n);
            let x = a ^ b;
            if x != 0 {
                let i = x.trailing_zeros();
                if i < n {
                    // 0 sorts before 1 at the first differing bit
                    return if a >> i & 1 == 0 {
                        std::cmp::Ordering::Less
                    } else {
                        std::cmp::Ordering::Greater
                    };
                }
            }
            done += n as usize;
        }
        self.len.cmp(&other.len)
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<T: IntoIterator<Item = bool>>(iter: T) -> Self {
        let mut out = BitString::new();
        for b in iter {
            out.push(b);
        }
        out
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = BitString::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => return Err(Error::InvalidArgument("bit strings contain only 0 and 1")),
            }
        }
        Ok(out)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

/// Appends the Elias gamma code of `n` (`n >= 1`): `floor(log2 n)` zeros,
/// then the binary digits of `n` from the most significant down.
pub fn gamma_append(out: &mut BitString, n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("gamma code undefined at 0"));
    }
    let width = 64 - n.leading_zeros(); // bits in n, >= 1
    for _ in 0..width - 1 {
        out.push(false);
    }
    for i in (0..width).rev() {
        out.push(n >> i & 1 == 1);
    }
    Ok(())
}

pub fn gamma_encode(n: u64) -> Result<BitString> {
    let mut out = BitString::new();
    gamma_append(&mut out, n)?;
    Ok(out)
}

/// Decodes one gamma code starting at `offset`; returns the value and the
/// number of bits consumed.
pub fn gamma_decode(bits: &BitString, offset: usize) -> Result<(u64, usize)> {
    let mut i = offset;
    while i < bits.len() && !bits.bit(i) {
        i += 1;
    }
    if i == bits.len() {
        return decode_err("truncated gamma code: no stop bit");
    }
    let zeros = i - offset;
    if zeros >= 64 {
        return decode_err("gamma code exceeds 64-bit range");
    }
    if i + zeros >= bits.len() {
        return decode_err("truncated gamma code: missing value bits");
    }
    let mut v = 1u64;
    for j in 1..=zeros {
        v = v << 1 | bits.bit(i + j) as u64;
    }
    Ok((v, 2 * zeros + 1))
}

/// Appends the Elias delta code of `n`: gamma code of the bit width of `n`,
/// then the digits of `n` below the leading one.
pub fn delta_append(out: &mut BitString, n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("delta code undefined at 0"));
    }
    let width = 64 - n.leading_zeros();
    gamma_append(out, width as u64)?;
    for i in (0..width - 1).rev() {
        out.push(n >> i & 1 == 1);
    }
    Ok(())
}

pub fn delta_decode(bits: &BitString, offset: usize) -> Result<(u64, usize)> {
    let (width, used) = gamma_decode(bits, offset)?;
    if width == 0 || width > 64 {
        return decode_err("delta code width out of range");
    }
    let extra = (width - 1) as usize;
    if offset + used + extra > bits.len() {
        return decode_err("truncated delta code: missing value bits");
    }
    let mut v = 1u64;
    for j in 0..extra {
        v = v << 1 | bits.bit(offset + used + j) as u64;
    }
    Ok((v, used + extra))
}

/// Maps a byte string to bits: each byte becomes a 1-bit then its 8 bits
/// (most significant first); a single 0-bit terminates the string. Images
/// of distinct byte strings are never prefixes of one another.
pub fn binarize(s: &[u8]) -> BitString {
    let mut out = BitString::with_capacity(s.len() * 9 + 1);
    for &c in s {
        out.push(true);
        out.push_word((c as u64).reverse_bits() >> 56, 8);
    }
    out.push(false);
    out
}

/// Inverts [`binarize`]. The input must be exactly one encoded string.
pub fn debinarize(bits: &BitString) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut i = 0usize;
    loop {
        match bits.get(i) {
            None => return decode_err("missing terminator bit"),
            Some(false) => {
                i += 1;
                break;
            }
            Some(true) => {
                if i + 9 > bits.len() {
                    return decode_err("truncated symbol after continuation bit");
                }
                let raw = bits.get_word(i + 1, 8);
                out.push(((raw << 56).reverse_bits() & 0xff) as u8);
                i += 9;
            }
        }
    }
    if i != bits.len() {
        return decode_err("trailing bits after terminator");
    }
    Ok(out)
}

/// Zero-order empirical entropy of a histogram, in bits per symbol.
/// Zero counts are permitted and ignored; a histogram with zero total is
/// rejected.
pub fn zero_order_entropy(counts: &[u64]) -> Result<f64> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::InvalidArgument("entropy of an empty histogram"));
    }
    let n = n as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    Ok(h)
}

/// Entropy of a biased coin, `H(p)`; zero at both endpoints.
pub fn binary_entropy(p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p));
    if p == 0.0 || p == 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// `log2(C(n, m))`, exact to floating point; 0 when `m` is 0 or `n`.
pub fn log2_binomial(m: u64, n: u64) -> f64 {
    assert!(m <= n, "binomial with m > n");
    let m = m.min(n - m);
    let mut s = 0.0;
    for i in 1..=m {
        s += ((n - m + i) as f64 / i as f64).log2();
    }
    s
}

/// `B(m, n) = ceil(log2 C(n, m))`: bits needed to name an `m`-subset of an
/// `n`-element universe.
pub fn binomial_bound(m: u64, n: u64) -> u64 {
    let s = log2_binomial(m, n);
    // C(n,m) is an integer; snap near-integer sums before rounding up.
    let r = s.round();
    if (s - r).abs() < 1e-6 {
        r as u64
    } else {
        s.ceil() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn rank_word_examples() {
        assert_eq!(rank_word(0, 8, true), 0);
        // 10110000 with bit 0 first means bits {0,2,3} set
        let w = 0b0000_1101u64;
        assert_eq!(rank_word(w, 4, true), 3);
        assert_eq!(rank_word(w, 0, false), 0);
        assert_eq!(rank_word(!0u64, 64, true), 64);
        assert_eq!(rank_word(!0u64, 64, false), 0);
    }

    #[test]
    fn rank_word_matches_loop() {
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..100_000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let word = state;
            let pos = (state >> 58) as u32 % 65;
            let naive = (0..pos).filter(|&i| word >> i & 1 == 1).count() as u32;
            assert_eq!(rank_word(word, pos, true), naive);
            assert_eq!(rank_word(word, pos, false), pos - naive);
        }
    }

    #[test]
    fn select_word_inverts_rank() {
        let w = 0b1011_0010u64;
        for b in [false, true] {
            let total = rank_word(w, 64, b);
            for idx in 0..total {
                let p = select_word(w, idx, b).unwrap();
                assert_eq!(rank_word(w, p, b), idx);
                assert_eq!(w >> p & 1 == 1, b);
            }
            assert_eq!(select_word(w, total, b), None);
        }
    }

    #[test]
    fn bitstring_push_get() {
        let mut b = BitString::new();
        assert!(b.is_empty());
        for i in 0..200 {
            b.push(i % 3 == 0);
        }
        assert_eq!(b.len(), 200);
        for i in 0..200 {
            assert_eq!(b.bit(i), i % 3 == 0);
        }
        assert_eq!(b.get(200), None);
    }

    #[test]
    fn bitstring_words_and_slices() {
        let b = bs("0010101");
        // logical bits 2..7 are 1,0,1,0,1 -> packed low-first
        assert_eq!(b.get_word(2, 5), 0b10101);
        assert_eq!(b.slice(2, 7), bs("10101"));
        assert_eq!(b.slice(0, 0), bs(""));
        let mut c = bs("11");
        c.extend(&b);
        assert_eq!(c, bs("110010101"));

        let long = BitString::repeat(true, 130);
        assert_eq!(long.count(true), 130);
        assert_eq!(long.slice(63, 130).len(), 67);
        assert_eq!(long.slice(63, 130).count(false), 0);
    }

    #[test]
    fn bitstring_rank_scan() {
        let b = bs("0010101");
        assert_eq!(b.rank(true, 7), 3);
        assert_eq!(b.rank(false, 7), 4);
        assert_eq!(b.rank(true, 0), 0);
        assert_eq!(b.rank(true, 3), 1);
    }

    #[test]
    fn bitstring_order_is_lexicographic() {
        let mut v = vec![bs("1"), bs("0"), bs("00"), bs(""), bs("01"), bs("001")];
        v.sort();
        let shown: Vec<String> = v.iter().map(|b| b.to_string()).collect();
        assert_eq!(shown, vec!["", "0", "00", "001", "01", "1"]);
    }

    #[test]
    fn bitstring_common_prefix() {
        let a = bs("0010101");
        let b = bs("0010011");
        assert_eq!(a.common_prefix(0, &b, 0), 4);
        assert_eq!(a.common_prefix(2, &b, 2), 2);
        assert_eq!(a.common_prefix(0, &a, 0), 7);
        assert!(a.starts_with(&bs("0010")));
        assert!(!a.starts_with(&bs("01")));
        // crossing word boundaries
        let mut long_a = BitString::repeat(false, 100);
        let mut long_b = BitString::repeat(false, 100);
        long_a.push(true);
        long_b.push(false);
        assert_eq!(long_a.common_prefix(0, &long_b, 0), 100);
    }

    #[test]
    fn bitstring_serialization_round_trip() {
        for s in ["", "1", "0010101", &"10".repeat(100)] {
            let b = bs(s);
            let bytes = b.to_bytes();
            assert_eq!(bytes.len(), 8 + b.len().div_ceil(64) * 8);
            assert_eq!(BitString::from_bytes(&bytes).unwrap(), b);
        }
    }

    #[test]
    fn bitstring_decode_rejects_corruption() {
        let b = bs("101");
        let mut bytes = b.to_bytes();
        // nonzero padding above bit 3
        bytes[9] = 0xff;
        assert!(BitString::from_bytes(&bytes).is_err());
        // truncated payload
        assert!(BitString::from_bytes(&b.to_bytes()[..9]).is_err());
        // huge declared length with no payload must not allocate or panic
        let mut huge = Vec::new();
        put_u64(&mut huge, u64::MAX);
        assert!(BitString::from_bytes(&huge).is_err());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_encode(1).unwrap(), bs("1"));
        assert_eq!(gamma_encode(3).unwrap(), bs("011"));
        assert_eq!(gamma_encode(5).unwrap(), bs("00101"));
        assert_eq!(gamma_encode(0).unwrap_err(), Error::InvalidArgument("gamma code undefined at 0"));

        let b = bs("0110101");
        assert_eq!(gamma_decode(&b, 0).unwrap(), (3, 3));
        assert_eq!(gamma_decode(&b, 3).unwrap(), (2, 3));
        assert_eq!(gamma_decode(&bs("1"), 0).unwrap(), (1, 1));
    }

    #[test]
    fn gamma_round_trip() {
        let mut stream = BitString::new();
        let values: Vec<u64> = (1..=100_000).collect();
        for &v in &values {
            gamma_append(&mut stream, v).unwrap();
        }
        let mut off = 0;
        for &v in &values {
            let (got, used) = gamma_decode(&stream, off).unwrap();
            assert_eq!(got, v);
            off += used;
        }
        assert_eq!(off, stream.len());
        // large values round-trip too
        for v in [u32::MAX as u64 - 1, u32::MAX as u64, u64::MAX] {
            let enc = gamma_encode(v).unwrap();
            assert_eq!(gamma_decode(&enc, 0).unwrap(), (v, enc.len()));
        }
    }

    #[test]
    fn gamma_truncated_is_error() {
        assert!(gamma_decode(&bs(""), 0).is_err());
        assert!(gamma_decode(&bs("00"), 0).is_err());
        assert!(gamma_decode(&bs("0010"), 0).is_err()); // needs 2 value bits
    }

    #[test]
    fn delta_round_trip() {
        for v in (1..2000).chain([1 << 20, u32::MAX as u64, u64::MAX]) {
            let mut b = BitString::new();
            delta_append(&mut b, v).unwrap();
            assert_eq!(delta_decode(&b, 0).unwrap(), (v, b.len()));
        }
        assert!(delta_append(&mut BitString::new(), 0).is_err());
        assert!(delta_decode(&bs("01"), 0).is_err());
    }

    #[test]
    fn binarize_examples() {
        assert_eq!(binarize(b""), bs("0"));
        assert_eq!(binarize(&[0u8]), bs("1000000000"));
        assert_eq!(binarize(b"ab"), bs("1011000011011000100"));
    }

    #[test]
    fn debinarize_round_trip() {
        assert_eq!(debinarize(&bs("0")).unwrap(), b"");
        assert_eq!(debinarize(&binarize(b"ab")).unwrap(), b"ab");
        let all: Vec<u8> = (0..=255).collect();
        assert_eq!(debinarize(&binarize(&all)).unwrap(), all);
    }

    #[test]
    fn debinarize_rejects_malformed() {
        assert!(debinarize(&bs("1")).is_err()); // truncated symbol
        assert!(debinarize(&bs("")).is_err()); // missing terminator
        assert!(debinarize(&bs("100000000")).is_err()); // 8 payload bits + no terminator
        assert!(debinarize(&bs("00")).is_err()); // trailing bits
    }

    #[test]
    fn binarize_is_prefix_free() {
        // exhaustive over byte strings of length <= 2
        let mut all = vec![vec![]];
        for len in 1..=2usize {
            for i in 0..(1usize << (8 * len)) {
                let mut s = Vec::with_capacity(len);
                for j in 0..len {
                    s.push((i >> (8 * j)) as u8);
                }
                all.push(s);
            }
        }
        let coded: Vec<BitString> = all.iter().map(|s| binarize(s)).collect();
        // sorting puts any prefix immediately before an extension
        let mut sorted = coded.clone();
        sorted.sort();
        for w in sorted.windows(2) {
            assert!(!w[1].starts_with(&w[0]), "{:?} prefixes {:?}", w[0], w[1]);
        }
        assert_eq!(coded.len(), 1 + 256 + 65536);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(zero_order_entropy(&[7]).unwrap(), 0.0);
        assert_eq!(zero_order_entropy(&[4, 4]).unwrap(), 1.0);
        let h = zero_order_entropy(&[5, 2, 2, 1, 1]).unwrap();
        assert!((h - 2.040373).abs() < 1e-3, "H0 = {h}");
        assert!(zero_order_entropy(&[]).is_err());
        assert!(zero_order_entropy(&[0, 0]).is_err());
    }

    #[test]
    fn binary_entropy_symmetry() {
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            assert!((binary_entropy(p) - binary_entropy(1.0 - p)).abs() < 1e-12);
        }
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
    }

    #[test]
    fn binomial_bound_values() {
        assert_eq!(binomial_bound(0, 10), 0);
        assert_eq!(binomial_bound(10, 10), 0);
        assert_eq!(binomial_bound(1, 8), 3); // log2 8
        assert_eq!(binomial_bound(6, 11), 9); // C(11,6) = 462, log2 = 8.85
        assert_eq!(binomial_bound(2, 4), 3); // C(4,2) = 6
        // against exact arithmetic on a larger case: C(63, 31)
        let exact: f64 = 916312070471295267.0f64.log2();
        assert!((log2_binomial(31, 63) - exact).abs() < 1e-9);
    }
}
