//! Static compressed bitvector with class/offset block encoding.
//!
//! The bit sequence is cut into blocks of 63 bits. Each block stores its
//! popcount (the class, 6 bits) and the lexicographic index of its bit
//! pattern among all patterns of that class (the offset,
//! `ceil(log2 C(63, class))` bits, at most 60). A directory samples the
//! cumulative rank and the offset-stream position every 32 blocks, so rank
//! walks at most 31 classes plus one block decode. `select` binary-searches
//! the directory and is O(log n) worst case; the machinery for a
//! constant-time select is deliberately not part of this structure.
//!
//! Total payload is `B(m, n)` + redundancy, where `B(m, n) =
//! ceil(log2 C(n, m))` and the redundancy stays under
//! `2·n·loglog(n)/log(n) + 256` bits ([`StaticFID::redundancy_bound`]).

use crate::bits::{rank_word, select_word, BitString};
use crate::error::{decode_err, Result};
use crate::wire::{put_u64, Reader};

/// Bits per encoded block. 63 keeps the class in 6 bits and every offset
/// within a single 64-bit word.
pub const BLOCK_BITS: usize = 63;
/// Blocks per directory sample.
pub const SUPER_BLOCKS: usize = 32;

const CLASS_BITS: u32 = 6;

/// `CHOOSE[n][k] = C(n, k)` for n, k ≤ 63, saturating at u64::MAX.
static CHOOSE: [[u64; 64]; 64] = build_choose();

const fn build_choose() -> [[u64; 64]; 64] {
    let mut c = [[0u64; 64]; 64];
    let mut n = 0;
    while n < 64 {
        c[n][0] = 1;
        let mut k = 1;
        while k <= n {
            let up = if k < n { c[n - 1][k] } else { 0 };
            c[n][k] = c[n - 1][k - 1].saturating_add(up);
            k += 1;
        }
        n += 1;
    }
    c
}

/// `WIDTH[c]` = bits used by the offset of a class-`c` block.
static WIDTH: [u32; 64] = build_width();

const fn build_width() -> [u32; 64] {
    let mut w = [0u32; 64];
    let mut c = 0;
    while c < 64 {
        let count = CHOOSE[BLOCK_BITS][c];
        w[c] = if count <= 1 {
            0
        } else {
            64 - (count - 1).leading_zeros()
        };
        c += 1;
    }
    w
}

/// Lexicographic index of `word` (class-`class` block) among all 63-bit
/// words with `class` ones, enumerating positions low to high with a clear
/// bit sorting first.
fn block_offset(word: u64, class: u32) -> u64 {
    debug_assert_eq!(word.count_ones(), class);
    let mut off = 0u64;
    let mut remaining = class as usize;
    let mut i = 0usize;
    while remaining > 0 {
        if word >> i & 1 == 1 {
            off += CHOOSE[BLOCK_BITS - 1 - i][remaining];
            remaining -= 1;
        }
        i += 1;
    }
    off
}

/// Inverse of [`block_offset`]; `off` must be below `C(63, class)`.
fn block_word(class: u32, mut off: u64) -> u64 {
    debug_assert!(off < CHOOSE[BLOCK_BITS][class as usize]);
    let mut word = 0u64;
    let mut remaining = class as usize;
    let mut i = 0usize;
    while remaining > 0 {
        let zero_here = CHOOSE[BLOCK_BITS - 1 - i][remaining];
        if off >= zero_here {
            off -= zero_here;
            word |= 1u64 << i;
            remaining -= 1;
        }
        i += 1;
    }
    debug_assert_eq!(off, 0);
    word
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct SuperSample {
    /// 1-bits before this superblock.
    ones: u64,
    /// Bit position of this superblock's first offset in the offset stream.
    offset_pos: u64,
}

/// Immutable rank/select dictionary over a fixed bit sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaticFID {
    len: usize,
    ones: usize,
    classes: BitString,
    offsets: BitString,
    supers: Vec<SuperSample>,
}

impl StaticFID {
    /// Encodes `bits` in one shot.
    pub fn build(bits: &BitString) -> Self {
        let mut b = ResumableBuilder::new(bits.clone());
        let blocks = b.blocks_total();
        b.build_step(blocks);
        b.take()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Total occurrences of `b`.
    #[inline]
    pub fn count(&self, b: bool) -> usize {
        if b {
            self.ones
        } else {
            self.len - self.ones
        }
    }

    fn num_blocks(&self) -> usize {
        self.len.div_ceil(BLOCK_BITS)
    }

    fn block_len(&self, bi: usize) -> usize {
        (self.len - bi * BLOCK_BITS).min(BLOCK_BITS)
    }

    #[inline]
    fn class(&self, bi: usize) -> u32 {
        self.classes.get_word(bi * CLASS_BITS as usize, CLASS_BITS) as u32
    }

    /// Decodes the 63-bit word of block `bi` whose offset starts at
    /// `offset_pos`; returns the word and the next offset position.
    fn decode_block(&self, bi: usize, offset_pos: usize) -> (u64, usize) {
        let class = self.class(bi);
        let width = WIDTH[class as usize];
        let off = self.offsets.get_word(offset_pos, width);
        (block_word(class, off), offset_pos + width as usize)
    }

    /// Walks from the directory sample covering `bi` to the start of block
    /// `bi`; returns (ones before block, offset position of block).
    fn seek_block(&self, bi: usize) -> (usize, usize) {
        let s = &self.supers[bi / SUPER_BLOCKS];
        let mut ones = s.ones as usize;
        let mut pos = s.offset_pos as usize;
        for j in (bi / SUPER_BLOCKS * SUPER_BLOCKS)..bi {
            let c = self.class(j);
            ones += c as usize;
            pos += WIDTH[c as usize] as usize;
        }
        (ones, pos)
    }

    /// Bit at `pos`. Panics if `pos >= len`.
    pub fn access(&self, pos: usize) -> bool {
        assert!(pos < self.len, "access {pos} out of range (len {})", self.len);
        let bi = pos / BLOCK_BITS;
        let (_, off_pos) = self.seek_block(bi);
        let (word, _) = self.decode_block(bi, off_pos);
        word >> (pos % BLOCK_BITS) & 1 == 1
    }

    pub fn get(&self, pos: usize) -> Option<bool> {
        (pos < self.len).then(|| self.access(pos))
    }

    /// Occurrences of `b` strictly before `pos`. Panics if `pos > len`.
    pub fn rank(&self, b: bool, pos: usize) -> usize {
        assert!(pos <= self.len, "rank {pos} out of range (len {})", self.len);
        if pos == self.len {
            return self.count(b);
        }
        let bi = pos / BLOCK_BITS;
        let (mut ones, off_pos) = self.seek_block(bi);
        let (word, _) = self.decode_block(bi, off_pos);
        ones += rank_word(word, (pos % BLOCK_BITS) as u32, true) as usize;
        if b {
            ones
        } else {
            pos - ones
        }
    }

    /// Position of the `(idx+1)`-th `b`, or `None` past the last one.
    pub fn select(&self, b: bool, idx: usize) -> Option<usize> {
        if idx >= self.count(b) {
            return None;
        }
        // directory entry s covers bit positions from 32·63·s; count of b
        // before it is monotone, find the last sample not beyond idx
        let boundary_count = |s: usize| -> usize {
            let ones = self.supers[s].ones as usize;
            if b {
                ones
            } else {
                s * SUPER_BLOCKS * BLOCK_BITS - ones
            }
        };
        let mut lo = 0usize;
        let mut hi = self.supers.len(); // invariant: boundary_count(lo) <= idx
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if boundary_count(mid) <= idx {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut rem = idx - boundary_count(lo);
        let mut bi = lo * SUPER_BLOCKS;
        let mut off_pos = self.supers[lo].offset_pos as usize;
        loop {
            debug_assert!(bi < self.num_blocks());
            let c = self.class(bi) as usize;
            let in_block = if b { c } else { self.block_len(bi) - c };
            if rem < in_block {
                let (word, _) = self.decode_block(bi, off_pos);
                let p = select_word(word, rem as u32, b).expect("counted above");
                debug_assert!((p as usize) < self.block_len(bi));
                return Some(bi * BLOCK_BITS + p as usize);
            }
            rem -= in_block;
            off_pos += WIDTH[c] as usize;
            bi += 1;
        }
    }

    /// Decodes the full bit sequence.
    pub fn to_bit_string(&self) -> BitString {
        let mut out = BitString::with_capacity(self.len);
        let mut pos = 0usize;
        for bi in 0..self.num_blocks() {
            let (word, next) = self.decode_block(bi, pos);
            pos = next;
            out.push_word(word, self.block_len(bi) as u32);
        }
        out
    }

    /// Reads `n <= 64` bits starting at bit `start`, packed low-first.
    /// Sequential callers should pass the cursor from [`Self::cursor_at`].
    pub(crate) fn read_bits(&self, cur: &mut BlockCursor, start: usize, n: u32) -> u64 {
        debug_assert!(start + n as usize <= self.len && n <= 64);
        let mut out = 0u64;
        let mut got = 0u32;
        while got < n {
            let bi = (start + got as usize) / BLOCK_BITS;
            cur.seek(self, bi);
            let in_block = (start + got as usize) % BLOCK_BITS;
            let take = (n - got).min((BLOCK_BITS - in_block) as u32);
            let chunk = cur.word >> in_block & mask(take);
            out |= chunk << got;
            got += take;
        }
        out
    }

    pub(crate) fn cursor_at(&self, bi: usize) -> BlockCursor {
        let (_, off_pos) = self.seek_block(bi.min(self.num_blocks().saturating_sub(1)));
        let mut cur = BlockCursor {
            bi: usize::MAX,
            off_pos,
            next_off_pos: off_pos,
            word: 0,
        };
        if self.num_blocks() > 0 && bi < self.num_blocks() {
            cur.load(self, bi);
        }
        cur
    }

    /// Class stream + offset stream + directory, in bits.
    pub fn payload_bits(&self) -> usize {
        self.classes.len() + self.offsets.len() + self.supers.len() * 128
    }

    /// Documented redundancy envelope: [`Self::payload_bits`] never exceeds
    /// `B(m, n)` by more than this.
    pub fn redundancy_bound(n: usize) -> usize {
        if n < 2 {
            return 256;
        }
        let lg = (n as f64).log2();
        let lglg = lg.log2().max(1.0);
        (2.0 * n as f64 * lglg / lg).ceil() as usize + 256
    }

    pub fn write_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(b"RRR1");
        put_u64(out, self.len as u64);
        put_u64(out, self.ones as u64);
        self.classes.write_into(out);
        self.offsets.write_into(out);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_into(&mut out);
        out
    }

    pub fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        r.magic(b"RRR1")?;
        let len = r.len("bit count")?;
        let ones = r.len("one count")?;
        let classes = BitString::read_from(r)?;
        let offsets = BitString::read_from(r)?;
        Self::assemble(len, ones, classes, offsets)
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = Reader::new(data);
        let out = Self::read_from(&mut r)?;
        r.finish("dictionary")?;
        Ok(out)
    }

    /// Validates streams and rebuilds the directory.
    fn assemble(len: usize, ones: usize, classes: BitString, offsets: BitString) -> Result<Self> {
        if ones > len {
            return decode_err("more ones than bits");
        }
        let blocks = len.div_ceil(BLOCK_BITS);
        if classes.len() != blocks * CLASS_BITS as usize {
            return decode_err("class stream length mismatch");
        }
        let mut supers = Vec::with_capacity(blocks.div_ceil(SUPER_BLOCKS));
        let mut seen_ones = 0usize;
        let mut pos = 0usize;
        for bi in 0..blocks {
            if bi % SUPER_BLOCKS == 0 {
                supers.push(SuperSample {
                    ones: seen_ones as u64,
                    offset_pos: pos as u64,
                });
            }
            let block_len = (len - bi * BLOCK_BITS).min(BLOCK_BITS);
            let class = classes.get_word(bi * CLASS_BITS as usize, CLASS_BITS) as u32;
            if class as usize > block_len {
                return decode_err(format!("block {bi}: class {class} exceeds block length"));
            }
            let width = WIDTH[class as usize];
            if pos + width as usize > offsets.len() {
                return decode_err("offset stream truncated");
            }
            let off = offsets.get_word(pos, width);
            if off >= CHOOSE[BLOCK_BITS][class as usize] {
                return decode_err(format!("block {bi}: offset {off} out of range"));
            }
            if block_len < BLOCK_BITS && block_word(class, off) >> block_len != 0 {
                return decode_err(format!("block {bi}: bits set beyond logical end"));
            }
            seen_ones += class as usize;
            pos += width as usize;
        }
        if pos != offsets.len() {
            return decode_err("trailing bits in offset stream");
        }
        if seen_ones != ones {
            return decode_err("class stream popcount disagrees with header");
        }
        Ok(StaticFID {
            len,
            ones,
            classes,
            offsets,
            supers,
        })
    }
}

#[inline]
fn mask(n: u32) -> u64 {
    if n >= 64 {
        !0
    } else {
        (1u64 << n) - 1
    }
}

/// Sequential block decode state for [`StaticFID::read_bits`].
#[derive(Clone, Debug)]
pub(crate) struct BlockCursor {
    bi: usize,
    off_pos: usize,
    next_off_pos: usize,
    word: u64,
}

impl BlockCursor {
    fn load(&mut self, fid: &StaticFID, bi: usize) {
        let (word, next) = fid.decode_block(bi, self.off_pos);
        self.bi = bi;
        self.word = word;
        self.next_off_pos = next;
    }

    fn seek(&mut self, fid: &StaticFID, bi: usize) {
        if bi == self.bi {
            return;
        }
        if bi == self.bi.wrapping_add(1) {
            self.off_pos = self.next_off_pos;
        } else {
            let (_, off_pos) = fid.seek_block(bi);
            self.off_pos = off_pos;
        }
        self.load(fid, bi);
    }
}

/// Construction progress of a [`ResumableBuilder`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildProgress {
    InProgress { blocks_done: usize, blocks_total: usize },
    Complete,
}

/// Incremental [`StaticFID`] construction: the encoding work is split into
/// per-block steps so a caller can spread it across other operations. The
/// finished dictionary is identical to a one-shot [`StaticFID::build`].
#[derive(Clone, Debug)]
pub struct ResumableBuilder {
    source: BitString,
    next_block: usize,
    sink: Sink,
}

impl ResumableBuilder {
    pub fn new(source: BitString) -> Self {
        ResumableBuilder {
            next_block: 0,
            sink: Sink::new(),
            source,
        }
    }

    pub fn blocks_total(&self) -> usize {
        self.source.len().div_ceil(BLOCK_BITS).max(1)
    }

    pub fn is_complete(&self) -> bool {
        self.next_block >= self.blocks_total()
    }

    /// Encodes up to `budget` blocks; returns the state afterwards.
    /// Stepping a complete builder is a no-op.
    pub fn build_step(&mut self, budget: usize) -> BuildProgress {
        let total = self.blocks_total();
        for _ in 0..budget {
            if self.next_block >= total {
                break;
            }
            let start = self.next_block * BLOCK_BITS;
            let n = (self.source.len() - start).min(BLOCK_BITS) as u32;
            self.sink.push_bits(self.source.get_word(start, n), n);
            self.next_block += 1;
        }
        if self.is_complete() {
            BuildProgress::Complete
        } else {
            BuildProgress::InProgress {
                blocks_done: self.next_block,
                blocks_total: total,
            }
        }
    }

    /// Consumes the builder; panics unless complete.
    pub fn take(self) -> StaticFID {
        assert!(self.is_complete(), "builder still has pending blocks");
        self.sink.finish()
    }

    /// Runs the remaining steps and produces the dictionary.
    pub fn run(mut self) -> StaticFID {
        let total = self.blocks_total();
        self.build_step(total);
        self.take()
    }
}

/// Streaming encoder: accepts bits in arbitrary word-sized pushes, cuts
/// them into 63-bit blocks. Shared by the builder and the append-only
/// structure's background merges.
#[derive(Clone, Debug, Default)]
pub(crate) struct Sink {
    classes: BitString,
    offsets: BitString,
    len: usize,
    ones: usize,
    buf: u64,
    buf_bits: u32,
}

impl Sink {
    pub(crate) fn new() -> Self {
        Sink::default()
    }

    pub(crate) fn push_bits(&mut self, word: u64, n: u32) {
        debug_assert!(n <= 64);
        debug_assert!(n == 64 || word >> n == 0);
        let mut word = word;
        let mut n = n;
        while n > 0 {
            let take = n.min(BLOCK_BITS as u32 - self.buf_bits);
            self.buf |= (word & mask(take)) << self.buf_bits;
            self.buf_bits += take;
            word = if take == 64 { 0 } else { word >> take };
            n -= take;
            if self.buf_bits == BLOCK_BITS as u32 {
                self.flush_block();
            }
        }
    }

    fn flush_block(&mut self) {
        let class = self.buf.count_ones();
        self.classes.push_word(class as u64, CLASS_BITS);
        self.offsets
            .push_word(block_offset(self.buf, class), WIDTH[class as usize]);
        self.len += self.buf_bits as usize;
        self.ones += class as usize;
        self.buf = 0;
        self.buf_bits = 0;
    }

    pub(crate) fn finish(mut self) -> StaticFID {
        if self.buf_bits > 0 {
            self.flush_block();
        }
        StaticFID::assemble(self.len, self.ones, self.classes, self.offsets)
            .expect("encoder output is self-consistent")
    }
}
