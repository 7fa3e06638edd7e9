//! Append-only bitvectors with constant-time queries.
//!
//! Two structures share the same idea: keep almost everything in immutable
//! compressed blocks ([`StaticFID`]) and absorb appends in a small explicit
//! tail. Compression work for a finished region is spread over later
//! appends in fixed budgets, so no single append pays for a whole block.
//!
//! - [`SegmentStack`] keeps segments whose sizes follow a binary counter:
//!   the tail holds up to `r` bits, and the sealed segments have sizes
//!   `2^(i-2)·r` or zero per level. A full tail carries into the smallest
//!   empty level by concatenating everything below it; while the new
//!   segment's dictionary is under construction, queries run against a
//!   proxy that routes into the old parts.
//! - [`AppendFID`] cuts the sequence into fixed-length blocks of `L` bits
//!   (`L` doubles as the sequence grows) and keeps per-block boundary
//!   sums, giving rank/select/access with a single block probe.

use std::collections::VecDeque;
use std::mem;

use crate::bits::{rank_word, select_word, BitString};
use crate::error::{decode_err, Result};
use crate::rrr::{BuildProgress, ResumableBuilder, Sink, StaticFID};
use crate::wire::{put_u64, Reader};
use crate::Error;

/// Hard ceiling for explicit tails; everything below it keeps u32 rank
/// samples exact.
const SMALL_CAP: usize = 1 << 16;

/// Builder/merge steps an [`AppendFID::append`] may execute: two for block
/// sealing plus one for block-length growth.
pub const FID_MAX_WORK_PER_APPEND: usize = 3;

/// Builder steps a [`SegmentStack::append`] may execute.
pub const STACK_MAX_WORK_PER_APPEND: usize = 2;

/// Instrumentation for the de-amortization budget.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WorkStats {
    /// Builder steps executed across all appends.
    pub total_steps: u64,
    /// Largest number of builder steps inside a single append.
    pub max_steps_per_append: usize,
}

impl WorkStats {
    fn record(&mut self, steps: usize) {
        self.total_steps += steps as u64;
        self.max_steps_per_append = self.max_steps_per_append.max(steps);
    }
}

/// Plain bitvector with O(1) rank: explicit bits, a rank sample per 64-bit
/// word, and the running positions of the last 0 and 1. Bounded capacity
/// keeps it small enough to serve as a tail.
#[derive(Clone, Debug, Default)]
pub(crate) struct SmallBV {
    bits: BitString,
    /// `samples[w]` = ones among bits `[0, 64w)`.
    samples: Vec<u32>,
    ones: usize,
    capacity: usize,
    last_zero: Option<usize>,
    last_one: Option<usize>,
}

impl SmallBV {
    pub(crate) fn new(capacity: usize) -> Self {
        assert!(capacity <= SMALL_CAP, "tail capacity {capacity} too large");
        SmallBV {
            capacity,
            ..SmallBV::default()
        }
    }

    pub(crate) fn from_bits(bits: BitString, capacity: usize) -> Self {
        let mut v = SmallBV::new(capacity.max(bits.len()));
        for b in bits.iter() {
            v.append(b);
        }
        v
    }

    pub(crate) fn set_capacity(&mut self, capacity: usize) {
        assert!(capacity <= SMALL_CAP && capacity >= self.bits.len());
        self.capacity = capacity;
    }

    #[inline]
    pub(crate) fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub(crate) fn count(&self, b: bool) -> usize {
        if b {
            self.ones
        } else {
            self.bits.len() - self.ones
        }
    }

    pub(crate) fn append(&mut self, b: bool) {
        assert!(self.bits.len() < self.capacity, "tail is full");
        if self.bits.len() % 64 == 0 {
            self.samples.push(self.ones as u32);
        }
        if b {
            self.last_one = Some(self.bits.len());
            self.ones += 1;
        } else {
            self.last_zero = Some(self.bits.len());
        }
        self.bits.push(b);
    }

    #[inline]
    pub(crate) fn access(&self, pos: usize) -> bool {
        self.bits.bit(pos)
    }

    pub(crate) fn rank(&self, b: bool, pos: usize) -> usize {
        debug_assert!(pos <= self.len());
        if pos == self.len() {
            return self.count(b);
        }
        let w = pos / 64;
        let ones =
            self.samples[w] as usize + rank_word(self.bits.words()[w], (pos % 64) as u32, true) as usize;
        if b {
            ones
        } else {
            pos - ones
        }
    }

    pub(crate) fn select(&self, b: bool, idx: usize) -> Option<usize> {
        if idx >= self.count(b) {
            return None;
        }
        // last position of the final occurrence is already at hand
        if idx + 1 == self.count(b) {
            return if b { self.last_one } else { self.last_zero };
        }
        let count_at = |w: usize| {
            let ones = self.samples[w] as usize;
            if b {
                ones
            } else {
                64 * w - ones
            }
        };
        let mut lo = 0usize;
        let mut hi = self.samples.len();
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if count_at(mid) <= idx {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let within = select_word(self.bits.words()[lo], (idx - count_at(lo)) as u32, b)
            .expect("index counted in this word");
        Some(64 * lo + within as usize)
    }

    pub(crate) fn bits(&self) -> &BitString {
        &self.bits
    }

    /// Reads up to 64 bits starting at `start`.
    pub(crate) fn read_bits(&self, start: usize, n: u32) -> u64 {
        self.bits.get_word(start, n)
    }

    #[cfg(test)]
    fn check_invariants(&self) {
        assert!(self.bits.len() <= self.capacity);
        assert_eq!(self.ones, self.bits.count(true));
        for (w, &s) in self.samples.iter().enumerate() {
            assert_eq!(s as usize, self.bits.rank(true, 64 * w));
        }
        let naive_last = |b: bool| (0..self.bits.len()).rev().find(|&i| self.bits.bit(i) == b);
        assert_eq!(self.last_one, naive_last(true));
        assert_eq!(self.last_zero, naive_last(false));
    }
}

/// One source region of a proxy: an already-compressed dictionary or a
/// frozen explicit tail.
#[derive(Clone, Debug)]
enum Part {
    Fid(StaticFID),
    Small(SmallBV),
}

impl Part {
    fn len(&self) -> usize {
        match self {
            Part::Fid(f) => f.len(),
            Part::Small(s) => s.len(),
        }
    }

    fn ones(&self) -> usize {
        match self {
            Part::Fid(f) => f.count(true),
            Part::Small(s) => s.count(true),
        }
    }
}

/// A segment whose dictionary is still being built. Queries route into the
/// concatenated parts; a streaming encoder consumes them left to right.
#[derive(Debug)]
struct ProxySeg {
    parts: Vec<Part>,
    /// bits before part i; one extra entry with the total
    starts: Vec<usize>,
    /// ones before part i; one extra entry with the total
    ones_before: Vec<usize>,
    sink: Sink,
    cursor_part: usize,
    cursor_bit: usize,
    fid_cursor: Option<crate::rrr::BlockCursor>,
}

impl ProxySeg {
    fn new(parts: Vec<Part>) -> Self {
        let mut starts = Vec::with_capacity(parts.len() + 1);
        let mut ones_before = Vec::with_capacity(parts.len() + 1);
        let mut bits = 0usize;
        let mut ones = 0usize;
        for p in &parts {
            starts.push(bits);
            ones_before.push(ones);
            bits += p.len();
            ones += p.ones();
        }
        starts.push(bits);
        ones_before.push(ones);
        ProxySeg {
            parts,
            starts,
            ones_before,
            sink: Sink::new(),
            cursor_part: 0,
            cursor_bit: 0,
            fid_cursor: None,
        }
    }

    fn len(&self) -> usize {
        *self.starts.last().unwrap()
    }

    fn ones(&self) -> usize {
        *self.ones_before.last().unwrap()
    }

    /// Encodes up to 63 more source bits; returns the finished dictionary
    /// once the whole concatenation has been consumed.
    fn step(&mut self) -> Option<StaticFID> {
        let total = self.len();
        let mut pos = self.starts[self.cursor_part] + self.cursor_bit;
        let mut want = 63.min(total - pos) as u32;
        while want > 0 {
            let part = &self.parts[self.cursor_part];
            let left = (part.len() - self.cursor_bit).min(want as usize) as u32;
            let word = match part {
                Part::Fid(f) => {
                    let cur = self
                        .fid_cursor
                        .get_or_insert_with(|| f.cursor_at(self.cursor_bit / crate::rrr::BLOCK_BITS));
                    f.read_bits(cur, self.cursor_bit, left)
                }
                Part::Small(s) => s.read_bits(self.cursor_bit, left),
            };
            self.sink.push_bits(word, left);
            self.cursor_bit += left as usize;
            pos += left as usize;
            want -= left;
            if self.cursor_bit == part.len() {
                self.cursor_part += 1;
                self.cursor_bit = 0;
                self.fid_cursor = None;
            }
        }
        if pos == total {
            Some(mem::take(&mut self.sink).finish())
        } else {
            None
        }
    }

    fn route(&self, pos: usize) -> usize {
        debug_assert!(pos < self.len());
        self.starts.partition_point(|&s| s <= pos) - 1
    }

    fn access(&self, pos: usize) -> bool {
        let i = self.route(pos);
        match &self.parts[i] {
            Part::Fid(f) => f.access(pos - self.starts[i]),
            Part::Small(s) => s.access(pos - self.starts[i]),
        }
    }

    fn rank(&self, b: bool, pos: usize) -> usize {
        debug_assert!(pos <= self.len());
        if pos == self.len() {
            return if b { self.ones() } else { self.len() - self.ones() };
        }
        let i = self.route(pos);
        let before = if b {
            self.ones_before[i]
        } else {
            self.starts[i] - self.ones_before[i]
        };
        before
            + match &self.parts[i] {
                Part::Fid(f) => f.rank(b, pos - self.starts[i]),
                Part::Small(s) => s.rank(b, pos - self.starts[i]),
            }
    }

    fn select(&self, b: bool, idx: usize) -> Option<usize> {
        let total = if b { self.ones() } else { self.len() - self.ones() };
        if idx >= total {
            return None;
        }
        let before = |i: usize| {
            if b {
                self.ones_before[i]
            } else {
                self.starts[i] - self.ones_before[i]
            }
        };
        let i = self.parts_partition(|i| before(i) <= idx) - 1;
        let within = match &self.parts[i] {
            Part::Fid(f) => f.select(b, idx - before(i)),
            Part::Small(s) => s.select(b, idx - before(i)),
        };
        Some(self.starts[i] + within.expect("index counted in this part"))
    }

    /// partition_point over part indices 0..=parts.len()
    fn parts_partition(&self, pred: impl Fn(usize) -> bool) -> usize {
        let mut lo = 0usize;
        let mut hi = self.parts.len() + 1;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if mid < self.starts.len() && pred(mid) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

#[derive(Debug)]
enum SegData {
    Ready(StaticFID),
    Pending(ProxySeg),
}

impl SegData {
    fn len(&self) -> usize {
        match self {
            SegData::Ready(f) => f.len(),
            SegData::Pending(p) => p.len(),
        }
    }

    fn ones(&self) -> usize {
        match self {
            SegData::Ready(f) => f.count(true),
            SegData::Pending(p) => p.ones(),
        }
    }

    fn access(&self, pos: usize) -> bool {
        match self {
            SegData::Ready(f) => f.access(pos),
            SegData::Pending(p) => p.access(pos),
        }
    }

    fn rank(&self, b: bool, pos: usize) -> usize {
        match self {
            SegData::Ready(f) => f.rank(b, pos),
            SegData::Pending(p) => p.rank(b, pos),
        }
    }

    fn select(&self, b: bool, idx: usize) -> Option<usize> {
        match self {
            SegData::Ready(f) => f.select(b, idx),
            SegData::Pending(p) => p.select(b, idx),
        }
    }
}

/// Routing entry for one occupied level, in logical order (oldest first).
#[derive(Clone, Copy, Debug)]
struct SegRef {
    slot: usize,
    start: usize,
    ones_before: usize,
}

/// Append-only bitvector organized as a binary counter of segments.
///
/// The tail accepts up to `r` bits; a full tail carries into the smallest
/// empty level, concatenating all lower segments. Each new segment's
/// dictionary is built incrementally (at most
/// [`STACK_MAX_WORK_PER_APPEND`] encoder steps per append); until it
/// finishes, a proxy answers queries from the old parts. `r` is retuned to
/// track `4·ceil(log2 n)` whenever a carry opens a new top level,
/// restricted to power-of-two multiples of the current value so existing
/// segment sizes stay level-aligned after relabeling.
#[derive(Debug)]
pub struct SegmentStack {
    /// `levels[k]` holds level `k + 2`.
    levels: Vec<Option<SegData>>,
    /// occupied levels, oldest (highest level) first, with boundary sums
    refs: Vec<SegRef>,
    v1: SmallBV,
    r: usize,
    sealed_len: usize,
    sealed_ones: usize,
    pending: VecDeque<usize>,
    stats: WorkStats,
}

impl Default for SegmentStack {
    fn default() -> Self {
        Self::new()
    }
}

impl SegmentStack {
    pub fn new() -> Self {
        Self::with_r(64)
    }

    /// `r` must be a power of two so later retunings stay aligned.
    pub fn with_r(r: usize) -> Self {
        assert!(r.is_power_of_two() && (4..=SMALL_CAP).contains(&r));
        SegmentStack {
            levels: Vec::new(),
            refs: Vec::new(),
            v1: SmallBV::new(r),
            r,
            sealed_len: 0,
            sealed_ones: 0,
            pending: VecDeque::new(),
            stats: WorkStats::default(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.sealed_len + self.v1.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn count(&self, b: bool) -> usize {
        let ones = self.sealed_ones + self.v1.count(true);
        if b {
            ones
        } else {
            self.len() - ones
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn work_stats(&self) -> WorkStats {
        self.stats
    }

    /// Occupied levels as (level, size), highest level first.
    pub fn level_sizes(&self) -> Vec<(u32, usize)> {
        self.refs
            .iter()
            .map(|r| ((r.slot + 2) as u32, self.levels[r.slot].as_ref().unwrap().len()))
            .collect()
    }

    pub fn is_quiescent(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn append(&mut self, b: bool) {
        self.v1.append(b);
        if self.v1.len() == self.r {
            self.carry();
        }
        let steps = self.advance_work(STACK_MAX_WORK_PER_APPEND);
        self.stats.record(steps);
        #[cfg(debug_assertions)]
        self.check_shape();
    }

    /// Runs all pending dictionary builds to completion.
    pub fn quiesce(&mut self) {
        while !self.pending.is_empty() {
            self.advance_work(usize::MAX);
        }
    }

    fn advance_work(&mut self, budget: usize) -> usize {
        let mut steps = 0;
        while steps < budget {
            let Some(&slot) = self.pending.front() else { break };
            steps += 1;
            let done = {
                let seg = self.levels[slot].as_mut().expect("pending level occupied");
                match seg {
                    SegData::Pending(p) => p.step(),
                    SegData::Ready(_) => unreachable!("ready level queued as pending"),
                }
            };
            if let Some(fid) = done {
                self.levels[slot] = Some(SegData::Ready(fid));
                self.pending.pop_front();
            } else if self.pending.len() > 1 {
                let slot = self.pending.pop_front().unwrap();
                self.pending.push_back(slot);
            }
        }
        steps
    }

    /// Moves the full tail plus all full low levels into the smallest
    /// empty level, then retunes `r` if this opened a new top level.
    fn carry(&mut self) {
        debug_assert_eq!(self.v1.len(), self.r);
        let mut j_slot = 0;
        while j_slot < self.levels.len() && self.levels[j_slot].is_some() {
            j_slot += 1;
        }
        if j_slot == self.levels.len() {
            self.levels.push(None);
        }
        let new_top = self.levels[j_slot + 1..].iter().all(Option::is_none);

        // oldest part first: highest consumed level down to the tail
        let mut parts = Vec::new();
        for k in (0..j_slot).rev() {
            match self.levels[k].take().expect("levels below the carry are full") {
                SegData::Ready(f) => parts.push(Part::Fid(f)),
                SegData::Pending(p) => parts.extend(p.parts), // cancel its build, reuse sources
            }
            self.pending.retain(|&s| s != k);
        }
        parts.push(Part::Small(mem::replace(&mut self.v1, SmallBV::new(self.r))));
        let proxy = ProxySeg::new(parts);
        debug_assert_eq!(proxy.len(), (1 << j_slot) * self.r);

        let mut target_slot = j_slot;
        if new_top {
            let n = self.sealed_len + proxy.len();
            let want = 4 * usize::BITS.saturating_sub((n.max(2) - 1).leading_zeros()) as usize;
            let mut shift = 0;
            while self.r << (shift + 1) <= want && shift + 1 <= j_slot {
                shift += 1;
            }
            if shift > 0 {
                self.r <<= shift;
                self.v1.set_capacity(self.r);
                // sizes are unchanged, only the level labels move down
                for k in j_slot..self.levels.len() {
                    self.levels[k - shift] = self.levels[k].take();
                }
                for s in self.pending.iter_mut() {
                    *s -= shift;
                }
                target_slot = j_slot - shift;
                self.levels.truncate(self.levels.len() - shift);
            }
        }

        self.levels[target_slot] = Some(SegData::Pending(proxy));
        self.pending.push_back(target_slot);
        self.rebuild_refs();
    }

    fn rebuild_refs(&mut self) {
        self.refs.clear();
        let mut start = 0usize;
        let mut ones = 0usize;
        for slot in (0..self.levels.len()).rev() {
            if let Some(seg) = &self.levels[slot] {
                self.refs.push(SegRef {
                    slot,
                    start,
                    ones_before: ones,
                });
                start += seg.len();
                ones += seg.ones();
            }
        }
        self.sealed_len = start;
        self.sealed_ones = ones;
    }

    fn seg(&self, r: &SegRef) -> &SegData {
        self.levels[r.slot].as_ref().unwrap()
    }

    pub fn access(&self, pos: usize) -> bool {
        assert!(pos < self.len(), "access {pos} out of range (len {})", self.len());
        if pos >= self.sealed_len {
            return self.v1.access(pos - self.sealed_len);
        }
        let i = self.refs.partition_point(|r| r.start <= pos) - 1;
        let r = &self.refs[i];
        self.seg(r).access(pos - r.start)
    }

    pub fn get(&self, pos: usize) -> Option<bool> {
        (pos < self.len()).then(|| self.access(pos))
    }

    pub fn rank(&self, b: bool, pos: usize) -> usize {
        assert!(pos <= self.len(), "rank {pos} out of range (len {})", self.len());
        if pos >= self.sealed_len {
            let sealed = if b {
                self.sealed_ones
            } else {
                self.sealed_len - self.sealed_ones
            };
            return sealed + self.v1.rank(b, pos - self.sealed_len);
        }
        let i = self.refs.partition_point(|r| r.start <= pos) - 1;
        let r = &self.refs[i];
        let before = if b {
            r.ones_before
        } else {
            r.start - r.ones_before
        };
        before + self.seg(r).rank(b, pos - r.start)
    }

    pub fn select(&self, b: bool, idx: usize) -> Option<usize> {
        if idx >= self.count(b) {
            return None;
        }
        let sealed = if b {
            self.sealed_ones
        } else {
            self.sealed_len - self.sealed_ones
        };
        if idx >= sealed {
            return Some(self.sealed_len + self.v1.select(b, idx - sealed).unwrap());
        }
        let before = |r: &SegRef| if b { r.ones_before } else { r.start - r.ones_before };
        let i = self.refs.partition_point(|r| before(r) <= idx) - 1;
        let r = &self.refs[i];
        Some(r.start + self.seg(r).select(b, idx - before(r)).unwrap())
    }

    pub fn to_bit_string(&self) -> BitString {
        let mut out = BitString::with_capacity(self.len());
        for r in &self.refs {
            match self.seg(r) {
                SegData::Ready(f) => out.extend(&f.to_bit_string()),
                SegData::Pending(p) => {
                    for part in &p.parts {
                        match part {
                            Part::Fid(f) => out.extend(&f.to_bit_string()),
                            Part::Small(s) => out.extend(s.bits()),
                        }
                    }
                }
            }
        }
        out.extend(self.v1.bits());
        out
    }

    #[cfg(any(debug_assertions, test))]
    fn check_shape(&self) {
        assert!(self.v1.len() < self.r);
        for (k, seg) in self.levels.iter().enumerate() {
            if let Some(seg) = seg {
                assert_eq!(
                    seg.len(),
                    (1 << k) * self.r,
                    "level {} has size {} with r {}",
                    k + 2,
                    seg.len(),
                    self.r
                );
            }
        }
        if let Some(last) = self.levels.last() {
            assert!(last.is_some(), "top level slot must be occupied");
        }
    }

    #[cfg(test)]
    fn check_invariants(&self) {
        self.check_shape();
        let mut start = 0;
        let mut ones = 0;
        for r in &self.refs {
            assert_eq!((r.start, r.ones_before), (start, ones));
            start += self.seg(r).len();
            ones += self.seg(r).ones();
        }
        assert_eq!(start, self.sealed_len);
        assert_eq!(ones, self.sealed_ones);
        self.v1.check_invariants();
    }
}

/// Routing sums for one sealed block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct BlockMeta {
    start: u64,
    ones_before: u64,
}

/// A sealed block: fully compressed, still compressing (queries fall back
/// to the retained explicit bits), or consumed by a block merge.
#[derive(Clone, Debug)]
enum Sealed {
    Built(StaticFID),
    Building(PendingSeal),
    Empty,
}

#[derive(Clone, Debug)]
struct PendingSeal {
    retained: SmallBV,
    builder: ResumableBuilder,
}

/// In-flight doubling of the block length: adjacent same-size block pairs
/// are re-encoded left to right; each source pair is dropped as soon as
/// its replacement is finished.
#[derive(Clone, Debug)]
struct Growth {
    scan: usize,
    initial_blocks: usize,
    old_len: usize,
    pair: Option<PairMerge>,
}

#[derive(Clone, Debug)]
struct PairMerge {
    at: usize,
    sink: Sink,
    src_bit: usize,
    cursor: Option<crate::rrr::BlockCursor>,
}

/// Append-only bitvector over fixed-length compressed blocks.
///
/// Appends land in an explicit tail; when the tail reaches the block
/// length `L` it is sealed and compressed over the next appends (at most
/// [`FID_MAX_WORK_PER_APPEND`] encoder steps each). Once `n ≥ L²` the
/// block length doubles and old blocks are pairwise merged in the
/// background. All queries are a boundary-array search plus one probe.
#[derive(Clone, Debug)]
pub struct AppendFID {
    block_len: usize,
    blocks: Vec<Sealed>,
    meta: Vec<BlockMeta>,
    building: VecDeque<usize>,
    growth: Option<Growth>,
    tail: SmallBV,
    sealed_bits: usize,
    sealed_ones: usize,
    stats: WorkStats,
}

impl Default for AppendFID {
    fn default() -> Self {
        Self::new()
    }
}

const MIN_BLOCK_LEN: usize = 64;
const MAX_BLOCK_LEN: usize = SMALL_CAP;

impl AppendFID {
    pub fn new() -> Self {
        Self::with_block_len(1 << 12)
    }

    /// `block_len` must be a power of two in `[64, 65536]`.
    pub fn with_block_len(block_len: usize) -> Self {
        assert!(
            block_len.is_power_of_two() && (MIN_BLOCK_LEN..=MAX_BLOCK_LEN).contains(&block_len)
        );
        AppendFID {
            block_len,
            blocks: Vec::new(),
            meta: Vec::new(),
            building: VecDeque::new(),
            growth: None,
            tail: SmallBV::new(block_len),
            sealed_bits: 0,
            sealed_ones: 0,
            stats: WorkStats::default(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.sealed_bits + self.tail.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn count(&self, b: bool) -> usize {
        let ones = self.sealed_ones + self.tail.count(true);
        if b {
            ones
        } else {
            self.len() - ones
        }
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn sealed_block_count(&self) -> usize {
        self.blocks.iter().filter(|b| !matches!(b, Sealed::Empty)).count()
    }

    pub fn building_blocks(&self) -> usize {
        self.building.len()
    }

    pub fn tail_len(&self) -> usize {
        self.tail.len()
    }

    pub fn work_stats(&self) -> WorkStats {
        self.stats
    }

    pub fn is_quiescent(&self) -> bool {
        self.building.is_empty() && self.growth.is_none()
    }

    pub fn append(&mut self, b: bool) {
        self.tail.append(b);
        if self.tail.len() == self.block_len {
            self.seal_tail();
        }
        let steps = self.advance_work();
        self.stats.record(steps);
    }

    /// Compressed size of the sealed region: per-block payloads plus the
    /// boundary arrays.
    pub fn sealed_payload_bits(&self) -> usize {
        let blocks: usize = self
            .blocks
            .iter()
            .map(|s| match s {
                Sealed::Built(f) => f.payload_bits(),
                Sealed::Building(p) => p.retained.bits().payload_bits(),
                Sealed::Empty => 0,
            })
            .sum();
        blocks + self.meta.len() * 128
    }

    /// (bits, ones, payload bits) per sealed block; requires quiescence so
    /// every block is fully compressed.
    pub fn block_stats(&self) -> Vec<(usize, usize, usize)> {
        assert!(self.is_quiescent(), "block stats need a quiescent structure");
        self.blocks
            .iter()
            .filter_map(|s| match s {
                Sealed::Built(f) => Some((f.len(), f.count(true), f.payload_bits())),
                Sealed::Building(_) => unreachable!(),
                Sealed::Empty => None,
            })
            .collect()
    }

    fn seal_tail(&mut self) {
        assert_eq!(self.tail.len(), self.block_len, "sealing a non-full tail");
        let retained = mem::replace(&mut self.tail, SmallBV::new(self.block_len));
        let builder = ResumableBuilder::new(retained.bits().clone());
        self.meta.push(BlockMeta {
            start: self.sealed_bits as u64,
            ones_before: self.sealed_ones as u64,
        });
        self.sealed_bits += retained.len();
        self.sealed_ones += retained.count(true);
        self.blocks.push(Sealed::Building(PendingSeal { retained, builder }));
        self.building.push_back(self.blocks.len() - 1);
        self.maybe_start_growth();
    }

    fn maybe_start_growth(&mut self) {
        if self.growth.is_some()
            || self.block_len >= MAX_BLOCK_LEN
            || self.len() < self.block_len * self.block_len
        {
            return;
        }
        let old_len = self.block_len;
        self.block_len *= 2;
        self.tail.set_capacity(self.block_len);
        self.growth = Some(Growth {
            scan: 0,
            initial_blocks: self.blocks.len(),
            old_len,
            pair: None,
        });
    }

    fn advance_work(&mut self) -> usize {
        let mut steps = 0;
        for _ in 0..2 {
            let Some(&i) = self.building.front() else { break };
            steps += 1;
            if self.step_seal(i) {
                self.building.pop_front();
            } else if self.building.len() > 1 {
                let i = self.building.pop_front().unwrap();
                self.building.push_back(i);
            }
        }
        if self.growth.is_some() {
            steps += self.step_growth();
        }
        steps
    }

    fn step_seal(&mut self, i: usize) -> bool {
        let Sealed::Building(p) = &mut self.blocks[i] else {
            unreachable!("queued block is not building");
        };
        if p.builder.build_step(1) == BuildProgress::Complete {
            let Sealed::Building(p) = mem::replace(&mut self.blocks[i], Sealed::Empty) else {
                unreachable!()
            };
            self.blocks[i] = Sealed::Built(p.builder.take());
            true
        } else {
            false
        }
    }

    /// One unit of block-merge work; returns builder steps done (0 when
    /// stalled behind an unfinished seal or while scanning).
    fn step_growth(&mut self) -> usize {
        if self.growth.as_ref().unwrap().pair.is_some() {
            self.step_growth_pair();
            return 1;
        }
        // look for the next adjacent pair of old-length built blocks
        let g = self.growth.as_ref().unwrap();
        let (mut scan, initial, old_len) = (g.scan, g.initial_blocks, g.old_len);
        for _ in 0..8 {
            if scan + 1 >= initial {
                self.finish_growth();
                return 0;
            }
            let eligible = |s: &Sealed| match s {
                Sealed::Built(f) => Some(f.len()),
                // a seal this recent sits at the end of the scan range;
                // wait for its dictionary instead of skipping it
                Sealed::Building(_) => None,
                Sealed::Empty => Some(0),
            };
            match (eligible(&self.blocks[scan]), eligible(&self.blocks[scan + 1])) {
                (Some(a), Some(b)) if a == old_len && b == old_len => {
                    let g = self.growth.as_mut().unwrap();
                    g.scan = scan;
                    g.pair = Some(PairMerge {
                        at: scan,
                        sink: Sink::new(),
                        src_bit: 0,
                        cursor: None,
                    });
                    return 0;
                }
                (Some(_), Some(_)) => scan += 1,
                _ => break, // stalled behind an in-flight seal
            }
        }
        self.growth.as_mut().unwrap().scan = scan;
        0
    }

    /// Pulls up to 63 source bits into the merged block; swaps it in when
    /// the pair is exhausted.
    fn step_growth_pair(&mut self) {
        let pair = self.growth.as_mut().unwrap().pair.as_mut().unwrap();
        let at = pair.at;
        let (lo, hi) = {
            let (a, b) = self.blocks.split_at(at + 1);
            let (Sealed::Built(lo), Sealed::Built(hi)) = (&a[at], &b[0]) else {
                unreachable!("merge sources are built")
            };
            (lo, hi)
        };
        let total = lo.len() + hi.len();
        let want = 63.min(total - pair.src_bit) as u32;
        let mut got = 0u32;
        let mut word = 0u64;
        while got < want {
            let pos = pair.src_bit + got as usize;
            let (src, off) = if pos < lo.len() { (lo, pos) } else { (hi, pos - lo.len()) };
            let take = (want - got).min((src.len() - off) as u32);
            let cur = pair
                .cursor
                .get_or_insert_with(|| src.cursor_at(off / crate::rrr::BLOCK_BITS));
            word |= (src.read_bits(cur, off, take)) << got;
            got += take;
            if off + take as usize == src.len() {
                pair.cursor = None;
            }
        }
        pair.sink.push_bits(word, want);
        pair.src_bit += want as usize;
        if pair.src_bit == total {
            let merged = mem::take(&mut pair.sink).finish();
            let end = BlockMeta {
                start: self.meta[at].start + merged.len() as u64,
                ones_before: self.meta[at].ones_before + merged.count(true) as u64,
            };
            self.blocks[at] = Sealed::Built(merged);
            self.blocks[at + 1] = Sealed::Empty;
            self.meta[at + 1] = end;
            let g = self.growth.as_mut().unwrap();
            g.scan = at + 2;
            g.pair = None;
        }
    }

    fn finish_growth(&mut self) {
        self.growth = None;
        // drop consumed slots and rebuild the boundary array
        let mut remap = vec![usize::MAX; self.blocks.len()];
        let mut kept = 0usize;
        for i in 0..self.blocks.len() {
            if !matches!(self.blocks[i], Sealed::Empty) {
                remap[i] = kept;
                kept += 1;
            }
        }
        let old = mem::take(&mut self.blocks);
        self.meta.clear();
        let mut start = 0u64;
        let mut ones = 0u64;
        for s in old {
            let (len, cnt) = match &s {
                Sealed::Built(f) => (f.len(), f.count(true)),
                Sealed::Building(p) => (p.retained.len(), p.retained.count(true)),
                Sealed::Empty => continue,
            };
            self.meta.push(BlockMeta {
                start,
                ones_before: ones,
            });
            self.blocks.push(s);
            start += len as u64;
            ones += cnt as u64;
        }
        for i in self.building.iter_mut() {
            *i = remap[*i];
            debug_assert_ne!(*i, usize::MAX);
        }
        debug_assert_eq!(start as usize, self.sealed_bits);
        debug_assert_eq!(ones as usize, self.sealed_ones);
    }

    /// Runs all pending seals and merges to completion.
    pub fn quiesce(&mut self) {
        while !self.is_quiescent() {
            while let Some(&i) = self.building.front() {
                if self.step_seal(i) {
                    self.building.pop_front();
                }
            }
            while self.growth.is_some() {
                self.step_growth();
            }
        }
    }

    /// Block index holding `pos`; `pos` must be inside the sealed region.
    fn route(&self, pos: usize) -> usize {
        debug_assert!(pos < self.sealed_bits);
        let i = self.meta.partition_point(|m| m.start as usize <= pos) - 1;
        debug_assert!(!matches!(self.blocks[i], Sealed::Empty));
        i
    }

    fn block_query<T>(
        &self,
        i: usize,
        f: impl FnOnce(&StaticFID) -> T,
        s: impl FnOnce(&SmallBV) -> T,
    ) -> T {
        match &self.blocks[i] {
            Sealed::Built(fid) => f(fid),
            Sealed::Building(p) => s(&p.retained),
            Sealed::Empty => unreachable!("routed into a consumed block"),
        }
    }

    pub fn access(&self, pos: usize) -> bool {
        assert!(pos < self.len(), "access {pos} out of range (len {})", self.len());
        if pos >= self.sealed_bits {
            return self.tail.access(pos - self.sealed_bits);
        }
        let i = self.route(pos);
        let off = pos - self.meta[i].start as usize;
        self.block_query(i, |f| f.access(off), |s| s.access(off))
    }

    pub fn get(&self, pos: usize) -> Option<bool> {
        (pos < self.len()).then(|| self.access(pos))
    }

    pub fn rank(&self, b: bool, pos: usize) -> usize {
        assert!(pos <= self.len(), "rank {pos} out of range (len {})", self.len());
        if pos >= self.sealed_bits {
            let sealed = if b {
                self.sealed_ones
            } else {
                self.sealed_bits - self.sealed_ones
            };
            return sealed + self.tail.rank(b, pos - self.sealed_bits);
        }
        let i = self.route(pos);
        let m = &self.meta[i];
        let before = if b {
            m.ones_before as usize
        } else {
            (m.start - m.ones_before) as usize
        };
        let off = pos - m.start as usize;
        before + self.block_query(i, |f| f.rank(b, off), |s| s.rank(b, off))
    }

    pub fn select(&self, b: bool, idx: usize) -> Option<usize> {
        if idx >= self.count(b) {
            return None;
        }
        let sealed = if b {
            self.sealed_ones
        } else {
            self.sealed_bits - self.sealed_ones
        };
        if idx >= sealed {
            return Some(self.sealed_bits + self.tail.select(b, idx - sealed).unwrap());
        }
        let before = |m: &BlockMeta| {
            if b {
                m.ones_before as usize
            } else {
                (m.start - m.ones_before) as usize
            }
        };
        let i = self.meta.partition_point(|m| before(m) <= idx) - 1;
        let m = &self.meta[i];
        let within = self.block_query(i, |f| f.select(b, idx - before(m)), |s| s.select(b, idx - before(m)));
        Some(m.start as usize + within.unwrap())
    }

    pub fn to_bit_string(&self) -> BitString {
        let mut out = BitString::with_capacity(self.len());
        for s in &self.blocks {
            match s {
                Sealed::Built(f) => out.extend(&f.to_bit_string()),
                Sealed::Building(p) => out.extend(p.retained.bits()),
                Sealed::Empty => {}
            }
        }
        out.extend(self.tail.bits());
        out
    }

    /// Serialized form; only a quiescent structure has one.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if !self.is_quiescent() {
            return Err(Error::InvalidArgument(
                "serialization requires a quiescent bitvector",
            ));
        }
        let mut out = Vec::new();
        out.extend_from_slice(b"ABV1");
        put_u64(&mut out, self.block_len as u64);
        put_u64(&mut out, self.blocks.len() as u64);
        for s in &self.blocks {
            match s {
                Sealed::Built(f) => f.write_into(&mut out),
                _ => unreachable!("quiescent structure has only built blocks"),
            }
        }
        self.tail.bits().write_into(&mut out);
        for m in &self.meta {
            put_u64(&mut out, m.start);
            put_u64(&mut out, m.ones_before);
        }
        Ok(out)
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = Reader::new(data);
        r.magic(b"ABV1")?;
        let block_len = r.len("block length")?;
        if !block_len.is_power_of_two() || !(MIN_BLOCK_LEN..=MAX_BLOCK_LEN).contains(&block_len) {
            return decode_err("bad block length");
        }
        let count = r.len("block count")?;
        let mut blocks = Vec::new();
        let mut sealed_bits = 0usize;
        let mut sealed_ones = 0usize;
        let mut expect_meta = Vec::new();
        for i in 0..count {
            let fid = StaticFID::read_from(&mut r)?;
            if fid.len() == 0 || fid.len() > block_len {
                return decode_err(format!("block {i}: bad length {}", fid.len()));
            }
            expect_meta.push(BlockMeta {
                start: sealed_bits as u64,
                ones_before: sealed_ones as u64,
            });
            sealed_bits += fid.len();
            sealed_ones += fid.count(true);
            blocks.push(Sealed::Built(fid));
        }
        let tail_bits = BitString::read_from(&mut r)?;
        if tail_bits.len() >= block_len {
            return decode_err("tail at or beyond the block length");
        }
        for (i, m) in expect_meta.iter().enumerate() {
            let start = r.u64("block start")?;
            let ones_before = r.u64("block ones")?;
            if start != m.start || ones_before != m.ones_before {
                return decode_err(format!("block {i}: boundary sums disagree with content"));
            }
        }
        r.finish("bitvector")?;
        let tail = SmallBV::from_bits(tail_bits, block_len);
        Ok(AppendFID {
            block_len,
            blocks,
            meta: expect_meta,
            building: VecDeque::new(),
            growth: None,
            tail,
            sealed_bits,
            sealed_ones,
            stats: WorkStats::default(),
        })
    }

    #[cfg(test)]
    fn check_invariants(&self) {
        let mut start = 0u64;
        let mut ones = 0u64;
        for (i, s) in self.blocks.iter().enumerate() {
            assert_eq!(self.meta[i].start, start, "block {i} start");
            assert_eq!(self.meta[i].ones_before, ones, "block {i} ones");
            let (len, cnt) = match s {
                Sealed::Built(f) => (f.len(), f.count(true)),
                Sealed::Building(p) => (p.retained.len(), p.retained.count(true)),
                Sealed::Empty => {
                    // consumed slot: boundary pinned to the running position
                    assert_eq!(self.meta[i].start, start);
                    assert_eq!(self.meta[i].ones_before, ones);
                    continue;
                }
            };
            if self.growth.is_none() {
                assert!(len == self.block_len || len < self.block_len && len.is_power_of_two());
            }
            start += len as u64;
            ones += cnt as u64;
        }
        assert_eq!(start as usize, self.sealed_bits);
        assert_eq!(ones as usize, self.sealed_ones);
        assert!(self.tail.len() < self.block_len);
        self.tail.check_invariants();
    }
}
