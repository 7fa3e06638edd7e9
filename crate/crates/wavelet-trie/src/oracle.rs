//! Brute-force reference implementation of every sequence operation.
//!
//! A plain vector of bit strings answered by linear scans: trivially correct,
//! gloriously slow. Differential tests drive the real structures against it,
//! and the CLI self-check replays samples through it at runtime, so it lives
//! in the library proper rather than in a test support module.

use std::collections::BTreeMap;

use crate::bits::BitString;

/// Growable sequence of bit strings with scan-based queries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VectorOracle {
    seq: Vec<BitString>,
}

impl VectorOracle {
    pub fn new() -> Self {
        VectorOracle { seq: Vec::new() }
    }

    pub fn from_seq<I: IntoIterator<Item = BitString>>(seq: I) -> Self {
        VectorOracle {
            seq: seq.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn strings(&self) -> &[BitString] {
        &self.seq
    }

    pub fn append(&mut self, s: BitString) {
        self.seq.push(s);
    }

    pub fn insert(&mut self, pos: usize, s: BitString) {
        self.seq.insert(pos, s);
    }

    pub fn delete(&mut self, pos: usize) -> BitString {
        self.seq.remove(pos)
    }

    pub fn access(&self, pos: usize) -> &BitString {
        &self.seq[pos]
    }

    /// Occurrences of exactly `s` in the first `pos` elements.
    pub fn rank(&self, s: &BitString, pos: usize) -> usize {
        self.seq[..pos].iter().filter(|t| *t == s).count()
    }

    /// Position of the `(idx+1)`-th occurrence of `s`, if that many exist.
    pub fn select(&self, s: &BitString, idx: usize) -> Option<usize> {
        self.seq
            .iter()
            .enumerate()
            .filter(|(_, t)| *t == s)
            .nth(idx)
            .map(|(i, _)| i)
    }

    /// Occurrences of strings starting with `p` in the first `pos` elements.
    pub fn rank_prefix(&self, p: &BitString, pos: usize) -> usize {
        self.seq[..pos].iter().filter(|t| t.starts_with(p)).count()
    }

    /// Position of the `(idx+1)`-th element starting with `p`.
    pub fn select_prefix(&self, p: &BitString, idx: usize) -> Option<usize> {
        self.seq
            .iter()
            .enumerate()
            .filter(|(_, t)| t.starts_with(p))
            .nth(idx)
            .map(|(i, _)| i)
    }

    /// Exact counts of the distinct strings in `[l, r)`, keyed in string
    /// order. Counts always sum to `r - l`.
    pub fn histogram(&self, l: usize, r: usize) -> BTreeMap<BitString, usize> {
        let mut out = BTreeMap::new();
        for s in &self.seq[l..r] {
            *out.entry(s.clone()).or_insert(0) += 1;
        }
        out
    }

    /// The element occurring more than `(r - l) / 2` times in `[l, r)`,
    /// if one exists.
    pub fn majority(&self, l: usize, r: usize) -> Option<BitString> {
        self.histogram(l, r)
            .into_iter()
            .find(|(_, c)| 2 * c > r - l)
            .map(|(s, _)| s)
    }

    /// Strings occurring at least `t` times in `[l, r)`, ordered by count
    /// descending, ties in string order.
    pub fn threshold(&self, l: usize, r: usize, t: usize) -> Vec<(BitString, usize)> {
        let mut out: Vec<(BitString, usize)> = self
            .histogram(l, r)
            .into_iter()
            .filter(|&(_, c)| c >= t)
            .collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }
}
