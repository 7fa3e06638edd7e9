//! Range analytics over a subsequence `S[l, r)`: distinct values with
//! counts, strict majority, threshold counting, and a streaming iterator.
//!
//! All of these exploit the same fact: the elements of a range map to
//! contiguous sub-ranges in every child, so a node can be processed with two
//! ranks and branches holding no range elements prune away entirely.

use crate::bits::BitString;
use crate::error::{Error, Result};

use super::{NodeBits, WNode, WaveletTrie};

impl<B: NodeBits> WaveletTrie<B> {
    fn check_range(&self, l: usize, r: usize) -> Result<()> {
        if l > r || r > self.n {
            let pos = if l > r { l } else { r };
            return Err(Error::Range { pos, len: self.n });
        }
        Ok(())
    }

    /// Distinct strings of `S[l, r)` with their occurrence counts, in
    /// string order. Branches without range elements are never visited, so
    /// the cost scales with the answer, not the alphabet.
    pub fn range_distinct(&self, l: usize, r: usize) -> Result<Vec<(BitString, usize)>> {
        self.range_distinct_by_prefix(l, r, usize::MAX)
    }

    /// Groups `S[l, r)` by the first `prefix_bits` bits; strings shorter
    /// than the cut form their own groups. The traversal stops at the
    /// shallowest node whose path reaches the cut, so grouping by a short
    /// prefix is cheaper than listing full distinct values.
    pub fn range_distinct_by_prefix(
        &self,
        l: usize,
        r: usize,
        prefix_bits: usize,
    ) -> Result<Vec<(BitString, usize)>> {
        self.check_range(l, r)?;
        let mut out = Vec::new();
        if l < r {
            let root = self.root.as_ref().expect("nonempty sequence has a root");
            let mut prefix = BitString::new();
            distinct_rec(root, l, r, prefix_bits, &mut prefix, &mut out);
        }
        Ok(out)
    }

    /// The string occurring more than `(r - l) / 2` times in `S[l, r)`, if
    /// any. At most one branch can exceed the half count at each node, so
    /// the walk follows a single path. An empty range has no majority.
    pub fn range_majority(&self, l: usize, r: usize) -> Result<Option<BitString>> {
        self.check_range(l, r)?;
        if l == r {
            return Ok(None);
        }
        let need = r - l; // majority means 2 * count > need
        let mut node = self.root.as_ref().expect("nonempty sequence has a root");
        let (mut l, mut r) = (l, r);
        let mut prefix = BitString::new();
        loop {
            prefix.extend(&node.label);
            match &node.inner {
                None => {
                    return Ok(if 2 * (r - l) > need { Some(prefix) } else { None });
                }
                Some(inner) => {
                    let l0 = inner.bits.rank(false, l);
                    let r0 = inner.bits.rank(false, r);
                    let c0 = r0 - l0;
                    let c1 = (r - l) - c0;
                    if 2 * c0 > need {
                        prefix.push(false);
                        node = &inner.children[0];
                        l = l0;
                        r = r0;
                    } else if 2 * c1 > need {
                        prefix.push(true);
                        node = &inner.children[1];
                        l -= l0;
                        r -= r0;
                    } else {
                        return Ok(None);
                    }
                }
            }
        }
    }

    /// Strings occurring at least `t` times in `S[l, r)` with their counts,
    /// ordered by count descending, ties in string order. Pruning is exact:
    /// a string with `t` occurrences keeps at least `t` matching bits at
    /// every ancestor, so discarded branches cannot contain answers.
    pub fn range_threshold(
        &self,
        l: usize,
        r: usize,
        t: usize,
    ) -> Result<Vec<(BitString, usize)>> {
        self.check_range(l, r)?;
        if t == 0 {
            return Err(Error::InvalidArgument("threshold must be at least 1"));
        }
        let mut out = Vec::new();
        if r - l >= t {
            let root = self.root.as_ref().expect("nonempty sequence has a root");
            let mut prefix = BitString::new();
            threshold_rec(root, l, r, t, &mut prefix, &mut out);
        }
        out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }

    /// Streaming iterator over `S[l], ..., S[r-1]`. The iterator keeps a
    /// cursor per visited node, paid for with a single rank when the node is
    /// first entered; afterwards cursors advance by one per element, so a
    /// full-range sweep costs one rank per touched node instead of one per
    /// element per level.
    pub fn range_iter(&self, l: usize, r: usize) -> Result<RangeIter<'_, B>> {
        self.check_range(l, r)?;
        Ok(RangeIter {
            trie: self,
            cursors: None,
            start: l,
            next: l,
            end: r,
            rank_calls: 0,
            nodes_touched: 0,
        })
    }
}

fn distinct_rec<B: NodeBits>(
    node: &WNode<B>,
    l: usize,
    r: usize,
    cut: usize,
    prefix: &mut BitString,
    out: &mut Vec<(BitString, usize)>,
) {
    debug_assert!(l < r);
    let before = prefix.len();
    prefix.extend(&node.label);
    match &node.inner {
        None => out.push((prefix.slice(0, prefix.len().min(cut)), r - l)),
        Some(_) if prefix.len() >= cut => {
            // Everything below shares the first `cut` bits: one group.
            out.push((prefix.slice(0, cut), r - l));
        }
        Some(inner) => {
            let l0 = inner.bits.rank(false, l);
            let r0 = inner.bits.rank(false, r);
            if l0 < r0 {
                prefix.push(false);
                distinct_rec(&inner.children[0], l0, r0, cut, prefix, out);
                prefix.truncate(prefix.len() - 1);
            }
            if l - l0 < r - r0 {
                prefix.push(true);
                distinct_rec(&inner.children[1], l - l0, r - r0, cut, prefix, out);
                prefix.truncate(prefix.len() - 1);
            }
        }
    }
    prefix.truncate(before);
}

fn threshold_rec<B: NodeBits>(
    node: &WNode<B>,
    l: usize,
    r: usize,
    t: usize,
    prefix: &mut BitString,
    out: &mut Vec<(BitString, usize)>,
) {
    debug_assert!(r - l >= t);
    let before = prefix.len();
    prefix.extend(&node.label);
    match &node.inner {
        None => out.push((prefix.clone(), r - l)),
        Some(inner) => {
            let l0 = inner.bits.rank(false, l);
            let r0 = inner.bits.rank(false, r);
            if r0 - l0 >= t {
                prefix.push(false);
                threshold_rec(&inner.children[0], l0, r0, t, prefix, out);
                prefix.truncate(prefix.len() - 1);
            }
            if (r - r0) - (l - l0) >= t {
                prefix.push(true);
                threshold_rec(&inner.children[1], l - l0, r - r0, t, prefix, out);
                prefix.truncate(prefix.len() - 1);
            }
        }
    }
    prefix.truncate(before);
}

/// Cursor mirror of the trie built lazily during iteration: `pos` is the
/// position inside the corresponding node's β of the next element to route.
struct IterNode {
    pos: usize,
    children: [Option<Box<IterNode>>; 2],
}

/// See [`WaveletTrie::range_iter`].
pub struct RangeIter<'a, B: NodeBits> {
    trie: &'a WaveletTrie<B>,
    cursors: Option<Box<IterNode>>,
    start: usize,
    next: usize,
    end: usize,
    rank_calls: usize,
    nodes_touched: usize,
}

impl<B: NodeBits> RangeIter<'_, B> {
    /// Rank operations performed so far; at most one per touched node.
    pub fn rank_calls(&self) -> usize {
        self.rank_calls
    }

    /// Distinct trie nodes entered so far.
    pub fn nodes_touched(&self) -> usize {
        self.nodes_touched
    }
}

impl<B: NodeBits> Iterator for RangeIter<'_, B> {
    type Item = BitString;

    fn next(&mut self) -> Option<BitString> {
        if self.next >= self.end {
            return None;
        }
        let mut node = self.trie.root.as_ref().expect("range checked nonempty");
        if self.cursors.is_none() {
            self.cursors = Some(Box::new(IterNode {
                pos: self.start,
                children: [None, None],
            }));
            self.nodes_touched += 1;
        }
        let mut cur = self.cursors.as_deref_mut().expect("created above");
        let mut out = BitString::new();
        loop {
            out.extend(&node.label);
            let Some(inner) = &node.inner else { break };
            let p = cur.pos;
            cur.pos += 1;
            let b = inner.bits.access(p);
            out.push(b);
            let bi = b as usize;
            if cur.children[bi].is_none() {
                // First entry into this child: one rank pins its cursor.
                let start = inner.bits.rank(b, p);
                self.rank_calls += 1;
                self.nodes_touched += 1;
                cur.children[bi] = Some(Box::new(IterNode {
                    pos: start,
                    children: [None, None],
                }));
            }
            cur = cur.children[bi].as_deref_mut().expect("created above");
            node = &inner.children[bi];
        }
        self.next += 1;
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = self.end - self.next;
        (rest, Some(rest))
    }
}
