//! Fully dynamic bitvector: insert and delete at arbitrary positions.
//!
//! The bit sequence is run-length encoded, each run stored as a gamma
//! code. The codes are cut into chunks of a few hundred encoded bits, and
//! the chunks sit in an AVL tree ordered by position, every node carrying
//! subtree bit/one totals. All operations descend one root-to-leaf path
//! and re-encode at most two chunks, so everything is O(log n) plus a
//! bounded chunk rebuild.
//!
//! A run of n equal bits costs about 2·log2(n) encoded bits, which is how
//! [`DynamicFID::init`] represents a constant bitvector of any length in
//! a single tiny chunk.

use crate::bits::{gamma_append, gamma_decode, BitString};

/// Encoded bits a chunk aims for.
const TARGET: usize = 256;
/// Split a chunk above this.
const MAX_ENC: usize = 2 * TARGET;
/// Merge a chunk into its successor below this (rightmost chunk exempt).
const MIN_ENC: usize = TARGET / 2;

fn gamma_len(n: u64) -> usize {
    debug_assert!(n > 0);
    2 * (64 - n.leading_zeros() as usize) - 1
}

/// Maximal runs as (bit value, length) pairs: lengths positive, values
/// alternating.
fn canonicalize(pairs: &mut Vec<(bool, u64)>) {
    let mut out = 0usize;
    for i in 0..pairs.len() {
        let (v, len) = pairs[i];
        if len == 0 {
            continue;
        }
        if out > 0 && pairs[out - 1].0 == v {
            pairs[out - 1].1 += len;
        } else {
            pairs[out] = (v, len);
            out += 1;
        }
    }
    pairs.truncate(out);
}

/// One run-length-encoded piece of the bitvector.
#[derive(Clone, Debug, Default)]
struct Chunk {
    /// concatenated gamma codes of the run lengths
    encoded: BitString,
    /// value of the first run
    first: bool,
    bits: usize,
    ones: usize,
    runs: usize,
}

impl Chunk {
    fn from_pairs(pairs: &[(bool, u64)]) -> Chunk {
        let mut c = Chunk::default();
        if pairs.is_empty() {
            return c;
        }
        c.first = pairs[0].0;
        for &(v, len) in pairs {
            debug_assert!(len > 0);
            gamma_append(&mut c.encoded, len).expect("runs are positive");
            c.bits += len as usize;
            if v {
                c.ones += len as usize;
            }
            c.runs += 1;
        }
        c
    }

    fn pairs(&self) -> Vec<(bool, u64)> {
        let mut out = Vec::with_capacity(self.runs);
        let mut pos = 0usize;
        let mut v = self.first;
        while pos < self.encoded.len() {
            let (len, used) = gamma_decode(&self.encoded, pos).expect("chunk encoding is valid");
            out.push((v, len));
            pos += used;
            v = !v;
        }
        out
    }

    fn enc_len(&self) -> usize {
        self.encoded.len()
    }

    /// Run index and offset of `off` within it; `off < bits`.
    fn locate(pairs: &[(bool, u64)], off: usize) -> (usize, u64) {
        let mut start = 0usize;
        for (i, &(_, len)) in pairs.iter().enumerate() {
            if off < start + len as usize {
                return (i, (off - start) as u64);
            }
            start += len as usize;
        }
        unreachable!("offset beyond chunk");
    }

    fn access(&self, off: usize) -> bool {
        debug_assert!(off < self.bits);
        let mut start = 0usize;
        let mut pos = 0usize;
        let mut v = self.first;
        loop {
            let (len, used) = gamma_decode(&self.encoded, pos).expect("chunk encoding is valid");
            if off < start + len as usize {
                return v;
            }
            start += len as usize;
            pos += used;
            v = !v;
        }
    }

    /// Ones strictly before `off`; `off <= bits`.
    fn rank1(&self, off: usize) -> usize {
        debug_assert!(off <= self.bits);
        let mut seen = 0usize;
        let mut ones = 0usize;
        let mut pos = 0usize;
        let mut v = self.first;
        while seen < off {
            let (len, used) = gamma_decode(&self.encoded, pos).expect("chunk encoding is valid");
            let take = (len as usize).min(off - seen);
            if v {
                ones += take;
            }
            seen += take;
            pos += used;
            v = !v;
        }
        ones
    }

    /// Position of the `(idx+1)`-th `b`; `idx` must be in range.
    fn select(&self, b: bool, idx: usize) -> usize {
        let mut start = 0usize;
        let mut count = 0usize;
        let mut pos = 0usize;
        let mut v = self.first;
        loop {
            let (len, used) = gamma_decode(&self.encoded, pos).expect("chunk encoding is valid");
            if v == b {
                if idx < count + len as usize {
                    return start + (idx - count);
                }
                count += len as usize;
            }
            start += len as usize;
            pos += used;
            v = !v;
        }
    }

    /// Inserts `b` before position `off` (`off <= bits`). A bit landing
    /// inside a run of the same value just lengthens that run.
    fn insert(&mut self, off: usize, b: bool) {
        let mut pairs = self.pairs();
        if off == self.bits {
            pairs.push((b, 1));
        } else {
            let (i, k) = Self::locate(&pairs, off);
            let (v, len) = pairs[i];
            if v == b {
                pairs[i].1 += 1;
            } else {
                // split the run around the new bit; zero-length ends are
                // cleaned up and equal neighbors re-merged below
                pairs[i].1 = k;
                pairs.insert(i + 1, (b, 1));
                pairs.insert(i + 2, (v, len - k));
            }
        }
        canonicalize(&mut pairs);
        *self = Chunk::from_pairs(&pairs);
    }

    /// Removes the bit at `off` (`off < bits`) and returns it.
    fn delete(&mut self, off: usize) -> bool {
        let mut pairs = self.pairs();
        let (i, _) = Self::locate(&pairs, off);
        let bit = pairs[i].0;
        pairs[i].1 -= 1;
        canonicalize(&mut pairs);
        *self = Chunk::from_pairs(&pairs);
        bit
    }

    #[cfg(test)]
    fn check(&self, rightmost: bool) {
        let pairs = self.pairs();
        assert!(pairs.iter().all(|&(_, len)| len > 0));
        for w in pairs.windows(2) {
            assert_ne!(w[0].0, w[1].0, "runs must alternate");
        }
        assert_eq!(pairs.iter().map(|&(_, l)| l as usize).sum::<usize>(), self.bits);
        assert_eq!(
            pairs.iter().filter(|&&(v, _)| v).map(|&(_, l)| l as usize).sum::<usize>(),
            self.ones
        );
        assert_eq!(pairs.len(), self.runs);
        assert!(self.enc_len() <= MAX_ENC);
        if !rightmost {
            assert!(self.bits > 0);
            assert!(self.enc_len() >= MIN_ENC, "undersized interior chunk");
        }
    }
}

/// Splits `pairs` at run boundaries until every piece encodes to at most
/// [`MAX_ENC`] bits. Pieces of an oversized input always end up at or
/// above [`MIN_ENC`].
fn split_pairs(pairs: Vec<(bool, u64)>) -> Vec<Vec<(bool, u64)>> {
    let enc: usize = pairs.iter().map(|&(_, l)| gamma_len(l)).sum();
    if enc <= MAX_ENC {
        return vec![pairs];
    }
    let mut cum = 0usize;
    let mut cut = pairs.len();
    for (i, &(_, l)) in pairs.iter().enumerate() {
        cum += gamma_len(l);
        if cum >= enc / 2 {
            cut = i + 1;
            break;
        }
    }
    debug_assert!(cut < pairs.len(), "a single run never exceeds the split bound");
    let mut head = pairs;
    let tail = head.split_off(cut);
    let mut out = split_pairs(head);
    out.extend(split_pairs(tail));
    out
}

type Tree = Option<Box<Node>>;

#[derive(Clone, Debug)]
struct Node {
    chunk: Chunk,
    left: Tree,
    right: Tree,
    height: i8,
    sub_bits: usize,
    sub_ones: usize,
}

fn height(t: &Tree) -> i8 {
    t.as_ref().map_or(0, |n| n.height)
}

fn bits_of(t: &Tree) -> usize {
    t.as_ref().map_or(0, |n| n.sub_bits)
}

fn ones_of(t: &Tree) -> usize {
    t.as_ref().map_or(0, |n| n.sub_ones)
}

fn count_of(t: &Tree, b: bool) -> usize {
    if b {
        ones_of(t)
    } else {
        bits_of(t) - ones_of(t)
    }
}

fn leaf(chunk: Chunk) -> Tree {
    let mut n = Box::new(Node {
        chunk,
        left: None,
        right: None,
        height: 1,
        sub_bits: 0,
        sub_ones: 0,
    });
    n.update();
    Some(n)
}

impl Node {
    fn update(&mut self) {
        self.height = 1 + height(&self.left).max(height(&self.right));
        self.sub_bits = bits_of(&self.left) + self.chunk.bits + bits_of(&self.right);
        self.sub_ones = ones_of(&self.left) + self.chunk.ones + ones_of(&self.right);
    }
}

fn rotate_left(t: &mut Tree) {
    let mut n = t.take().unwrap();
    let mut r = n.right.take().unwrap();
    n.right = r.left.take();
    n.update();
    r.left = Some(n);
    r.update();
    *t = Some(r);
}

fn rotate_right(t: &mut Tree) {
    let mut n = t.take().unwrap();
    let mut l = n.left.take().unwrap();
    n.left = l.right.take();
    n.update();
    l.right = Some(n);
    l.update();
    *t = Some(l);
}

fn rebalance(t: &mut Tree) {
    let Some(n) = t.as_mut() else { return };
    n.update();
    let bf = height(&n.left) - height(&n.right);
    if bf > 1 {
        let l = n.left.as_mut().unwrap();
        if height(&l.left) < height(&l.right) {
            rotate_left(&mut n.left);
        }
        rotate_right(t);
    } else if bf < -1 {
        let r = n.right.as_mut().unwrap();
        if height(&r.right) < height(&r.left) {
            rotate_right(&mut n.right);
        }
        rotate_left(t);
    }
}

/// Inserts `chunk` as the first chunk of subtree `t`.
fn push_leftmost(t: &mut Tree, chunk: Chunk) {
    match t {
        None => *t = leaf(chunk),
        Some(n) => push_leftmost(&mut n.left, chunk),
    }
    rebalance(t);
}

/// Replaces the node's chunk after a mutation, splitting it when the
/// encoding grew past the bound.
fn place_chunk(n: &mut Node) {
    if n.chunk.enc_len() <= MAX_ENC {
        return;
    }
    let mut pieces = split_pairs(n.chunk.pairs());
    n.chunk = Chunk::from_pairs(&pieces.remove(0));
    for p in pieces.into_iter().rev() {
        push_leftmost(&mut n.right, Chunk::from_pairs(&p));
    }
}

fn insert_rec(t: &mut Tree, pos: usize, b: bool) {
    match t {
        None => {
            debug_assert_eq!(pos, 0);
            *t = leaf(Chunk::from_pairs(&[(b, 1)]));
            return;
        }
        Some(n) => {
            let lb = bits_of(&n.left);
            if pos < lb {
                insert_rec(&mut n.left, pos, b);
            } else if pos > lb + n.chunk.bits {
                insert_rec(&mut n.right, pos - lb - n.chunk.bits, b);
            } else {
                n.chunk.insert(pos - lb, b);
                place_chunk(n);
            }
        }
    }
    rebalance(t);
}

/// Removes the node at `t`, keeping its subtrees; returns its chunk.
fn remove_node(t: &mut Tree) -> Chunk {
    {
        let n = t.as_mut().unwrap();
        if n.left.is_some() && n.right.is_some() {
            let succ = remove_leftmost(&mut n.right);
            let chunk = std::mem::replace(&mut n.chunk, succ);
            rebalance(t);
            return chunk;
        }
    }
    let n = t.take().unwrap();
    *t = if n.left.is_some() { n.left } else { n.right };
    n.chunk
}

fn remove_leftmost(t: &mut Tree) -> Chunk {
    let has_left = t.as_ref().unwrap().left.is_some();
    if has_left {
        let chunk = remove_leftmost(&mut t.as_mut().unwrap().left);
        rebalance(t);
        chunk
    } else {
        remove_node(t)
    }
}

/// Deletes the bit at `pos`. Returns the bit and, when the touched chunk
/// fell below the merge bound, the chunk itself together with its start
/// position in the subtree (it has been removed from the tree and must be
/// merged back in by the caller).
fn delete_rec(t: &mut Tree, pos: usize, rightmost: bool) -> (bool, Option<(usize, Chunk)>) {
    let n = t.as_mut().unwrap();
    let lb = bits_of(&n.left);
    let (bit, pending) = if pos < lb {
        delete_rec(&mut n.left, pos, false)
    } else if pos >= lb + n.chunk.bits {
        let off = lb + n.chunk.bits;
        let (bit, pending) = delete_rec(&mut n.right, pos - off, rightmost);
        (bit, pending.map(|(p, c)| (p + off, c)))
    } else {
        let bit = n.chunk.delete(pos - lb);
        let at_global_end = rightmost && n.right.is_none();
        if n.chunk.bits == 0 || (n.chunk.enc_len() < MIN_ENC && !at_global_end) {
            let chunk = remove_node(t);
            let out = (chunk.bits > 0).then_some((lb, chunk));
            return (bit, out);
        }
        (bit, None)
    };
    rebalance(t);
    (bit, pending)
}

/// Prepends `extra`'s runs into the chunk containing `pos`.
fn merge_rec(t: &mut Tree, pos: usize, extra: Chunk) {
    let n = t.as_mut().unwrap();
    let lb = bits_of(&n.left);
    if pos < lb {
        merge_rec(&mut n.left, pos, extra);
    } else if pos >= lb + n.chunk.bits {
        merge_rec(&mut n.right, pos - lb - n.chunk.bits, extra);
    } else {
        debug_assert_eq!(pos, lb, "merge target must be a chunk start");
        let mut pairs = extra.pairs();
        pairs.extend(n.chunk.pairs());
        canonicalize(&mut pairs);
        n.chunk = Chunk::from_pairs(&pairs);
        place_chunk(n);
    }
    rebalance(t);
}

/// Dynamic rank/select bitvector with position edits.
#[derive(Clone, Debug, Default)]
pub struct DynamicFID {
    root: Tree,
}

impl DynamicFID {
    pub fn new() -> Self {
        DynamicFID { root: None }
    }

    /// The constant bitvector `b^n`, built in one chunk.
    pub fn init(b: bool, n: usize) -> Self {
        if n == 0 {
            return Self::new();
        }
        DynamicFID {
            root: leaf(Chunk::from_pairs(&[(b, n as u64)])),
        }
    }

    pub fn from_bit_string(bits: &BitString) -> Self {
        let mut pairs: Vec<(bool, u64)> = Vec::new();
        for b in bits.iter() {
            match pairs.last_mut() {
                Some((v, len)) if *v == b => *len += 1,
                _ => pairs.push((b, 1)),
            }
        }
        // cut into chunks around the target size, then build balanced
        let mut chunks = Vec::new();
        let mut cur: Vec<(bool, u64)> = Vec::new();
        let mut enc = 0usize;
        for p in pairs {
            cur.push(p);
            enc += gamma_len(p.1);
            if enc >= TARGET {
                chunks.push(Chunk::from_pairs(&cur));
                cur.clear();
                enc = 0;
            }
        }
        if !cur.is_empty() {
            chunks.push(Chunk::from_pairs(&cur));
        }
        fn build(chunks: &mut std::vec::IntoIter<Chunk>, n: usize) -> Tree {
            if n == 0 {
                return None;
            }
            let left = build(chunks, n / 2);
            let chunk = chunks.next().unwrap();
            let right = build(chunks, n - n / 2 - 1);
            let mut node = Box::new(Node {
                chunk,
                left,
                right,
                height: 0,
                sub_bits: 0,
                sub_ones: 0,
            });
            node.update();
            Some(node)
        }
        let n = chunks.len();
        DynamicFID {
            root: build(&mut chunks.into_iter(), n),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        bits_of(&self.root)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn count(&self, b: bool) -> usize {
        count_of(&self.root, b)
    }

    /// Inserts `b` before position `pos`. Panics if `pos > len`.
    pub fn insert(&mut self, pos: usize, b: bool) {
        assert!(pos <= self.len(), "insert {pos} out of range (len {})", self.len());
        insert_rec(&mut self.root, pos, b);
    }

    /// Removes and returns the bit at `pos`. Panics if `pos >= len`.
    pub fn delete(&mut self, pos: usize) -> bool {
        assert!(pos < self.len(), "delete {pos} out of range (len {})", self.len());
        let (bit, pending) = delete_rec(&mut self.root, pos, true);
        if let Some((start, chunk)) = pending {
            // the chunk now starting at the removed chunk's position is
            // its old successor; fold the leftovers into it
            debug_assert!(start < self.len());
            merge_rec(&mut self.root, start, chunk);
        }
        bit
    }

    pub fn access(&self, pos: usize) -> bool {
        assert!(pos < self.len(), "access {pos} out of range (len {})", self.len());
        let mut t = &self.root;
        let mut pos = pos;
        loop {
            let n = t.as_ref().unwrap();
            let lb = bits_of(&n.left);
            if pos < lb {
                t = &n.left;
            } else if pos < lb + n.chunk.bits {
                return n.chunk.access(pos - lb);
            } else {
                pos -= lb + n.chunk.bits;
                t = &n.right;
            }
        }
    }

    pub fn get(&self, pos: usize) -> Option<bool> {
        (pos < self.len()).then(|| self.access(pos))
    }

    /// Occurrences of `b` strictly before `pos`. Panics if `pos > len`.
    pub fn rank(&self, b: bool, pos: usize) -> usize {
        assert!(pos <= self.len(), "rank {pos} out of range (len {})", self.len());
        let mut t = &self.root;
        let mut pos = pos;
        let mut ones = 0usize;
        let mut before = 0usize;
        while let Some(n) = t {
            let lb = bits_of(&n.left);
            if pos < lb {
                t = &n.left;
            } else if pos <= lb + n.chunk.bits {
                ones += ones_of(&n.left) + n.chunk.rank1(pos - lb);
                before += lb + (pos - lb);
                break;
            } else {
                ones += ones_of(&n.left) + n.chunk.ones;
                before += lb + n.chunk.bits;
                pos -= lb + n.chunk.bits;
                t = &n.right;
            }
        }
        debug_assert!(t.is_some() || pos == 0);
        if b {
            ones
        } else {
            before - ones
        }
    }

    /// Position of the `(idx+1)`-th `b`, or `None` past the last one.
    pub fn select(&self, b: bool, idx: usize) -> Option<usize> {
        if idx >= self.count(b) {
            return None;
        }
        let mut t = &self.root;
        let mut idx = idx;
        let mut base = 0usize;
        loop {
            let n = t.as_ref().unwrap();
            let in_left = count_of(&n.left, b);
            if idx < in_left {
                t = &n.left;
                continue;
            }
            idx -= in_left;
            let in_chunk = if b {
                n.chunk.ones
            } else {
                n.chunk.bits - n.chunk.ones
            };
            if idx < in_chunk {
                return Some(base + bits_of(&n.left) + n.chunk.select(b, idx));
            }
            idx -= in_chunk;
            base += bits_of(&n.left) + n.chunk.bits;
            t = &n.right;
        }
    }

    pub fn to_bit_string(&self) -> BitString {
        let mut out = BitString::with_capacity(self.len());
        fn walk(t: &Tree, out: &mut BitString) {
            let Some(n) = t else { return };
            walk(&n.left, out);
            for (v, len) in n.chunk.pairs() {
                push_run(out, v, len);
            }
            walk(&n.right, out);
        }
        walk(&self.root, &mut out);
        out
    }

    /// Total gamma-coded payload, the quantity the space bound speaks of.
    pub fn encoded_bits(&self) -> usize {
        fn walk(t: &Tree) -> usize {
            t.as_ref().map_or(0, |n| walk(&n.left) + n.chunk.enc_len() + walk(&n.right))
        }
        walk(&self.root)
    }

    pub fn chunk_count(&self) -> usize {
        fn walk(t: &Tree) -> usize {
            t.as_ref().map_or(0, |n| walk(&n.left) + 1 + walk(&n.right))
        }
        walk(&self.root)
    }

    /// Full structural validation; meant for test checkpoints.
    pub fn check_invariants(&self) {
        #[cfg(test)]
        {
            fn walk(t: &Tree, rightmost: bool) -> (usize, usize, i8) {
                let Some(n) = t else { return (0, 0, 0) };
                let (lb, lo, lh) = walk(&n.left, false);
                let (rb, ro, rh) = walk(&n.right, rightmost);
                n.chunk.check(rightmost && n.right.is_none());
                assert_eq!(n.sub_bits, lb + n.chunk.bits + rb);
                assert_eq!(n.sub_ones, lo + n.chunk.ones + ro);
                assert_eq!(n.height, 1 + lh.max(rh));
                assert!((lh - rh).abs() <= 1, "unbalanced node");
                (n.sub_bits, n.sub_ones, n.height)
            }
            walk(&self.root, true);
        }
    }
}

fn push_run(out: &mut BitString, b: bool, mut len: u64) {
    let word = if b { !0u64 } else { 0 };
    while len >= 64 {
        out.push_word(word, 64);
        len -= 64;
    }
    if len > 0 {
        out.push_word(word & ((1u64 << len) - 1), len as u32);
    }
}
