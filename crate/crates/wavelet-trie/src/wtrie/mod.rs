//! Wavelet trie: a Patricia-shaped wavelet tree over a sequence of bit
//! strings, in static, append-only, and fully dynamic flavors.
//!
//! The shape is the Patricia trie of the distinct strings; every internal
//! node additionally stores a bitvector β with one bit per sequence element
//! routed through that node, telling which child the element continues into.
//! Point queries map a position through β ranks on the way down (access,
//! rank) or β selects on the way up (select). Prefix rank/select stop at the
//! node whose path spells the prefix instead of descending to a leaf.
//!
//! The three flavors differ only in the bitvector type plugged into the
//! nodes, chosen through the [`NodeBits`] trait family:
//!
//! * [`StaticFID`]: compressed, immutable; built once from a full sequence.
//! * [`OffsetAppend`]: append-only with constant-time creation of constant
//!   runs (a logical left offset), incremental background compression.
//! * [`DynamicFID`]: run-length compressed with insert/delete anywhere.
//!
//! Multiplicities live implicitly in the bitvectors: a leaf's count equals
//! the count of its branch bit in the parent's β, so equal strings cost no
//! extra nodes.

use crate::abv::{AppendFID, WorkStats};
use crate::bits::BitString;
use crate::dbv::DynamicFID;
use crate::error::{Error, Result};
use crate::rrr::StaticFID;

mod range;
mod report;
mod serial;

pub use range::RangeIter;
pub use report::SpaceReport;
pub use serial::{AnyIndex, Variant};

/// Read interface every node bitvector supports.
pub trait NodeBits: Clone + std::fmt::Debug {
    fn len(&self) -> usize;
    fn count(&self, b: bool) -> usize;
    fn access(&self, pos: usize) -> bool;
    /// Occurrences of `b` strictly before `pos`.
    fn rank(&self, b: bool, pos: usize) -> usize;
    /// Position of the `(idx+1)`-th `b`, if present.
    fn select(&self, b: bool, idx: usize) -> Option<usize>;
    /// Measured storage for space reports, in bits.
    fn payload_bits(&self) -> usize;
    /// Plain copy of the logical bits (diagnostics and serialization).
    fn to_bit_string(&self) -> BitString;
}

/// Bitvectors that can grow at the end and, crucially, be created as a
/// constant run in sublinear time. Node splits rely on `constant`: the new
/// internal node's β starts as "every existing element goes to the old
/// child" without materializing those bits eagerly.
pub trait AppendNodeBits: NodeBits {
    fn constant(b: bool, len: usize) -> Self;
    fn append(&mut self, b: bool);
}

/// Bitvectors with edits at arbitrary positions.
pub trait DynamicNodeBits: AppendNodeBits {
    fn insert(&mut self, pos: usize, b: bool);
    fn delete(&mut self, pos: usize) -> bool;
}

impl NodeBits for StaticFID {
    fn len(&self) -> usize {
        StaticFID::len(self)
    }
    fn count(&self, b: bool) -> usize {
        StaticFID::count(self, b)
    }
    fn access(&self, pos: usize) -> bool {
        StaticFID::access(self, pos)
    }
    fn rank(&self, b: bool, pos: usize) -> usize {
        StaticFID::rank(self, b, pos)
    }
    fn select(&self, b: bool, idx: usize) -> Option<usize> {
        StaticFID::select(self, b, idx)
    }
    fn payload_bits(&self) -> usize {
        StaticFID::payload_bits(self)
    }
    fn to_bit_string(&self) -> BitString {
        StaticFID::to_bit_string(self)
    }
}

impl NodeBits for DynamicFID {
    fn len(&self) -> usize {
        DynamicFID::len(self)
    }
    fn count(&self, b: bool) -> usize {
        DynamicFID::count(self, b)
    }
    fn access(&self, pos: usize) -> bool {
        DynamicFID::access(self, pos)
    }
    fn rank(&self, b: bool, pos: usize) -> usize {
        DynamicFID::rank(self, b, pos)
    }
    fn select(&self, b: bool, idx: usize) -> Option<usize> {
        DynamicFID::select(self, b, idx)
    }
    fn payload_bits(&self) -> usize {
        DynamicFID::encoded_bits(self)
    }
    fn to_bit_string(&self) -> BitString {
        DynamicFID::to_bit_string(self)
    }
}

impl AppendNodeBits for DynamicFID {
    fn constant(b: bool, len: usize) -> Self {
        DynamicFID::init(b, len)
    }
    fn append(&mut self, b: bool) {
        let n = DynamicFID::len(self);
        DynamicFID::insert(self, n, b);
    }
}

impl DynamicNodeBits for DynamicFID {
    fn insert(&mut self, pos: usize, b: bool) {
        DynamicFID::insert(self, pos, b);
    }
    fn delete(&mut self, pos: usize) -> bool {
        DynamicFID::delete(self, pos)
    }
}

/// Append-only node bitvector: a virtual constant prefix plus a physical
/// incremental FID. The first `offset` positions answer as `fill` without
/// any storage; bits appended after creation land in the FID. Constant-run
/// creation therefore costs O(1) regardless of run length, which is what
/// keeps append worst-case constant even when a split manufactures a β as
/// long as the whole sequence.
#[derive(Debug, Clone)]
pub struct OffsetAppend {
    offset: usize,
    fill: bool,
    tail: AppendFID,
}

impl OffsetAppend {
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn fill(&self) -> bool {
        self.fill
    }

    pub fn fid(&self) -> &AppendFID {
        &self.tail
    }

    pub fn is_quiescent(&self) -> bool {
        self.tail.is_quiescent()
    }

    pub fn quiesce(&mut self) {
        self.tail.quiesce();
    }

    pub fn work_stats(&self) -> WorkStats {
        self.tail.work_stats()
    }

    pub(crate) fn from_parts(offset: usize, fill: bool, tail: AppendFID) -> Self {
        OffsetAppend { offset, fill, tail }
    }
}

impl NodeBits for OffsetAppend {
    fn len(&self) -> usize {
        self.offset + self.tail.len()
    }
    fn count(&self, b: bool) -> usize {
        let virt = if self.fill == b { self.offset } else { 0 };
        virt + self.tail.count(b)
    }
    fn access(&self, pos: usize) -> bool {
        if pos < self.offset {
            self.fill
        } else {
            self.tail.access(pos - self.offset)
        }
    }
    fn rank(&self, b: bool, pos: usize) -> usize {
        if pos <= self.offset {
            return if self.fill == b { pos } else { 0 };
        }
        let virt = if self.fill == b { self.offset } else { 0 };
        virt + self.tail.rank(b, pos - self.offset)
    }
    fn select(&self, b: bool, idx: usize) -> Option<usize> {
        if self.fill == b {
            if idx < self.offset {
                return Some(idx);
            }
            self.tail
                .select(b, idx - self.offset)
                .map(|p| p + self.offset)
        } else {
            self.tail.select(b, idx).map(|p| p + self.offset)
        }
    }
    fn payload_bits(&self) -> usize {
        // The virtual prefix stores nothing; charge one word for the offset
        // and fill, plus the physical tail.
        64 + self.tail.sealed_payload_bits() + self.tail.tail_len()
    }
    fn to_bit_string(&self) -> BitString {
        let mut out = BitString::new();
        for _ in 0..self.offset {
            out.push(self.fill);
        }
        out.extend(&self.tail.to_bit_string());
        out
    }
}

impl AppendNodeBits for OffsetAppend {
    fn constant(b: bool, len: usize) -> Self {
        OffsetAppend {
            offset: len,
            fill: b,
            tail: AppendFID::new(),
        }
    }
    fn append(&mut self, b: bool) {
        self.tail.append(b);
    }
}

#[derive(Debug, Clone)]
pub(crate) struct WNode<B> {
    pub(crate) label: BitString,
    pub(crate) inner: Option<Box<Inner<B>>>,
}

#[derive(Debug, Clone)]
pub(crate) struct Inner<B> {
    pub(crate) bits: B,
    pub(crate) children: [WNode<B>; 2],
}

impl<B> WNode<B> {
    fn leaf(label: BitString) -> Self {
        WNode { label, inner: None }
    }

    fn is_leaf(&self) -> bool {
        self.inner.is_none()
    }
}

/// One trie node as seen from outside: preorder position is the vector
/// index, `beta` is `None` at leaves. Used by tests and diagnostics to pin
/// exact shapes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeView {
    pub depth: usize,
    pub label: BitString,
    pub beta: Option<BitString>,
    /// Sequence elements routed through this node.
    pub size: usize,
}

/// Sequence of bit strings indexed for rank/select/prefix queries.
#[derive(Debug, Clone)]
pub struct WaveletTrie<B> {
    root: Option<WNode<B>>,
    n: usize,
}

/// Immutable variant, built once.
pub type StaticIndex = WaveletTrie<StaticFID>;
/// Append-only variant with constant worst-case work per append.
pub type AppendIndex = WaveletTrie<OffsetAppend>;
/// Fully dynamic variant with insert/delete at any position.
pub type DynamicIndex = WaveletTrie<DynamicFID>;

/// How a candidate string relates to the stored set.
enum Fate {
    /// Already present: no structural change needed.
    Existing,
    /// New string diverging cleanly: one node split (or a fresh root).
    Split,
    /// Proper prefix of a member, or extension of one: unrepresentable in a
    /// prefix-free set.
    Conflict,
}

impl<B: NodeBits> WaveletTrie<B> {
    pub fn new() -> Self {
        WaveletTrie { root: None, n: 0 }
    }

    /// Sequence length.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Maximum number of internal nodes on any root-to-leaf path. A single
    /// leaf (or empty structure) has height 0.
    pub fn height(&self) -> usize {
        let mut best = 0;
        let mut stack: Vec<(&WNode<B>, usize)> = self.root.iter().map(|r| (r, 0)).collect();
        while let Some((node, d)) = stack.pop() {
            match &node.inner {
                None => best = best.max(d),
                Some(inner) => {
                    stack.push((&inner.children[0], d + 1));
                    stack.push((&inner.children[1], d + 1));
                }
            }
        }
        best
    }

    /// Preorder dump of the node structure (0-child before 1-child).
    pub fn nodes(&self) -> Vec<NodeView> {
        let mut out = Vec::new();
        let mut stack: Vec<(&WNode<B>, usize, usize)> =
            self.root.iter().map(|r| (r, 0, self.n)).collect();
        while let Some((node, depth, size)) = stack.pop() {
            match &node.inner {
                None => out.push(NodeView {
                    depth,
                    label: node.label.clone(),
                    beta: None,
                    size,
                }),
                Some(inner) => {
                    out.push(NodeView {
                        depth,
                        label: node.label.clone(),
                        beta: Some(inner.bits.to_bit_string()),
                        size,
                    });
                    // Reverse push keeps preorder on pop.
                    stack.push((&inner.children[1], depth + 1, inner.bits.count(true)));
                    stack.push((&inner.children[0], depth + 1, inner.bits.count(false)));
                }
            }
        }
        out
    }

    /// Distinct strings with multiplicities, in string order.
    pub fn set(&self) -> Vec<(BitString, usize)> {
        fn rec<B: NodeBits>(
            node: &WNode<B>,
            size: usize,
            prefix: &mut BitString,
            out: &mut Vec<(BitString, usize)>,
        ) {
            let before = prefix.len();
            prefix.extend(&node.label);
            match &node.inner {
                None => out.push((prefix.clone(), size)),
                Some(inner) => {
                    for (i, child) in inner.children.iter().enumerate() {
                        prefix.push(i == 1);
                        rec(child, inner.bits.count(i == 1), prefix, out);
                        prefix.truncate(prefix.len() - 1);
                    }
                }
            }
            prefix.truncate(before);
        }
        let mut out = Vec::new();
        if let Some(root) = &self.root {
            rec(root, self.n, &mut BitString::new(), &mut out);
        }
        out
    }

    /// Number of distinct strings (= leaf count).
    pub fn distinct_count(&self) -> usize {
        let mut leaves = 0;
        let mut stack: Vec<&WNode<B>> = self.root.iter().collect();
        while let Some(node) = stack.pop() {
            match &node.inner {
                None => leaves += 1,
                Some(inner) => stack.extend(inner.children.iter()),
            }
        }
        leaves
    }

    /// The string at position `pos`.
    pub fn access(&self, pos: usize) -> Result<BitString> {
        if pos >= self.n {
            return Err(Error::Range { pos, len: self.n });
        }
        let mut node = self.root.as_ref().expect("nonempty sequence has a root");
        let mut out = BitString::new();
        let mut p = pos;
        loop {
            out.extend(&node.label);
            match &node.inner {
                None => return Ok(out),
                Some(inner) => {
                    let b = inner.bits.access(p);
                    out.push(b);
                    p = inner.bits.rank(b, p);
                    node = &inner.children[b as usize];
                }
            }
        }
    }

    /// Occurrences of exactly `s` in the first `pos` elements. Strings
    /// outside the stored set simply count 0.
    pub fn rank(&self, s: &BitString, pos: usize) -> Result<usize> {
        if pos > self.n {
            return Err(Error::Range { pos, len: self.n });
        }
        let Some(mut node) = self.root.as_ref() else {
            return Ok(0);
        };
        let mut consumed = 0;
        let mut p = pos;
        loop {
            let cmp = s.common_prefix(consumed, &node.label, 0);
            if cmp < node.label.len() {
                return Ok(0); // diverges, or ends inside the label
            }
            let at = consumed + cmp;
            match &node.inner {
                None => return Ok(if at == s.len() { p } else { 0 }),
                Some(inner) => {
                    if at == s.len() {
                        // s spells an internal path: a proper prefix of
                        // members, not a member itself.
                        return Ok(0);
                    }
                    let b = s.bit(at);
                    p = inner.bits.rank(b, p);
                    node = &inner.children[b as usize];
                    consumed = at + 1;
                }
            }
        }
    }

    /// Occurrences of strings starting with `p` in the first `pos` elements.
    /// The descent stops at the shallowest node covering the prefix; all
    /// elements routed there match.
    pub fn rank_prefix(&self, prefix: &BitString, pos: usize) -> Result<usize> {
        if pos > self.n {
            return Err(Error::Range { pos, len: self.n });
        }
        let Some(mut node) = self.root.as_ref() else {
            return Ok(0);
        };
        let mut consumed = 0;
        let mut p = pos;
        loop {
            let cmp = prefix.common_prefix(consumed, &node.label, 0);
            if consumed + cmp == prefix.len() {
                return Ok(p); // prefix exhausted at or inside this node
            }
            if cmp < node.label.len() {
                return Ok(0);
            }
            match &node.inner {
                None => return Ok(0), // prefix extends past a member
                Some(inner) => {
                    let b = prefix.bit(consumed + cmp);
                    p = inner.bits.rank(b, p);
                    node = &inner.children[b as usize];
                    consumed += cmp + 1;
                }
            }
        }
    }

    /// Position of the `(idx+1)`-th occurrence of `s`: locates the leaf top
    /// down, then maps the occurrence index back up through β selects.
    pub fn select(&self, s: &BitString, idx: usize) -> Result<usize> {
        let (path, count) = match self.descend_exact(s) {
            Some(x) => x,
            None => return Err(Error::NotFound { idx, count: 0 }),
        };
        self.select_up(path, count, idx)
    }

    /// Position of the `(idx+1)`-th element starting with `prefix`.
    pub fn select_prefix(&self, prefix: &BitString, idx: usize) -> Result<usize> {
        let (path, count) = match self.descend_prefix(prefix) {
            Some(x) => x,
            None => return Err(Error::NotFound { idx, count: 0 }),
        };
        self.select_up(path, count, idx)
    }

    fn select_up(&self, path: Vec<(&Inner<B>, bool)>, count: usize, idx: usize) -> Result<usize> {
        if idx >= count {
            return Err(Error::NotFound { idx, count });
        }
        let mut i = idx;
        for (inner, b) in path.iter().rev() {
            i = inner
                .bits
                .select(*b, i)
                .expect("child count bounds the index");
        }
        Ok(i)
    }

    /// Walks to the leaf spelling exactly `s`. Returns the internal nodes
    /// passed (with branch bits) and the leaf's multiplicity.
    fn descend_exact(&self, s: &BitString) -> Option<(Vec<(&Inner<B>, bool)>, usize)> {
        let mut node = self.root.as_ref()?;
        let mut consumed = 0;
        let mut count = self.n;
        let mut path = Vec::new();
        loop {
            let cmp = s.common_prefix(consumed, &node.label, 0);
            if cmp < node.label.len() {
                return None;
            }
            let at = consumed + cmp;
            match &node.inner {
                None => return if at == s.len() { Some((path, count)) } else { None },
                Some(inner) => {
                    if at == s.len() {
                        return None;
                    }
                    let b = s.bit(at);
                    count = inner.bits.count(b);
                    path.push((inner, b));
                    node = &inner.children[b as usize];
                    consumed = at + 1;
                }
            }
        }
    }

    /// Walks to the node covering `prefix`. Returns the internal nodes
    /// passed and how many elements are routed through that node.
    fn descend_prefix(&self, prefix: &BitString) -> Option<(Vec<(&Inner<B>, bool)>, usize)> {
        let mut node = self.root.as_ref()?;
        let mut consumed = 0;
        let mut count = self.n;
        let mut path = Vec::new();
        loop {
            let cmp = prefix.common_prefix(consumed, &node.label, 0);
            if consumed + cmp == prefix.len() {
                return Some((path, count));
            }
            if cmp < node.label.len() {
                return None;
            }
            match &node.inner {
                None => return None,
                Some(inner) => {
                    let b = prefix.bit(consumed + cmp);
                    count = inner.bits.count(b);
                    path.push((inner, b));
                    node = &inner.children[b as usize];
                    consumed += cmp + 1;
                }
            }
        }
    }

    fn classify(&self, s: &BitString) -> Fate {
        let Some(mut node) = self.root.as_ref() else {
            return Fate::Split;
        };
        let mut consumed = 0;
        loop {
            let cmp = s.common_prefix(consumed, &node.label, 0);
            if cmp < node.label.len() {
                return if consumed + cmp < s.len() {
                    Fate::Split
                } else {
                    Fate::Conflict // s ends inside the label
                };
            }
            let at = consumed + cmp;
            match &node.inner {
                None => {
                    return if at == s.len() {
                        Fate::Existing
                    } else {
                        Fate::Conflict // s extends a member
                    };
                }
                Some(inner) => {
                    if at == s.len() {
                        return Fate::Conflict; // s is an internal path
                    }
                    node = &inner.children[s.bit(at) as usize];
                    consumed = at + 1;
                }
            }
        }
    }

    /// True if `s` is one of the stored strings.
    pub fn contains(&self, s: &BitString) -> bool {
        matches!(self.classify(s), Fate::Existing)
    }

    /// Structural self-check: β lengths match routed element counts, no
    /// internal β is constant, leaf multiplicities are positive. Panics on
    /// violation; intended for tests and debugging checkpoints.
    pub fn check_invariants(&self) {
        let Some(root) = &self.root else {
            assert_eq!(self.n, 0, "empty tree must have n = 0");
            return;
        };
        assert!(self.n > 0, "rooted tree must have elements");
        let mut stack = vec![(root, self.n)];
        while let Some((node, size)) = stack.pop() {
            match &node.inner {
                None => assert!(size > 0, "leaf with zero multiplicity"),
                Some(inner) => {
                    assert_eq!(inner.bits.len(), size, "β length vs routed count");
                    let c0 = inner.bits.count(false);
                    let c1 = inner.bits.count(true);
                    assert_eq!(c0 + c1, size);
                    assert!(c0 > 0 && c1 > 0, "internal β must not be constant");
                    stack.push((&inner.children[0], c0));
                    stack.push((&inner.children[1], c1));
                }
            }
        }
    }
}

impl<B: NodeBits> Default for WaveletTrie<B> {
    fn default() -> Self {
        Self::new()
    }
}

impl WaveletTrie<StaticFID> {
    /// Builds the static variant from a full sequence. The sequence must be
    /// prefix-free as a set (byte strings run through `bits::binarize` are
    /// always safe); otherwise the shared-prefix recursion cannot place a
    /// leaf and reports a conflict.
    pub fn build_static(seq: &[BitString]) -> Result<Self> {
        let n = seq.len();
        if n == 0 {
            return Ok(WaveletTrie { root: None, n: 0 });
        }
        let idx: Vec<usize> = (0..n).collect();
        let root = build_rec(seq, idx, 0)?;
        Ok(WaveletTrie { root: Some(root), n })
    }
}

fn build_rec(seq: &[BitString], idx: Vec<usize>, offset: usize) -> Result<WNode<StaticFID>> {
    let first = &seq[idx[0]];
    let mut lcp = first.len() - offset;
    for &i in &idx[1..] {
        if lcp == 0 {
            break;
        }
        lcp = lcp.min(first.common_prefix(offset, &seq[i], offset));
    }
    let label = first.slice(offset, offset + lcp);
    let at = offset + lcp;

    let mut zeros = Vec::new();
    let mut ones = Vec::new();
    let mut ended = 0usize;
    let mut beta = BitString::with_capacity(idx.len());
    for &i in &idx {
        if seq[i].len() == at {
            ended += 1;
        } else {
            let b = seq[i].bit(at);
            beta.push(b);
            if b { ones.push(i) } else { zeros.push(i) }
        }
    }
    if ended == idx.len() {
        return Ok(WNode::leaf(label));
    }
    if ended > 0 {
        // Some strings stop here while others continue: one is a proper
        // prefix of another.
        return Err(Error::PrefixConflict);
    }
    debug_assert!(
        !zeros.is_empty() && !ones.is_empty(),
        "a maximal common prefix leaves both branches occupied"
    );
    let children = [build_rec(seq, zeros, at + 1)?, build_rec(seq, ones, at + 1)?];
    Ok(WNode {
        label,
        inner: Some(Box::new(Inner {
            bits: StaticFID::build(&beta),
            children,
        })),
    })
}

impl<B: AppendNodeBits> WaveletTrie<B> {
    /// Builds by replaying appends. Equivalent to the static build on the
    /// same sequence, observable structure included.
    pub fn from_seq<'a, I: IntoIterator<Item = &'a BitString>>(seq: I) -> Result<Self> {
        let mut t = Self::new();
        for s in seq {
            t.append(s)?;
        }
        Ok(t)
    }

    /// Appends `s` at the end of the sequence. A new distinct string splits
    /// exactly one node; the split node's fresh β is a constant run covering
    /// the elements already routed through it.
    pub fn append(&mut self, s: &BitString) -> Result<()> {
        if matches!(self.classify(s), Fate::Conflict) {
            return Err(Error::PrefixConflict);
        }
        match &mut self.root {
            None => self.root = Some(WNode::leaf(s.clone())),
            Some(root) => append_rec(root, s, 0, self.n + 1),
        }
        self.n += 1;
        Ok(())
    }
}

/// `cnt` is the number of elements routed through `node` counting the one
/// being added; bits for it have already been appended to all ancestors.
fn append_rec<B: AppendNodeBits>(node: &mut WNode<B>, s: &BitString, consumed: usize, cnt: usize) {
    let cmp = s.common_prefix(consumed, &node.label, 0);
    if cmp == node.label.len() {
        let at = consumed + cmp;
        match &mut node.inner {
            Some(inner) if at < s.len() => {
                let b = s.bit(at);
                inner.bits.append(b);
                let child_cnt = inner.bits.count(b);
                append_rec(&mut inner.children[b as usize], s, at + 1, child_cnt);
            }
            None if at == s.len() => {} // existing string: multiplicity is implicit
            _ => unreachable!("conflicts are rejected before mutation"),
        }
        return;
    }
    split_node(node, s, consumed, cmp, cnt, |bits, b| bits.append(b));
}

impl<B: DynamicNodeBits> WaveletTrie<B> {
    /// Inserts `s` before position `pos`. Same cascade as append, but the
    /// element's bit lands mid-bitvector and the running position is mapped
    /// through a rank at every level.
    pub fn insert(&mut self, s: &BitString, pos: usize) -> Result<()> {
        if pos > self.n {
            return Err(Error::Range { pos, len: self.n });
        }
        if matches!(self.classify(s), Fate::Conflict) {
            return Err(Error::PrefixConflict);
        }
        match &mut self.root {
            None => self.root = Some(WNode::leaf(s.clone())),
            Some(root) => insert_rec(root, s, 0, pos, self.n + 1),
        }
        self.n += 1;
        Ok(())
    }

    /// Removes the element at `pos` and returns it. Deleting the last
    /// occurrence of a string merges its leaf's parent with the sibling,
    /// restoring the canonical shape.
    pub fn delete(&mut self, pos: usize) -> Result<BitString> {
        if pos >= self.n {
            return Err(Error::Range { pos, len: self.n });
        }
        let mut removed = BitString::new();
        delete_rec(
            self.root.as_mut().expect("nonempty sequence has a root"),
            pos,
            &mut removed,
        );
        self.n -= 1;
        if self.n == 0 {
            self.root = None;
        }
        Ok(removed)
    }
}

fn insert_rec<B: DynamicNodeBits>(
    node: &mut WNode<B>,
    s: &BitString,
    consumed: usize,
    p: usize,
    cnt: usize,
) {
    let cmp = s.common_prefix(consumed, &node.label, 0);
    if cmp == node.label.len() {
        let at = consumed + cmp;
        match &mut node.inner {
            Some(inner) if at < s.len() => {
                let b = s.bit(at);
                inner.bits.insert(p, b);
                let p2 = inner.bits.rank(b, p);
                let child_cnt = inner.bits.count(b);
                insert_rec(&mut inner.children[b as usize], s, at + 1, p2, child_cnt);
            }
            None if at == s.len() => {}
            _ => unreachable!("conflicts are rejected before mutation"),
        }
        return;
    }
    split_node(node, s, consumed, cmp, cnt, |bits, b| {
        DynamicNodeBits::insert(bits, p, b)
    });
}

/// Splits `node` at label offset `cmp` to make room for new string `s`.
/// The old node keeps its subtree under a truncated label; the new string
/// becomes a sibling leaf. The new internal β is a constant run for the
/// `cnt - 1` existing elements, then `place` adds the new element's bit.
fn split_node<B: AppendNodeBits>(
    node: &mut WNode<B>,
    s: &BitString,
    consumed: usize,
    cmp: usize,
    cnt: usize,
    place: impl FnOnce(&mut B, bool),
) {
    debug_assert!(consumed + cmp < s.len(), "conflicts rejected before mutation");
    let old_bit = node.label.bit(cmp);
    let new_bit = s.bit(consumed + cmp);
    debug_assert_ne!(old_bit, new_bit);
    let shared = node.label.slice(0, cmp);
    let old_suffix = node.label.slice(cmp + 1, node.label.len());
    let mut old = std::mem::replace(node, WNode::leaf(shared));
    old.label = old_suffix;
    let new_leaf = WNode::leaf(s.slice(consumed + cmp + 1, s.len()));
    let mut bits = B::constant(old_bit, cnt - 1);
    place(&mut bits, new_bit);
    let children = if new_bit {
        [old, new_leaf]
    } else {
        [new_leaf, old]
    };
    node.inner = Some(Box::new(Inner { bits, children }));
}

fn delete_rec<B: DynamicNodeBits>(node: &mut WNode<B>, p: usize, out: &mut BitString) {
    out.extend(&node.label);
    let Some(inner) = node.inner.as_mut() else {
        return; // leaf: the element vanishes with the parent's bit
    };
    let b = inner.bits.access(p);
    out.push(b);
    let p2 = inner.bits.rank(b, p);
    inner.bits.delete(p);
    let bi = b as usize;
    if inner.children[bi].is_leaf() {
        out.extend(&inner.children[bi].label);
        if inner.bits.count(b) == 0 {
            // Last occurrence gone: absorb the sibling, exactly the
            // Patricia delete-merge with the sibling branch bit between.
            let taken = *node.inner.take().expect("checked internal above");
            let [c0, c1] = taken.children;
            let sibling = if b { c0 } else { c1 };
            node.label.push(!b);
            node.label.extend(&sibling.label);
            node.inner = sibling.inner;
        }
        return;
    }
    delete_rec(&mut inner.children[bi], p2, out);
}

impl WaveletTrie<OffsetAppend> {
    /// Drains all background compression work in every node.
    pub fn quiesce(&mut self) {
        let mut stack: Vec<&mut WNode<OffsetAppend>> = self.root.iter_mut().collect();
        while let Some(node) = stack.pop() {
            if let Some(inner) = node.inner.as_mut() {
                inner.bits.quiesce();
                let [c0, c1] = &mut inner.children;
                stack.push(c0);
                stack.push(c1);
            }
        }
    }

    pub fn is_quiescent(&self) -> bool {
        let mut stack: Vec<&WNode<OffsetAppend>> = self.root.iter().collect();
        while let Some(node) = stack.pop() {
            if let Some(inner) = &node.inner {
                if !inner.bits.is_quiescent() {
                    return false;
                }
                stack.extend(inner.children.iter());
            }
        }
        true
    }

    /// Aggregated builder-work counters across all node bitvectors: total
    /// steps, and the worst single-append step count seen anywhere.
    pub fn work_stats(&self) -> WorkStats {
        let mut total = WorkStats::default();
        let mut stack: Vec<&WNode<OffsetAppend>> = self.root.iter().collect();
        while let Some(node) = stack.pop() {
            if let Some(inner) = &node.inner {
                let w = inner.bits.work_stats();
                total.total_steps += w.total_steps;
                total.max_steps_per_append = total.max_steps_per_append.max(w.max_steps_per_append);
                stack.extend(inner.children.iter());
            }
        }
        total
    }
}
