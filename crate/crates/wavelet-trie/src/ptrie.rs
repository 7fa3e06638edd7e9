//! Binary Patricia trie over a prefix-free set of bit strings.
//!
//! Every internal node has exactly two children; edges are labelled with a
//! single branch bit, nodes carry an arbitrary (possibly empty) skip label.
//! The string spelled by a root-to-leaf path (node labels interleaved with
//! branch bits) is a member of the set, and the shape is canonical: a set of
//! strings has exactly one Patricia trie, no matter the insertion order.
//!
//! This structure is the shape donor for [`crate::wtrie`]: the wavelet trie
//! over a sequence is the Patricia trie of its distinct strings with a
//! bitvector grafted onto each internal node. Keeping the plain trie as its
//! own type gives the shape an independently testable home and a place to
//! account for the label/pointer storage that the compressed index inherits.

use crate::bits::{self, BitString};
use crate::error::{Error, Result};

/// One trie node. Leaves own no child array; internal nodes own exactly two
/// children, indexed by branch bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct PNode {
    pub(crate) label: BitString,
    pub(crate) children: Option<Box<[PNode; 2]>>,
}

impl PNode {
    fn leaf(label: BitString) -> Self {
        PNode {
            label,
            children: None,
        }
    }

    fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Navigation state: a node together with how many query bits were consumed
/// to reach it (its label included when fully matched).
#[derive(Debug, Clone, Copy)]
pub struct TrieCursor<'a> {
    node: &'a PNode,
    consumed: usize,
}

impl<'a> TrieCursor<'a> {
    /// Skip label of the node under the cursor.
    pub fn label(&self) -> &'a BitString {
        &self.node.label
    }

    /// True when the node stores a full member string (no children).
    pub fn is_leaf(&self) -> bool {
        self.node.is_leaf()
    }

    /// Query bits consumed up to and including this node's matched label
    /// portion. Always a prefix length of the query string.
    pub fn consumed(&self) -> usize {
        self.consumed
    }
}

/// Outcome of [`PatriciaTrie::lookup`].
#[derive(Debug, Clone, Copy)]
pub enum Lookup<'a> {
    /// The query is a member: it spells the path to this leaf exactly.
    Found(TrieCursor<'a>),
    /// The query is a proper prefix of at least one member. The cursor sits
    /// on the shallowest node whose subtree contains exactly the members
    /// extending the query (the query may end inside that node's label).
    Prefix(TrieCursor<'a>),
    /// The query diverges from every member. `matched` is the number of
    /// leading query bits that agree with some root path; the cursor sits on
    /// the node where the disagreement (or the member's end) occurred.
    Mismatch {
        cursor: TrieCursor<'a>,
        matched: usize,
    },
}

/// Space accounting for a trie snapshot, in the units the compressed-index
/// lower bound is stated in: total label bits, edge count, node count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measure {
    /// Sum of all node label lengths, root included.
    pub label_bits: usize,
    /// Edge count: `2 * (leaves - 1)` for a nonempty trie.
    pub edges: usize,
    /// Total node count (leaves + internals).
    pub nodes: usize,
    /// Leaf count = number of stored strings.
    pub leaves: usize,
}

/// Set of distinct, prefix-free bit strings with canonical shape.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatriciaTrie {
    root: Option<PNode>,
}

impl PatriciaTrie {
    /// Empty set.
    pub fn new() -> Self {
        PatriciaTrie { root: None }
    }

    /// Builds from a list of strings. Order does not matter; duplicates and
    /// prefix conflicts are reported as on [`PatriciaTrie::insert`].
    pub fn from_strings<'a, I>(strings: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a BitString>,
    {
        let mut t = PatriciaTrie::new();
        for s in strings {
            t.insert(s)?;
        }
        Ok(t)
    }

    /// Number of stored strings.
    pub fn len(&self) -> usize {
        self.measure().leaves
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    /// Classifies `s` against the set: member, proper prefix of members, or
    /// divergent. Returns `None` on the empty trie.
    pub fn lookup(&self, s: &BitString) -> Option<Lookup<'_>> {
        let mut node = self.root.as_ref()?;
        let mut consumed = 0usize;
        loop {
            let cmp = s.common_prefix(consumed, &node.label, 0);
            if consumed + cmp == s.len() {
                // Query exhausted. An exact leaf match is membership; ending
                // at an internal node or inside a label means every member
                // below extends the query.
                let cursor = TrieCursor { node, consumed };
                if cmp == node.label.len() && node.is_leaf() {
                    return Some(Lookup::Found(TrieCursor {
                        node,
                        consumed: consumed + cmp,
                    }));
                }
                return Some(Lookup::Prefix(cursor));
            }
            if cmp < node.label.len() {
                // Disagreement inside this node's label.
                return Some(Lookup::Mismatch {
                    cursor: TrieCursor { node, consumed },
                    matched: consumed + cmp,
                });
            }
            match &node.children {
                None => {
                    // Query strictly extends a member string.
                    return Some(Lookup::Mismatch {
                        cursor: TrieCursor { node, consumed },
                        matched: consumed + cmp,
                    });
                }
                Some(children) => {
                    let b = s.bit(consumed + cmp);
                    consumed += cmp + 1;
                    node = &children[b as usize];
                }
            }
        }
    }

    /// Membership test.
    pub fn contains(&self, s: &BitString) -> bool {
        matches!(self.lookup(s), Some(Lookup::Found(_)))
    }

    /// Inserts `s`, splitting one node label when the new string diverges
    /// mid-edge. Errors: [`Error::Duplicate`] if already present,
    /// [`Error::PrefixConflict`] if `s` is a proper prefix of a member or
    /// extends one (the set must stay prefix-free).
    pub fn insert(&mut self, s: &BitString) -> Result<()> {
        match &mut self.root {
            None => {
                self.root = Some(PNode::leaf(s.clone()));
                Ok(())
            }
            Some(node) => insert_rec(node, s, 0),
        }
    }

    /// Removes `s`. Its leaf disappears and the parent absorbs the sibling:
    /// the parent's label becomes `parent ++ sibling-branch-bit ++ sibling`,
    /// restoring canonical shape in one local rewrite. Deleting the last
    /// string empties the trie. Errors: [`Error::Absent`].
    pub fn delete(&mut self, s: &BitString) -> Result<()> {
        match &mut self.root {
            None => Err(Error::Absent),
            Some(root) if root.is_leaf() => {
                if root.label == *s {
                    self.root = None;
                    Ok(())
                } else {
                    Err(Error::Absent)
                }
            }
            Some(root) => delete_rec(root, s, 0),
        }
    }

    /// Label/edge/node accounting over the current shape.
    pub fn measure(&self) -> Measure {
        let mut m = Measure {
            label_bits: 0,
            edges: 0,
            nodes: 0,
            leaves: 0,
        };
        if let Some(root) = &self.root {
            let mut stack = vec![root];
            while let Some(node) = stack.pop() {
                m.nodes += 1;
                m.label_bits += node.label.len();
                match &node.children {
                    None => m.leaves += 1,
                    Some(children) => {
                        m.edges += 2;
                        stack.push(&children[0]);
                        stack.push(&children[1]);
                    }
                }
            }
        }
        m
    }

    /// Information-theoretic size of the trie shape plus labels:
    /// `|L| + e + ceil(log2 C(|L|+e, e))` bits. A fully pointerless encoding
    /// could store the trie in this many bits; concrete indexes report their
    /// footprint against it.
    pub fn lt_bound(&self) -> u64 {
        let m = self.measure();
        let l = m.label_bits as u64;
        let e = m.edges as u64;
        l + e + bits::binomial_bound(e, l + e)
    }

    /// Actual in-memory node overhead in bits: node structs plus the label
    /// word storage beyond the label payload. Bounded by a constant number
    /// of machine words per node, i.e. O(k * w) for k strings.
    pub fn overhead_bits(&self) -> usize {
        let node_bits = std::mem::size_of::<PNode>() * 8;
        let mut total = 0usize;
        if let Some(root) = &self.root {
            let mut stack = vec![root];
            while let Some(node) = stack.pop() {
                total += node_bits;
                total += node.label.words().len() * 64 - node.label.len();
                if let Some(children) = &node.children {
                    stack.push(&children[0]);
                    stack.push(&children[1]);
                }
            }
        }
        total
    }

    /// All stored strings in lexicographic path order (0-subtree first).
    pub fn strings(&self) -> Vec<BitString> {
        let mut out = Vec::new();
        if let Some(root) = &self.root {
            let mut prefix = BitString::new();
            collect(root, &mut prefix, &mut out);
        }
        out
    }

    /// Depth-first preorder walk reporting `(depth, label, is_leaf)` per
    /// node, 0-child before 1-child. This is the node order the serialized
    /// index format uses, exposed so layout tests can pin it.
    pub fn walk_preorder<F: FnMut(usize, &BitString, bool)>(&self, mut f: F) {
        fn rec<F: FnMut(usize, &BitString, bool)>(node: &PNode, depth: usize, f: &mut F) {
            f(depth, &node.label, node.is_leaf());
            if let Some(children) = &node.children {
                rec(&children[0], depth + 1, f);
                rec(&children[1], depth + 1, f);
            }
        }
        if let Some(root) = &self.root {
            rec(root, 0, &mut f);
        }
    }

    /// Structural sanity: binary shape (0 or 2 children), no leaf has
    /// children, every stored string is found by lookup, and the measure
    /// identities hold. Used at test checkpoints.
    #[cfg(test)]
    pub(crate) fn check_invariants(&self) {
        let m = self.measure();
        if m.nodes == 0 {
            assert!(self.root.is_none());
            return;
        }
        assert_eq!(m.nodes, 2 * m.leaves - 1, "full binary shape");
        assert_eq!(m.edges, 2 * (m.leaves - 1));
        let strings = self.strings();
        assert_eq!(strings.len(), m.leaves);
        for s in &strings {
            assert!(self.contains(s), "stored string must be found: {s}");
        }
        for w in strings.windows(2) {
            assert!(w[0] < w[1], "path order must be strictly increasing");
            assert!(
                !w[1].starts_with(&w[0]),
                "stored set must be prefix-free"
            );
        }
    }
}

fn insert_rec(node: &mut PNode, s: &BitString, consumed: usize) -> Result<()> {
    let cmp = s.common_prefix(consumed, &node.label, 0);
    if cmp == node.label.len() {
        let at = consumed + cmp;
        if at == s.len() {
            return Err(if node.is_leaf() {
                Error::Duplicate
            } else {
                // s spells the path to an internal node: members extend it.
                Error::PrefixConflict
            });
        }
        return match &mut node.children {
            None => Err(Error::PrefixConflict), // s extends this member
            Some(children) => {
                let b = s.bit(at);
                insert_rec(&mut children[b as usize], s, at + 1)
            }
        };
    }
    if consumed + cmp == s.len() {
        // s ends inside this node's label: proper prefix of every member
        // below, so it cannot join the set.
        return Err(Error::PrefixConflict);
    }
    // Genuine divergence at label offset `cmp`: split. The existing node
    // keeps its subtree under a truncated label; the new string becomes a
    // sibling leaf; this node shrinks to the shared label prefix.
    let new_bit = s.bit(consumed + cmp);
    let shared = node.label.slice(0, cmp);
    let old_suffix = node.label.slice(cmp + 1, node.label.len());
    let mut old = std::mem::replace(node, PNode::leaf(shared));
    old.label = old_suffix;
    let new_leaf = PNode::leaf(s.slice(consumed + cmp + 1, s.len()));
    let children = if new_bit {
        [old, new_leaf]
    } else {
        [new_leaf, old]
    };
    node.children = Some(Box::new(children));
    Ok(())
}

fn delete_rec(node: &mut PNode, s: &BitString, consumed: usize) -> Result<()> {
    let cmp = s.common_prefix(consumed, &node.label, 0);
    if cmp < node.label.len() {
        return Err(Error::Absent);
    }
    let at = consumed + cmp;
    if at >= s.len() {
        return Err(Error::Absent); // s ends at an internal node
    }
    let b = s.bit(at);
    let bi = b as usize;
    let children = node.children.as_mut().expect("delete_rec sees internals");
    let child = &mut children[bi];
    let child_is_target = child.is_leaf()
        && s.len() == at + 1 + child.label.len()
        && s.common_prefix(at + 1, &child.label, 0) == child.label.len();
    if !child_is_target {
        if child.is_leaf() {
            return Err(Error::Absent);
        }
        return delete_rec(child, s, at + 1);
    }
    // Remove the leaf and splice the sibling into this node: label becomes
    // parent ++ sibling-branch-bit ++ sibling-label, children move up.
    let taken = node.children.take().expect("children checked above");
    let [c0, c1] = *taken;
    let sibling = if b { c0 } else { c1 };
    node.label.push(!b);
    node.label.extend(&sibling.label);
    node.children = sibling.children;
    Ok(())
}

fn collect(node: &PNode, prefix: &mut BitString, out: &mut Vec<BitString>) {
    let before = prefix.len();
    prefix.extend(&node.label);
    match &node.children {
        None => out.push(prefix.clone()),
        Some(children) => {
            for (i, child) in children.iter().enumerate() {
                prefix.push(i == 1);
                collect(child, prefix, out);
                prefix.truncate(prefix.len() - 1);
            }
        }
    }
    prefix.truncate(before);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    /// Demo set used throughout: the four distinct strings of the running
    /// sequence example.
    fn demo_set() -> Vec<BitString> {
        ["0001", "0011", "0100", "00100"]
            .iter()
            .map(|s| bs(s))
            .collect()
    }

    fn demo_trie() -> PatriciaTrie {
        PatriciaTrie::from_strings(&demo_set()).unwrap()
    }

    /// Builds the expected demo shape by hand so structural assertions do
    /// not depend on insert itself.
    fn demo_expected() -> PatriciaTrie {
        let leaf = |s: &str| PNode::leaf(bs(s));
        let internal = |s: &str, c0: PNode, c1: PNode| PNode {
            label: bs(s),
            children: Some(Box::new([c0, c1])),
        };
        // Leaf paths (label/edge alternation): 0.0..0.1 = 0001,
        // 0.0..1..0.0 = 00100, 0.0..1..1. = 0011, 0.1.00 = 0100.
        let inner = internal("", leaf("0"), leaf(""));
        let left = internal("", leaf("1"), inner);
        let root = internal("0", left, leaf("00"));
        PatriciaTrie { root: Some(root) }
    }

    #[test]
    fn demo_shape_is_canonical() {
        let t = demo_trie();
        t.check_invariants();
        assert_eq!(t, demo_expected());
        // Shape is order independent.
        let mut rev = demo_set();
        rev.reverse();
        assert_eq!(PatriciaTrie::from_strings(&rev).unwrap(), t);
        assert_eq!(
            t.strings(),
            vec![bs("0001"), bs("00100"), bs("0011"), bs("0100")]
        );
    }

    #[test]
    fn lookup_examples() {
        let t = demo_trie();
        match t.lookup(&bs("0100")) {
            Some(Lookup::Found(c)) => {
                assert_eq!(c.consumed(), 4);
                assert_eq!(c.label(), &bs("00"));
            }
            other => panic!("expected Found, got {other:?}"),
        }
        // The empty string prefixes everything; the root is the answer.
        match t.lookup(&bs("")) {
            Some(Lookup::Prefix(c)) => {
                assert_eq!(c.consumed(), 0);
                assert_eq!(c.label(), &bs("0"));
            }
            other => panic!("expected Prefix at root, got {other:?}"),
        }
        // "0101" walks into the right leaf "00" and disagrees at its second
        // label bit: three query bits match overall.
        match t.lookup(&bs("0101")) {
            Some(Lookup::Mismatch { cursor, matched }) => {
                assert_eq!(matched, 3);
                assert!(cursor.is_leaf());
                assert_eq!(cursor.label(), &bs("00"));
            }
            other => panic!("expected Mismatch, got {other:?}"),
        }
        // "00" ends mid-label inside the left subtree... (it ends exactly at
        // the left internal node after its branch bit) and prefixes members.
        match t.lookup(&bs("00")) {
            Some(Lookup::Prefix(c)) => assert_eq!(c.consumed(), 2),
            other => panic!("expected Prefix, got {other:?}"),
        }
        // Query extending a member diverges at the member's end.
        match t.lookup(&bs("010011")) {
            Some(Lookup::Mismatch { matched, .. }) => assert_eq!(matched, 4),
            other => panic!("expected Mismatch, got {other:?}"),
        }
        assert!(PatriciaTrie::new().lookup(&bs("01")).is_none());
    }

    #[test]
    fn insert_splits_leaf() {
        let mut t = demo_trie();
        t.insert(&bs("0101")).unwrap();
        t.check_invariants();
        // The right leaf "00" splits: shared prefix "0" stays, the old leaf
        // and the new string both continue with empty labels.
        let leaf = |s: &str| PNode::leaf(bs(s));
        let internal = |s: &str, c0: PNode, c1: PNode| PNode {
            label: bs(s),
            children: Some(Box::new([c0, c1])),
        };
        let split = internal("0", leaf(""), leaf(""));
        let inner = internal("", leaf("0"), leaf(""));
        let left = internal("", leaf("1"), inner);
        let expected = PatriciaTrie {
            root: Some(internal("0", left, split)),
        };
        assert_eq!(t, expected);
        for s in demo_set() {
            assert!(t.contains(&s));
        }
        assert!(t.contains(&bs("0101")));
    }

    #[test]
    fn insert_rejects_duplicates_and_prefix_conflicts() {
        let mut t = demo_trie();
        assert_eq!(t.insert(&bs("0011")), Err(Error::Duplicate));
        // Proper prefix of a member.
        assert_eq!(t.insert(&bs("01")), Err(Error::PrefixConflict));
        // Extends a member.
        assert_eq!(t.insert(&bs("00111")), Err(Error::PrefixConflict));
        // Ends inside a label.
        assert_eq!(t.insert(&bs("0010")), Err(Error::PrefixConflict));
        // Failed inserts must not disturb the shape.
        assert_eq!(t, demo_trie());
    }

    #[test]
    fn insert_then_delete_restores_shape() {
        let mut t = demo_trie();
        t.insert(&bs("0101")).unwrap();
        t.delete(&bs("0101")).unwrap();
        assert_eq!(t, demo_trie());
        // And the other way: delete then reinsert.
        t.delete(&bs("0011")).unwrap();
        t.check_invariants();
        assert!(!t.contains(&bs("0011")));
        for s in ["0001", "0100", "00100"] {
            assert!(t.contains(&bs(s)));
        }
        // Canonicity: same set built fresh gives the same shape.
        let rebuilt =
            PatriciaTrie::from_strings(&[bs("0001"), bs("0100"), bs("00100")]).unwrap();
        assert_eq!(t, rebuilt);
        t.insert(&bs("0011")).unwrap();
        assert_eq!(t, demo_trie());
    }

    #[test]
    fn delete_down_to_one_and_zero() {
        let mut t = PatriciaTrie::from_strings(&[bs("0001"), bs("0111")]).unwrap();
        t.delete(&bs("0111")).unwrap();
        // Lone survivor collapses to a single leaf carrying its full string.
        assert_eq!(
            t,
            PatriciaTrie {
                root: Some(PNode::leaf(bs("0001")))
            }
        );
        assert_eq!(t.delete(&bs("0111")), Err(Error::Absent));
        t.delete(&bs("0001")).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.delete(&bs("0001")), Err(Error::Absent));
    }

    #[test]
    fn delete_rejects_absent_strings() {
        let mut t = demo_trie();
        for s in ["", "0", "01", "0101", "00101", "010000", "1"] {
            assert_eq!(t.delete(&bs(s)), Err(Error::Absent), "deleting {s:?}");
        }
        assert_eq!(t, demo_trie());
    }

    #[test]
    fn measure_and_lt_bound() {
        // Demo set: labels "0" + "" + "1" + "" + "0" + "" + "00" = 5 bits,
        // 4 leaves so 6 edges and 7 nodes; C(11,6) = 462 needs 9 bits.
        let t = demo_trie();
        let m = t.measure();
        assert_eq!(
            m,
            Measure {
                label_bits: 5,
                edges: 6,
                nodes: 7,
                leaves: 4
            }
        );
        assert_eq!(t.lt_bound(), 5 + 6 + 9);

        // A single string stores only itself: no edges, no shape entropy.
        let single = PatriciaTrie::from_strings(&[bs("010011")]).unwrap();
        let m = single.measure();
        assert_eq!((m.label_bits, m.edges, m.nodes), (6, 0, 1));
        assert_eq!(single.lt_bound(), 6);

        let empty = PatriciaTrie::new();
        assert_eq!(empty.lt_bound(), 0);
        assert_eq!(empty.measure().nodes, 0);
    }

    #[test]
    fn overhead_is_linear_in_string_count() {
        // Store k strings and check the pointer/struct overhead stays within
        // a fixed number of machine words per string.
        let strings: Vec<BitString> = (0..512u32)
            .map(|i| bits::binarize(&i.to_be_bytes()))
            .collect();
        let t = PatriciaTrie::from_strings(&strings).unwrap();
        t.check_invariants();
        let k = strings.len();
        let m = t.measure();
        let overhead = t.overhead_bits();
        // Nodes hold labels too; subtracting payload leaves struct + padding.
        assert!(
            overhead <= 16 * k * 64,
            "overhead {overhead} bits exceeds 16 words per string"
        );
        assert!(m.nodes <= 2 * k - 1 + 1);
    }

    #[test]
    fn walk_preorder_matches_structure() {
        let t = demo_trie();
        let mut seen = Vec::new();
        t.walk_preorder(|depth, label, leaf| {
            seen.push((depth, label.to_string(), leaf));
        });
        assert_eq!(
            seen,
            vec![
                (0, "0".to_string(), false),
                (1, "".to_string(), false),
                (2, "1".to_string(), true),
                (2, "".to_string(), false),
                (3, "0".to_string(), true),
                (3, "".to_string(), true),
                (1, "00".to_string(), true),
            ]
        );
    }

    #[test]
    fn membership_tracks_set_oracle() {
        // Interleaved inserts and deletes over a pool of prefix-free strings
        // (byte binarization is prefix-free by construction), with a plain
        // set as the oracle and periodic canonicity checks against a fresh
        // rebuild.
        let mut state = 0x5eed_cafe_1234_5678u64;
        let mut rng = move || {
            // xorshift is plenty for schedule generation
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let pool: Vec<BitString> = (0..400u64)
            .map(|i| {
                let len = (i % 5 + 1) as usize;
                let mut bytes = i.to_le_bytes().to_vec();
                bytes.truncate(len);
                bits::binarize(&bytes)
            })
            .collect();
        let mut t = PatriciaTrie::new();
        let mut oracle: BTreeSet<BitString> = BTreeSet::new();
        for step in 0..4000usize {
            let s = &pool[(rng() % pool.len() as u64) as usize];
            if rng() % 2 == 0 {
                let r = t.insert(s);
                if oracle.insert(s.clone()) {
                    assert_eq!(r, Ok(()), "insert of new string at step {step}");
                } else {
                    assert_eq!(r, Err(Error::Duplicate), "step {step}");
                }
            } else {
                let r = t.delete(s);
                if oracle.remove(s) {
                    assert_eq!(r, Ok(()), "delete of present string at step {step}");
                } else {
                    assert_eq!(r, Err(Error::Absent), "step {step}");
                }
            }
            if step % 100 == 99 {
                t.check_invariants();
                let rebuilt = PatriciaTrie::from_strings(oracle.iter()).unwrap();
                assert_eq!(t, rebuilt, "canonicity at step {step}");
            }
        }
        let stored: BTreeSet<BitString> = t.strings().into_iter().collect();
        assert_eq!(stored, oracle);
    }

    #[test]
    fn thousand_insert_delete_round_trips() {
        let strings: Vec<BitString> = (0..1000u64)
            .map(|i| bits::binarize(&(i * 2654435761).to_le_bytes()[..4]))
            .collect();
        let mut t = PatriciaTrie::from_strings(&strings).unwrap();
        let reference = t.clone();
        for s in &strings {
            t.delete(s).unwrap();
            t.insert(s).unwrap();
        }
        assert_eq!(t, reference);
        for s in &strings {
            t.delete(s).unwrap();
        }
        assert!(t.is_empty());
    }
}
