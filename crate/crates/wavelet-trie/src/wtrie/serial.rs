//! Single-file index format shared by the three variants, plus [`AnyIndex`],
//! the variant-erased handle the CLI works with.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "WTRI" | version u32 | variant u8 | n u64 | node count u64
//!   | shape bits (preorder, 1 = leaf)
//!   | label lengths (gamma codes of length + 1, preorder)
//!   | concatenated label bits
//!   | per-internal-node bitvector payloads, preorder
//! ```
//!
//! The writer and loader are iterative on purpose: tree depth in a file is
//! attacker-controlled until validated, so nothing here may recurse. After
//! parsing, subtree sizes are re-derived from the bitvectors and checked
//! against every node, so a loaded index satisfies the same invariants as a
//! built one.

use crate::abv::AppendFID;
use crate::bits::{gamma_append, gamma_decode, BitString};
use crate::dbv::DynamicFID;
use crate::error::{decode_err, Error, Result};
use crate::rrr::StaticFID;
use crate::wire::{put_u32, put_u64, Reader};

use super::{
    AppendIndex, DynamicIndex, Inner, NodeBits, NodeView, OffsetAppend, SpaceReport, StaticIndex,
    WNode, WaveletTrie,
};

const MAGIC: &[u8; 4] = b"WTRI";
const VERSION: u32 = 1;

/// Which mutations an index supports; stored in the file header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Immutable; queries only.
    Static,
    /// Grows at the end; constant work per appended bit.
    Append,
    /// Insert and delete at arbitrary positions.
    Dynamic,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Static => "static",
            Variant::Append => "append",
            Variant::Dynamic => "dynamic",
        }
    }

    fn code(self) -> u8 {
        match self {
            Variant::Static => 0,
            Variant::Append => 1,
            Variant::Dynamic => 2,
        }
    }

    fn from_code(code: u8) -> Result<Variant> {
        match code {
            0 => Ok(Variant::Static),
            1 => Ok(Variant::Append),
            2 => Ok(Variant::Dynamic),
            v => decode_err(format!("unknown variant tag {v}")),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An index of any variant behind one type, so files can be loaded without
/// knowing in advance what they contain. Mutations unsupported by the
/// wrapped variant fail with [`Error::VariantMismatch`].
#[derive(Debug, Clone)]
pub enum AnyIndex {
    Static(StaticIndex),
    Append(AppendIndex),
    Dynamic(DynamicIndex),
}

macro_rules! on_each {
    ($self:expr, $t:ident => $e:expr) => {
        match $self {
            AnyIndex::Static($t) => $e,
            AnyIndex::Append($t) => $e,
            AnyIndex::Dynamic($t) => $e,
        }
    };
}

impl AnyIndex {
    /// Builds an index of the requested variant from a sequence.
    pub fn build(variant: Variant, seq: &[BitString]) -> Result<AnyIndex> {
        Ok(match variant {
            Variant::Static => AnyIndex::Static(StaticIndex::build_static(seq)?),
            Variant::Append => AnyIndex::Append(AppendIndex::from_seq(seq)?),
            Variant::Dynamic => AnyIndex::Dynamic(DynamicIndex::from_seq(seq)?),
        })
    }

    pub fn variant(&self) -> Variant {
        match self {
            AnyIndex::Static(_) => Variant::Static,
            AnyIndex::Append(_) => Variant::Append,
            AnyIndex::Dynamic(_) => Variant::Dynamic,
        }
    }

    pub fn len(&self) -> usize {
        on_each!(self, t => t.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn height(&self) -> usize {
        on_each!(self, t => t.height())
    }

    pub fn distinct_count(&self) -> usize {
        on_each!(self, t => t.distinct_count())
    }

    pub fn access(&self, pos: usize) -> Result<BitString> {
        on_each!(self, t => t.access(pos))
    }

    pub fn rank(&self, s: &BitString, pos: usize) -> Result<usize> {
        on_each!(self, t => t.rank(s, pos))
    }

    pub fn rank_prefix(&self, p: &BitString, pos: usize) -> Result<usize> {
        on_each!(self, t => t.rank_prefix(p, pos))
    }

    pub fn select(&self, s: &BitString, idx: usize) -> Result<usize> {
        on_each!(self, t => t.select(s, idx))
    }

    pub fn select_prefix(&self, p: &BitString, idx: usize) -> Result<usize> {
        on_each!(self, t => t.select_prefix(p, idx))
    }

    pub fn range_distinct(&self, l: usize, r: usize) -> Result<Vec<(BitString, usize)>> {
        on_each!(self, t => t.range_distinct(l, r))
    }

    pub fn range_distinct_by_prefix(
        &self,
        l: usize,
        r: usize,
        prefix_bits: usize,
    ) -> Result<Vec<(BitString, usize)>> {
        on_each!(self, t => t.range_distinct_by_prefix(l, r, prefix_bits))
    }

    pub fn range_majority(&self, l: usize, r: usize) -> Result<Option<BitString>> {
        on_each!(self, t => t.range_majority(l, r))
    }

    pub fn range_threshold(&self, l: usize, r: usize, t0: usize) -> Result<Vec<(BitString, usize)>> {
        on_each!(self, t => t.range_threshold(l, r, t0))
    }

    pub fn iter_range(&self, l: usize, r: usize) -> Result<Box<dyn Iterator<Item = BitString> + '_>> {
        on_each!(self, t => Ok(Box::new(t.range_iter(l, r)?) as Box<dyn Iterator<Item = BitString>>))
    }

    pub fn set(&self) -> Vec<(BitString, usize)> {
        on_each!(self, t => t.set())
    }

    pub fn nodes(&self) -> Vec<NodeView> {
        on_each!(self, t => t.nodes())
    }

    pub fn space_report(&self) -> SpaceReport {
        on_each!(self, t => t.space_report())
    }

    pub fn check_invariants(&self) {
        on_each!(self, t => t.check_invariants())
    }

    pub fn append(&mut self, s: &BitString) -> Result<()> {
        match self {
            AnyIndex::Static(_) => Err(Error::VariantMismatch {
                op: "append",
                variant: "static",
            }),
            AnyIndex::Append(t) => t.append(s),
            AnyIndex::Dynamic(t) => t.append(s),
        }
    }

    pub fn insert(&mut self, s: &BitString, pos: usize) -> Result<()> {
        match self {
            AnyIndex::Dynamic(t) => t.insert(s, pos),
            other => Err(Error::VariantMismatch {
                op: "insert",
                variant: other.variant().as_str(),
            }),
        }
    }

    pub fn delete(&mut self, pos: usize) -> Result<BitString> {
        match self {
            AnyIndex::Dynamic(t) => t.delete(pos),
            other => Err(Error::VariantMismatch {
                op: "delete",
                variant: other.variant().as_str(),
            }),
        }
    }

    /// Finishes pending background work on the append variant; a no-op for
    /// the others. Serialization of the append variant requires this.
    pub fn quiesce(&mut self) {
        if let AnyIndex::Append(t) = self {
            t.quiesce();
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, VERSION);
        out.push(self.variant().code());
        match self {
            AnyIndex::Static(t) => {
                put_u64(&mut out, t.n as u64);
                write_tree(t.root.as_ref(), &mut out, |fid: &StaticFID, out| {
                    fid.write_into(out);
                    Ok(())
                })?;
            }
            AnyIndex::Append(t) => {
                put_u64(&mut out, t.n as u64);
                write_tree(t.root.as_ref(), &mut out, |bits: &OffsetAppend, out| {
                    put_u64(out, bits.offset() as u64);
                    // Normalize so the fill bit is meaningful only with a
                    // nonzero offset; keeps equal structures byte-equal.
                    out.push((bits.offset() > 0 && bits.fill()) as u8);
                    let blob = bits.fid().to_bytes()?;
                    put_u64(out, blob.len() as u64);
                    out.extend_from_slice(&blob);
                    Ok(())
                })?;
            }
            AnyIndex::Dynamic(t) => {
                put_u64(&mut out, t.n as u64);
                write_tree(t.root.as_ref(), &mut out, |bits: &DynamicFID, out| {
                    bits.to_bit_string().write_into(out);
                    Ok(())
                })?;
            }
        }
        Ok(out)
    }

    pub fn from_bytes(data: &[u8]) -> Result<AnyIndex> {
        let mut r = Reader::new(data);
        r.magic(MAGIC)?;
        let version = r.u32("format version")?;
        if version != VERSION {
            return decode_err(format!("unsupported format version {version}"));
        }
        let variant = Variant::from_code(r.u8("variant tag")?)?;
        let n = r.len("sequence length")?;
        let out = match variant {
            Variant::Static => {
                let root = read_tree(&mut r, n, StaticFID::read_from)?;
                AnyIndex::Static(WaveletTrie { root, n })
            }
            Variant::Append => {
                let root = read_tree(&mut r, n, |r| {
                    let offset = r.len("offset")?;
                    let fill = match r.u8("fill bit")? {
                        0 => false,
                        1 => true,
                        v => return decode_err(format!("fill bit must be 0 or 1, got {v}")),
                    };
                    let blen = r.len("bitvector blob length")?;
                    let fid = AppendFID::from_bytes(r.bytes(blen, "bitvector blob")?)?;
                    if offset.checked_add(fid.len()).map_or(true, |total| total > n) {
                        return decode_err("offset bitvector longer than the sequence");
                    }
                    Ok(OffsetAppend::from_parts(offset, fill && offset > 0, fid))
                })?;
                AnyIndex::Append(WaveletTrie { root, n })
            }
            Variant::Dynamic => {
                let root = read_tree(&mut r, n, |r| {
                    let bits = BitString::read_from(r)?;
                    Ok(DynamicFID::from_bit_string(&bits))
                })?;
                AnyIndex::Dynamic(WaveletTrie { root, n })
            }
        };
        r.finish("index")?;
        Ok(out)
    }
}

fn write_tree<B: NodeBits>(
    root: Option<&WNode<B>>,
    out: &mut Vec<u8>,
    mut write_bits: impl FnMut(&B, &mut Vec<u8>) -> Result<()>,
) -> Result<()> {
    let mut order: Vec<&WNode<B>> = Vec::new();
    let mut stack: Vec<&WNode<B>> = root.into_iter().collect();
    while let Some(node) = stack.pop() {
        order.push(node);
        if let Some(inner) = &node.inner {
            stack.push(&inner.children[1]);
            stack.push(&inner.children[0]);
        }
    }
    put_u64(out, order.len() as u64);
    let mut shape = BitString::new();
    let mut lens = BitString::new();
    let mut labels = BitString::new();
    for node in &order {
        shape.push(node.inner.is_none());
        gamma_append(&mut lens, node.label.len() as u64 + 1).expect("nonzero");
        labels.extend(&node.label);
    }
    shape.write_into(out);
    lens.write_into(out);
    labels.write_into(out);
    for node in &order {
        if let Some(inner) = &node.inner {
            write_bits(&inner.bits, out)?;
        }
    }
    Ok(())
}

/// Internal node parsed but still waiting for its children.
struct Pending<B> {
    label: BitString,
    bits: B,
    children: Vec<WNode<B>>,
}

fn read_tree<B: NodeBits>(
    r: &mut Reader<'_>,
    n: usize,
    mut read_bits: impl FnMut(&mut Reader<'_>) -> Result<B>,
) -> Result<Option<WNode<B>>> {
    let node_count = r.len("node count")?;
    let shape = BitString::read_from(r)?;
    if shape.len() != node_count {
        return decode_err("shape bit count disagrees with node count");
    }
    let lens = BitString::read_from(r)?;
    let labels = BitString::read_from(r)?;
    if node_count == 0 {
        if n != 0 {
            return decode_err("no nodes recorded for a nonempty sequence");
        }
        if lens.len() != 0 || labels.len() != 0 {
            return decode_err("label data recorded for an empty index");
        }
        return Ok(None);
    }
    if n == 0 {
        return decode_err("node records present in an empty index");
    }
    if node_count % 2 == 0 {
        return decode_err("node count must be odd (full binary tree)");
    }
    if node_count / 2 >= n {
        return decode_err("more leaves than stored strings");
    }
    let mut cursor = 0usize;
    let mut label_at = 0usize;
    let mut pending: Vec<Pending<B>> = Vec::new();
    let mut root: Option<WNode<B>> = None;
    for i in 0..node_count {
        if root.is_some() {
            return decode_err("node records continue after the tree completed");
        }
        let (len_plus, used) = gamma_decode(&lens, cursor)?;
        cursor += used;
        let llen = usize::try_from(len_plus - 1)
            .map_err(|_| Error::Decode("label length too large".into()))?;
        if llen > labels.len() - label_at {
            return decode_err("label stream shorter than declared lengths");
        }
        let label = labels.slice(label_at, label_at + llen);
        label_at += llen;
        if shape.bit(i) {
            let mut node = WNode::leaf(label);
            loop {
                let Some(p) = pending.last_mut() else {
                    root = Some(node);
                    break;
                };
                p.children.push(node);
                if p.children.len() < 2 {
                    break;
                }
                let p = pending.pop().expect("nonempty");
                let mut it = p.children.into_iter();
                let children = [it.next().expect("two"), it.next().expect("two")];
                node = WNode {
                    label: p.label,
                    inner: Some(Box::new(Inner {
                        bits: p.bits,
                        children,
                    })),
                };
            }
        } else {
            let bits = read_bits(r)?;
            pending.push(Pending {
                label,
                bits,
                children: Vec::with_capacity(2),
            });
        }
    }
    if cursor != lens.len() {
        return decode_err("trailing data in the label length stream");
    }
    if label_at != labels.len() {
        return decode_err("trailing bits in the label stream");
    }
    let Some(root) = root else {
        return decode_err("tree truncated: an internal node is missing children");
    };
    validate_sizes(&root, n)?;
    Ok(Some(root))
}

/// Re-derives every subtree size from the bitvectors and rejects structures
/// a builder could never produce. Iterative: depth is untrusted here.
fn validate_sizes<B: NodeBits>(root: &WNode<B>, n: usize) -> Result<()> {
    let mut stack: Vec<(&WNode<B>, usize)> = vec![(root, n)];
    while let Some((node, size)) = stack.pop() {
        match &node.inner {
            None => {
                if size == 0 {
                    return decode_err("leaf holds no strings");
                }
            }
            Some(inner) => {
                if inner.bits.len() != size {
                    return decode_err("bitvector length disagrees with subtree size");
                }
                let c0 = inner.bits.count(false);
                if c0 == 0 || c0 == size {
                    return decode_err("internal node with a constant bitvector");
                }
                stack.push((&inner.children[0], c0));
                stack.push((&inner.children[1], size - c0));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::tests::demo_seq;
    use super::*;
    use crate::bits::binarize;

    fn battery(a: &AnyIndex, b: &AnyIndex) {
        assert_eq!(a.variant(), b.variant());
        assert_eq!(a.len(), b.len());
        assert_eq!(a.nodes(), b.nodes());
        b.check_invariants();
        for pos in 0..a.len() {
            assert_eq!(a.access(pos).unwrap(), b.access(pos).unwrap());
        }
        for (s, count) in a.set() {
            assert_eq!(b.rank(&s, a.len()).unwrap(), count);
            for idx in 0..count {
                assert_eq!(a.select(&s, idx).unwrap(), b.select(&s, idx).unwrap());
            }
        }
    }

    #[test]
    fn round_trips_every_variant() {
        for variant in [Variant::Static, Variant::Append, Variant::Dynamic] {
            let mut idx = AnyIndex::build(variant, &demo_seq()).unwrap();
            idx.quiesce();
            let bytes = idx.to_bytes().unwrap();
            let loaded = AnyIndex::from_bytes(&bytes).unwrap();
            battery(&idx, &loaded);
            // Loading is exact, so re-serialization reproduces the file.
            assert_eq!(loaded.to_bytes().unwrap(), bytes);
        }
    }

    #[test]
    fn serialization_is_deterministic() {
        let seq: Vec<_> = (0..200u32)
            .map(|i| binarize(&(i % 23).to_le_bytes()[..1]))
            .collect();
        let a = AnyIndex::build(Variant::Static, &seq).unwrap();
        let b = AnyIndex::build(Variant::Static, &seq).unwrap();
        assert_eq!(a.to_bytes().unwrap(), b.to_bytes().unwrap());
        let mut c = AnyIndex::build(Variant::Append, &seq).unwrap();
        let mut d = AnyIndex::build(Variant::Append, &seq).unwrap();
        c.quiesce();
        d.quiesce();
        assert_eq!(c.to_bytes().unwrap(), d.to_bytes().unwrap());
    }

    #[test]
    fn empty_index_round_trips() {
        for variant in [Variant::Static, Variant::Append, Variant::Dynamic] {
            let idx = AnyIndex::build(variant, &[]).unwrap();
            let bytes = idx.to_bytes().unwrap();
            let loaded = AnyIndex::from_bytes(&bytes).unwrap();
            assert_eq!(loaded.len(), 0);
            assert_eq!(loaded.variant(), variant);
            assert!(loaded.set().is_empty());
        }
    }

    #[test]
    fn append_serialization_requires_quiescence() {
        let mut t = AppendIndex::new();
        let s = binarize(b"q");
        for _ in 0..10_000 {
            t.append(&s).unwrap();
        }
        let quiescent = t.is_quiescent();
        let idx = AnyIndex::Append(t);
        assert_eq!(idx.to_bytes().is_ok(), quiescent);
        let mut idx = idx;
        idx.quiesce();
        let bytes = idx.to_bytes().unwrap();
        let loaded = AnyIndex::from_bytes(&bytes).unwrap();
        assert_eq!(loaded.len(), 10_000);
    }

    #[test]
    fn mutations_respect_variants() {
        let s = demo_seq();
        let extra = s[0].clone();
        let mut st = AnyIndex::build(Variant::Static, &s).unwrap();
        assert_eq!(
            st.append(&extra),
            Err(Error::VariantMismatch {
                op: "append",
                variant: "static"
            })
        );
        let mut ap = AnyIndex::build(Variant::Append, &s).unwrap();
        assert!(ap.append(&extra).is_ok());
        assert_eq!(
            ap.insert(&extra, 0),
            Err(Error::VariantMismatch {
                op: "insert",
                variant: "append"
            })
        );
        assert_eq!(
            ap.delete(0),
            Err(Error::VariantMismatch {
                op: "delete",
                variant: "append"
            })
        );
        let mut dy = AnyIndex::build(Variant::Dynamic, &s).unwrap();
        assert!(dy.append(&extra).is_ok());
        assert!(dy.insert(&extra, 0).is_ok());
        assert!(dy.delete(0).is_ok());
    }

    #[test]
    fn rejects_corrupt_headers() {
        let idx = AnyIndex::build(Variant::Static, &demo_seq()).unwrap();
        let good = idx.to_bytes().unwrap();
        assert!(AnyIndex::from_bytes(&good).is_ok());

        let mut bad = good.clone();
        bad[0] ^= 0x20;
        assert!(matches!(AnyIndex::from_bytes(&bad), Err(Error::Decode(_))));

        let mut bad = good.clone();
        bad[4] = 99; // version
        assert!(matches!(AnyIndex::from_bytes(&bad), Err(Error::Decode(_))));

        let mut bad = good.clone();
        bad[8] = 3; // variant tag
        assert!(matches!(AnyIndex::from_bytes(&bad), Err(Error::Decode(_))));

        // Variant tag of a different, valid variant: payload no longer parses.
        let mut bad = good.clone();
        bad[8] = 2;
        assert!(matches!(AnyIndex::from_bytes(&bad), Err(Error::Decode(_))));

        // Sequence length field inconsistent with the bitvectors.
        let mut bad = good.clone();
        bad[9..17].copy_from_slice(&8u64.to_le_bytes());
        assert!(matches!(AnyIndex::from_bytes(&bad), Err(Error::Decode(_))));
    }

    #[test]
    fn rejects_truncation_and_trailing_bytes() {
        let idx = AnyIndex::build(Variant::Dynamic, &demo_seq()).unwrap();
        let good = idx.to_bytes().unwrap();
        for cut in [1, 8, 17, good.len() / 2, good.len() - 1] {
            assert!(
                matches!(AnyIndex::from_bytes(&good[..cut]), Err(Error::Decode(_))),
                "truncation at {cut} must fail"
            );
        }
        let mut bad = good.clone();
        bad.push(0);
        assert!(matches!(AnyIndex::from_bytes(&bad), Err(Error::Decode(_))));
    }

    #[test]
    fn rejects_structurally_invalid_trees() {
        // Hand-assembled dynamic-variant file: one internal node with a
        // constant bitvector "00" and two leaves, n = 2.
        let assemble = |beta: &str, n: u64| -> Vec<u8> {
            let mut out = Vec::new();
            out.extend_from_slice(MAGIC);
            put_u32(&mut out, VERSION);
            out.push(2); // dynamic
            put_u64(&mut out, n);
            put_u64(&mut out, 3); // node count
            let shape: BitString = "011".parse().unwrap();
            shape.write_into(&mut out);
            let mut lens = BitString::new();
            for _ in 0..3 {
                gamma_append(&mut lens, 1).unwrap(); // three empty labels
            }
            lens.write_into(&mut out);
            BitString::new().write_into(&mut out); // label stream
            let beta: BitString = beta.parse().unwrap();
            beta.write_into(&mut out);
            out
        };
        let ok = assemble("01", 2);
        assert!(AnyIndex::from_bytes(&ok).is_ok());
        let constant = assemble("00", 2);
        let err = AnyIndex::from_bytes(&constant).unwrap_err();
        assert!(matches!(err, Error::Decode(ref m) if m.contains("constant")));
        let mismatched = assemble("01", 3);
        assert!(matches!(
            AnyIndex::from_bytes(&mismatched),
            Err(Error::Decode(_))
        ));
        // Even node counts cannot form a full binary tree.
        let mut bad = assemble("01", 2);
        bad[17..25].copy_from_slice(&2u64.to_le_bytes());
        assert!(matches!(AnyIndex::from_bytes(&bad), Err(Error::Decode(_))));
    }

    #[test]
    fn loaded_indices_answer_queries_after_mutation() {
        let mut idx = AnyIndex::build(Variant::Dynamic, &demo_seq()).unwrap();
        let bytes = idx.to_bytes().unwrap();
        let mut loaded = AnyIndex::from_bytes(&bytes).unwrap();
        let s = binarize(b"new");
        idx.insert(&s, 3).unwrap();
        loaded.insert(&s, 3).unwrap();
        battery(&idx, &loaded);
        idx.delete(0).unwrap();
        loaded.delete(0).unwrap();
        battery(&idx, &loaded);
    }
}
