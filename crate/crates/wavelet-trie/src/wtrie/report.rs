//! Space accounting: measures what the structure actually spends and the
//! information-theoretic floor for the stored multiset, so callers can
//! verify the compression claim instance by instance.

use std::fmt;
use std::mem::size_of;

use crate::bits::{binomial_bound, zero_order_entropy};

use super::{Inner, NodeBits, WNode, WaveletTrie};

/// Breakdown of an index's size against the lower bound for its content.
///
/// The floor has two parts: `lt_bits` (shape: label bits + edges + an
/// edge-placement binomial) and `entropy_bits` (`n * H0`, the cost of the
/// multiplicities). `lb_bits` is their sum with the entropy rounded up.
/// Everything measured is split into bitvector payloads, label storage, and
/// per-node record overhead, with `total_bits` the sum of the three.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceReport {
    /// Stored sequence length.
    pub n: usize,
    /// Number of distinct strings.
    pub distinct: usize,
    /// Trie nodes (2 * distinct - 1 for a nonempty index).
    pub nodes: usize,
    /// Trie edges (nodes - 1).
    pub edges: usize,
    /// Total bits across node labels.
    pub label_bits: usize,
    /// Average height: total bitvector length / n.
    pub avg_height: f64,
    /// Average stored string length, weighted by multiplicity.
    pub mean_string_bits: f64,
    /// n * H0 of the sequence (fractional bits).
    pub entropy_bits: f64,
    /// Shape floor: label_bits + edges + binomial edge-placement bound.
    pub lt_bits: usize,
    /// Full floor: lt_bits + ceil(entropy_bits).
    pub lb_bits: usize,
    /// Bits spent by the per-node bitvector encodings (payloads only).
    pub bitvector_bits: usize,
    /// Bits spent storing label words (word-padded).
    pub label_store_bits: usize,
    /// In-memory record overhead: node and child-pair struct sizes.
    pub record_bits: usize,
    /// bitvector_bits + label_store_bits + record_bits.
    pub total_bits: usize,
}

impl fmt::Display for SpaceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n: {}", self.n)?;
        writeln!(f, "distinct: {}", self.distinct)?;
        writeln!(f, "nodes: {}", self.nodes)?;
        writeln!(f, "edges: {}", self.edges)?;
        writeln!(f, "label bits: {}", self.label_bits)?;
        writeln!(f, "avg height: {}", self.avg_height)?;
        writeln!(f, "mean string bits: {}", self.mean_string_bits)?;
        writeln!(f, "entropy bits: {}", self.entropy_bits)?;
        writeln!(f, "lt bits: {}", self.lt_bits)?;
        writeln!(f, "lb bits: {}", self.lb_bits)?;
        writeln!(f, "bitvector bits: {}", self.bitvector_bits)?;
        writeln!(f, "label store bits: {}", self.label_store_bits)?;
        writeln!(f, "record bits: {}", self.record_bits)?;
        write!(f, "total bits: {}", self.total_bits)
    }
}

#[derive(Default)]
struct Acc {
    nodes: usize,
    internals: usize,
    label_bits: usize,
    label_store_bits: usize,
    beta_bits: usize,
    payload_bits: usize,
    counts: Vec<u64>,
    weighted_len: usize,
}

fn walk<B: NodeBits>(node: &WNode<B>, size: usize, path: usize, acc: &mut Acc) {
    acc.nodes += 1;
    acc.label_bits += node.label.len();
    acc.label_store_bits += node.label.payload_bits();
    let depth = path + node.label.len();
    match &node.inner {
        None => {
            acc.counts.push(size as u64);
            acc.weighted_len += size * depth;
        }
        Some(inner) => {
            acc.internals += 1;
            acc.beta_bits += inner.bits.len();
            acc.payload_bits += inner.bits.payload_bits();
            walk(&inner.children[0], inner.bits.count(false), depth + 1, acc);
            walk(&inner.children[1], inner.bits.count(true), depth + 1, acc);
        }
    }
}

impl<B: NodeBits> WaveletTrie<B> {
    /// Measures the index and the floor for its current content.
    pub fn space_report(&self) -> SpaceReport {
        let mut acc = Acc::default();
        if let Some(root) = &self.root {
            walk(root, self.n, 0, &mut acc);
        }
        let n = self.n;
        let entropy_bits = if n == 0 {
            0.0
        } else {
            zero_order_entropy(&acc.counts).expect("nonempty counts") * n as f64
        };
        let placement =
            binomial_bound(acc.edges() as u64, (acc.label_bits + acc.edges()) as u64) as usize;
        let lt_bits = acc.label_bits + acc.edges() + placement;
        let record_bits =
            8 * (acc.nodes * size_of::<WNode<B>>() + acc.internals * size_of::<Inner<B>>());
        let total_bits = acc.payload_bits + acc.label_store_bits + record_bits;
        SpaceReport {
            n,
            distinct: acc.counts.len(),
            nodes: acc.nodes,
            edges: acc.edges(),
            label_bits: acc.label_bits,
            avg_height: ratio(acc.beta_bits, n),
            mean_string_bits: ratio(acc.weighted_len, n),
            entropy_bits,
            lt_bits,
            lb_bits: lt_bits + entropy_bits.ceil() as usize,
            bitvector_bits: acc.payload_bits,
            label_store_bits: acc.label_store_bits,
            record_bits,
            total_bits,
        }
    }
}

impl Acc {
    fn edges(&self) -> usize {
        self.nodes.saturating_sub(1)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
