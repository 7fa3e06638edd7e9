//! Generated-workload differential tests: every index variant must agree
//! with the brute-force oracle and with the other variants, and every
//! serialized index must round-trip exactly.

use proptest::prelude::*;
use wavelet_trie::bits::{binarize, debinarize, BitString};
use wavelet_trie::oracle::VectorOracle;
use wavelet_trie::wtrie::{AnyIndex, AppendIndex, DynamicIndex, StaticIndex, Variant};

fn byte_string() -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(any::<u8>(), 0..4)
}

/// Sequences drawn from a small pool so duplicates and shared prefixes are
/// common; binarization keeps distinct byte strings prefix-free.
fn sequence() -> impl Strategy<Value = Vec<BitString>> {
    (
        proptest::collection::vec(byte_string(), 1..10),
        proptest::collection::vec(any::<prop::sample::Index>(), 0..100),
    )
        .prop_map(|(pool, picks)| {
            picks
                .into_iter()
                .map(|ix| binarize(&pool[ix.index(pool.len())]))
                .collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binarize_round_trips_and_stays_prefix_free(a in byte_string(), b in byte_string()) {
        let ba = binarize(&a);
        prop_assert_eq!(debinarize(&ba).unwrap(), a.clone());
        let bb = binarize(&b);
        if a != b {
            // Distinct byte strings map to distinct, mutually prefix-free codes.
            prop_assert_ne!(&ba, &bb);
            if ba.len() < bb.len() {
                prop_assert!(!bb.starts_with(&ba));
            } else if bb.len() < ba.len() {
                prop_assert!(!ba.starts_with(&bb));
            }
        }
    }

    #[test]
    fn variants_agree_with_the_oracle(seq in sequence()) {
        let o = VectorOracle::from_seq(seq.iter().cloned());
        let st = StaticIndex::build_static(&seq).unwrap();
        let ap = AppendIndex::from_seq(&seq).unwrap();
        let dy = DynamicIndex::from_seq(&seq).unwrap();
        let n = seq.len();
        prop_assert_eq!(st.nodes(), ap.nodes());
        prop_assert_eq!(st.nodes(), dy.nodes());
        for pos in 0..n {
            prop_assert_eq!(&st.access(pos).unwrap(), o.access(pos));
            prop_assert_eq!(&ap.access(pos).unwrap(), o.access(pos));
            prop_assert_eq!(&dy.access(pos).unwrap(), o.access(pos));
        }
        for (s, count) in st.set() {
            prop_assert_eq!(o.rank(&s, n), count);
            for t in [&st as &dyn Probe, &ap, &dy] {
                prop_assert_eq!(t.p_rank(&s, n), count);
                for idx in 0..count {
                    let at = t.p_select(&s, idx);
                    prop_assert_eq!(o.select(&s, idx), Some(at));
                    prop_assert_eq!(t.p_rank(&s, at), idx);
                }
                let half = s.slice(0, s.len() / 2);
                prop_assert_eq!(t.p_rank_prefix(&half, n), o.rank_prefix(&half, n));
            }
        }
    }

    #[test]
    fn serialization_round_trips(seq in sequence()) {
        for variant in [Variant::Static, Variant::Append, Variant::Dynamic] {
            let mut idx = AnyIndex::build(variant, &seq).unwrap();
            idx.quiesce();
            let bytes = idx.to_bytes().unwrap();
            let back = AnyIndex::from_bytes(&bytes).unwrap();
            prop_assert_eq!(back.variant(), variant);
            prop_assert_eq!(back.nodes(), idx.nodes());
            prop_assert_eq!(back.to_bytes().unwrap(), bytes);
        }
    }

    #[test]
    fn mutations_track_the_oracle(
        seq in sequence(),
        ops in proptest::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>(), any::<bool>()), 0..40),
    ) {
        let mut o = VectorOracle::from_seq(seq.iter().cloned());
        let mut dy = DynamicIndex::from_seq(&seq).unwrap();
        let pool: Vec<BitString> = seq.clone();
        for (a, b, grow) in ops {
            if grow || o.is_empty() {
                let s = if pool.is_empty() {
                    binarize(&[a.index(256) as u8])
                } else {
                    pool[a.index(pool.len())].clone()
                };
                let pos = b.index(o.len() + 1);
                dy.insert(&s, pos).unwrap();
                o.insert(pos, s);
            } else {
                let pos = a.index(o.len());
                let removed = dy.delete(pos).unwrap();
                prop_assert_eq!(removed, o.delete(pos));
            }
            dy.check_invariants();
        }
        prop_assert_eq!(dy.len(), o.len());
        for pos in 0..o.len() {
            prop_assert_eq!(&dy.access(pos).unwrap(), o.access(pos));
        }
        // The mutated structure must equal a fresh build of its content.
        let rebuilt = DynamicIndex::from_seq(o.strings()).unwrap();
        prop_assert_eq!(rebuilt.nodes(), dy.nodes());
    }
}

/// Uniform query surface so one loop can probe all three variants.
trait Probe {
    fn p_rank(&self, s: &BitString, pos: usize) -> usize;
    fn p_select(&self, s: &BitString, idx: usize) -> usize;
    fn p_rank_prefix(&self, p: &BitString, pos: usize) -> usize;
}

macro_rules! impl_probe {
    ($ty:ty) => {
        impl Probe for $ty {
            fn p_rank(&self, s: &BitString, pos: usize) -> usize {
                self.rank(s, pos).unwrap()
            }
            fn p_select(&self, s: &BitString, idx: usize) -> usize {
                self.select(s, idx).unwrap()
            }
            fn p_rank_prefix(&self, p: &BitString, pos: usize) -> usize {
                self.rank_prefix(p, pos).unwrap()
            }
        }
    };
}

impl_probe!(StaticIndex);
impl_probe!(AppendIndex);
impl_probe!(DynamicIndex);
