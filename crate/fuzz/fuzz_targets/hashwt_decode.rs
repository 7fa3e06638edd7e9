//! The hashed-tree loader rejects mismatched multipliers and malformed inner
//! payloads; anything it accepts must behave and round-trip.

#![no_main]

use libfuzzer_sys::fuzz_target;
use wavelet_trie::hashwt::HashedWaveletTree;

fuzz_target!(|data: &[u8]| {
    let Ok(h) = HashedWaveletTree::from_bytes(data) else { return };
    let first = h.to_bytes().expect("decoded tree must serialize");
    let again = HashedWaveletTree::from_bytes(&first).expect("canonical bytes must decode");
    let second = again.to_bytes().expect("re-decoded tree must serialize");
    assert_eq!(first, second, "serialization must be canonical");
    if !h.is_empty() {
        let v = h.access(0).expect("first value must be readable");
        let c = h.rank(v, h.len()).expect("rank over the full range");
        assert!(c >= 1, "accessed value must be counted at least once");
    }
});
