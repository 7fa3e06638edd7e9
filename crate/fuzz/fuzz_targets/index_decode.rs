//! Hostile-input check for the index file decoder: arbitrary bytes must
//! either decode into a structure that passes the full invariant sweep and
//! re-serializes canonically, or fail cleanly.

#![no_main]

use libfuzzer_sys::fuzz_target;
use wavelet_trie::wtrie::AnyIndex;

fuzz_target!(|data: &[u8]| {
    let Ok(idx) = AnyIndex::from_bytes(data) else { return };
    idx.check_invariants();
    let first = idx.to_bytes().expect("decoded index must serialize");
    let again = AnyIndex::from_bytes(&first).expect("canonical bytes must decode");
    let second = again.to_bytes().expect("re-decoded index must serialize");
    assert_eq!(first, second, "serialization must be canonical");
    if !idx.is_empty() {
        let s = idx.access(0).expect("first element must be readable");
        let c = idx.rank(&s, idx.len()).expect("rank over the full range");
        assert!(c >= 1, "accessed string must be counted at least once");
    }
});
