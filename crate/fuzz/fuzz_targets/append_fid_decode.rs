//! Decoded append-only bitvectors land in the sealed state; they must answer
//! consistently and re-encode to the same bytes.

#![no_main]

use libfuzzer_sys::fuzz_target;
use wavelet_trie::abv::AppendFID;

fuzz_target!(|data: &[u8]| {
    let Ok(fid) = AppendFID::from_bytes(data) else { return };
    let first = fid.to_bytes().expect("decoded bitvector must serialize");
    let again = AppendFID::from_bytes(&first).expect("canonical bytes must decode");
    assert_eq!(
        first,
        again.to_bytes().expect("re-decoded bitvector must serialize"),
        "serialization must be canonical"
    );

    let n = fid.len();
    assert_eq!(fid.rank(true, n) + fid.rank(false, n), n);
    if fid.count(true) > 0 {
        let p = fid.select(true, 0).expect("a set bit must be findable");
        assert!(fid.access(p), "select must land on a set bit");
        assert_eq!(fid.rank(true, p), 0, "nothing set before the first set bit");
    }
});
