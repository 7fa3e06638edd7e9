//! Decoded static bitvectors must answer consistently and re-encode to the
//! same bytes.

#![no_main]

use libfuzzer_sys::fuzz_target;
use wavelet_trie::rrr::StaticFID;

fuzz_target!(|data: &[u8]| {
    let Ok(fid) = StaticFID::from_bytes(data) else { return };
    let first = fid.to_bytes();
    let again = StaticFID::from_bytes(&first).expect("canonical bytes must decode");
    assert_eq!(first, again.to_bytes(), "serialization must be canonical");

    let n = fid.len();
    assert_eq!(fid.rank(true, n) + fid.rank(false, n), n);
    assert_eq!(fid.rank(true, n), fid.count(true));
    if fid.count(true) > 0 {
        let p = fid.select(true, 0).expect("a set bit must be findable");
        assert!(fid.access(p), "select must land on a set bit");
        assert_eq!(fid.rank(true, p), 0, "nothing set before the first set bit");
    }
});
