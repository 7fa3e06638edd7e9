//! Self-delimiting bit string blobs: decode, re-encode, compare.

#![no_main]

use libfuzzer_sys::fuzz_target;
use wavelet_trie::bits::BitString;

fuzz_target!(|data: &[u8]| {
    let Ok(bits) = BitString::from_bytes(data) else { return };
    let first = bits.to_bytes();
    let again = BitString::from_bytes(&first).expect("canonical bytes must decode");
    assert_eq!(bits, again, "round trip must preserve the bits");
    assert_eq!(first, again.to_bytes(), "serialization must be canonical");
});
