//! Arbitrary bit streams either fail to debinarize or yield bytes that
//! binarize back to exactly the same stream.

#![no_main]

use libfuzzer_sys::fuzz_target;
use wavelet_trie::bits::{binarize, debinarize, BitString};

fuzz_target!(|data: &[u8]| {
    let mut bits = BitString::new();
    for byte in data {
        for k in 0..8 {
            bits.push(byte >> k & 1 == 1);
        }
    }
    let Ok(bytes) = debinarize(&bits) else { return };
    assert_eq!(binarize(&bytes), bits, "debinarize must invert binarize exactly");
});
