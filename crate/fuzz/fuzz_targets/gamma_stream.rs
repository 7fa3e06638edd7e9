//! Walk an arbitrary bit stream through the gamma decoder. Every decoded
//! value must re-encode to exactly the consumed bits (the code is canonical),
//! and decoding must never panic or stall.

#![no_main]

use libfuzzer_sys::fuzz_target;
use wavelet_trie::bits::{gamma_append, gamma_decode, BitString};

fuzz_target!(|data: &[u8]| {
    let mut bits = BitString::new();
    for byte in data {
        for k in 0..8 {
            bits.push(byte >> k & 1 == 1);
        }
    }

    let mut off = 0;
    while off < bits.len() {
        let Ok((value, used)) = gamma_decode(&bits, off) else { break };
        assert!(used > 0, "decoder must consume bits");
        let mut again = BitString::new();
        gamma_append(&mut again, value).expect("decoded value must re-encode");
        assert_eq!(again, bits.slice(off, off + used), "gamma code must be canonical");
        off += used;
    }
});
