//! The text parser accepts only 0/1 strings; whatever parses must survive a
//! display round trip.

#![no_main]

use libfuzzer_sys::fuzz_target;
use wavelet_trie::bits::BitString;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(bits) = text.parse::<BitString>() else { return };
    let shown = bits.to_string();
    let reparsed: BitString = shown.parse().expect("displayed bits must reparse");
    assert_eq!(bits, reparsed, "display round trip must preserve the bits");
});
