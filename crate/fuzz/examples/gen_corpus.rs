//! Regenerates the seed corpus under `fuzz/corpus/`. Run from the `fuzz/`
//! directory with `cargo run --example gen_corpus`. Seeds are valid
//! serializations so the fuzzers start from the accept path rather than
//! having to discover the magic bytes.

use std::fs;
use std::path::Path;

use wavelet_trie::bits::{binarize, gamma_append, BitString};
use wavelet_trie::hashwt::HashedWaveletTree;
use wavelet_trie::rrr::StaticFID;
use wavelet_trie::wtrie::{AnyIndex, Variant};

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Packs bits LSB-first per byte, matching how the bit-stream targets unpack
/// their input.
fn pack(bits: &BitString) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for i in 0..bits.len() {
        if bits.bit(i) {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

fn write_seed(dir: &Path, name: &str, bytes: &[u8]) {
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join(name), bytes).unwrap();
    println!("{}/{name}: {} bytes", dir.display(), bytes.len());
}

fn main() {
    let corpus = Path::new("corpus");
    let mut st = 7u64;

    let demo: Vec<BitString> = ["0001", "0011", "0100", "00100", "0100", "00100", "0100"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let urls: Vec<BitString> = (0..40)
        .map(|i| binarize(format!("https://host{:02}.example.com/p{}", i % 5, i).as_bytes()))
        .collect();

    let dir = corpus.join("index_decode");
    for (name, variant, seq) in [
        ("empty-static", Variant::Static, &Vec::new()),
        ("demo-static", Variant::Static, &demo),
        ("demo-append", Variant::Append, &demo),
        ("demo-dynamic", Variant::Dynamic, &demo),
        ("urls-append", Variant::Append, &urls),
    ] {
        let idx = AnyIndex::build(variant, seq).unwrap();
        write_seed(&dir, name, &idx.to_bytes().unwrap());
    }

    let dir = corpus.join("hashwt_decode");
    let empty = HashedWaveletTree::new(1 << 20, 3).unwrap();
    write_seed(&dir, "empty", &empty.to_bytes().unwrap());
    let mut h = HashedWaveletTree::new(1 << 20, 3).unwrap();
    for _ in 0..50 {
        h.append(splitmix64(&mut st) % (1 << 20)).unwrap();
    }
    write_seed(&dir, "values-50", &h.to_bytes().unwrap());

    let dir = corpus.join("static_fid_decode");
    write_seed(&dir, "demo-root", &StaticFID::build(&"0010101".parse().unwrap()).to_bytes());
    let mut bits = BitString::new();
    for _ in 0..1000 {
        bits.push(splitmix64(&mut st) % 10 == 0);
    }
    write_seed(&dir, "sparse-1000", &StaticFID::build(&bits).to_bytes());

    let dir = corpus.join("append_fid_decode");
    let mut fid = wavelet_trie::abv::AppendFID::new();
    for _ in 0..5000 {
        fid.append(splitmix64(&mut st) & 1 == 1);
    }
    fid.quiesce();
    write_seed(&dir, "random-5000", &fid.to_bytes().unwrap());
    let mut short = wavelet_trie::abv::AppendFID::new();
    for b in [true, false, true] {
        short.append(b);
    }
    short.quiesce();
    write_seed(&dir, "short-3", &short.to_bytes().unwrap());

    let dir = corpus.join("bitstring_decode");
    write_seed(&dir, "demo-root", &"0010101".parse::<BitString>().unwrap().to_bytes());
    write_seed(&dir, "empty", &BitString::new().to_bytes());
    let mut long = BitString::new();
    for _ in 0..200 {
        long.push(splitmix64(&mut st) & 1 == 1);
    }
    write_seed(&dir, "random-200", &long.to_bytes());

    let dir = corpus.join("bitstring_text");
    write_seed(&dir, "demo-root", b"0010101");
    write_seed(&dir, "ones-64", &[b'1'; 64]);

    let dir = corpus.join("gamma_stream");
    let mut stream = BitString::new();
    for v in (1u64..=20).chain([31, 32, 1 << 16, u64::MAX >> 1]) {
        gamma_append(&mut stream, v).unwrap();
    }
    write_seed(&dir, "values", &pack(&stream));

    let dir = corpus.join("debinarize_bits");
    write_seed(&dir, "demo", &pack(&binarize(b"demo")));
    write_seed(&dir, "empty", &pack(&binarize(b"")));
    write_seed(&dir, "url", &pack(&binarize(b"https://host00.example.com/p0")));
}
