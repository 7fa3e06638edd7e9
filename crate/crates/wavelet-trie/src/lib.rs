//! Compressed indexed sequences of binary strings.
//!
//! The centerpiece is the [`wtrie::WaveletTrie`]: a Patricia trie whose
//! internal nodes each carry a bitvector routing sequence positions to the
//! two subtries. It answers positional queries (`access`, `rank`, `select`,
//! and their prefix forms) over a sequence of strings in compressed space,
//! and comes in three flavors depending on the node bitvector used:
//!
//! * static ([`rrr::StaticFID`]): build once, query forever;
//! * append-only ([`abv::AppendFID`]): grow at the end with a constant
//!   per-append work budget;
//! * fully dynamic ([`dbv::DynamicFID`]): insert and delete anywhere.
//!
//! Supporting modules are usable on their own: [`bits`] has the raw bit
//! buffers and codecs everything else is made of, [`ptrie`] is a plain
//! dynamic Patricia trie, [`hashwt`] wraps the dynamic trie into a
//! probabilistically balanced wavelet tree over integers, and [`oracle`]
//! holds the brute-force reference implementations the tests (and the CLI
//! self-check) compare against.

pub mod abv;
pub mod bits;
pub mod dbv;
pub mod error;
pub mod hashwt;
pub mod oracle;
pub mod ptrie;
pub mod rrr;
pub mod wtrie;

pub(crate) mod wire;

pub use error::{Error, Result};
