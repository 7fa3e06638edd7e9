//! Scaling curves for the three variants: doubling n and reporting per-op
//! latency so growth trends are visible. Numbers are for documentation, not
//! assertions; run with `--release` for meaningful figures.

use std::time::Instant;

use wavelet_trie::bits::{binarize, BitString};
use wavelet_trie::wtrie::{AppendIndex, DynamicIndex, StaticIndex};

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Synthetic URL-shaped corpus: heavy prefix sharing, skewed host histogram.
fn corpus(n: usize, st: &mut u64) -> Vec<BitString> {
    (0..n)
        .map(|_| {
            let host = (splitmix64(st) % 50).min(splitmix64(st) % 50);
            let section = splitmix64(st) % 40;
            let item = splitmix64(st) % 30;
            binarize(format!("https://host{host:02}.example.com/section{section}/item{item}").as_bytes())
        })
        .collect()
}

fn per_op_ns(total: std::time::Duration, ops: usize) -> f64 {
    total.as_nanos() as f64 / ops as f64
}

fn main() {
    let queries = 20_000usize;
    println!(
        "{:>8}  {:>10}  {:>11}  {:>9}  {:>11}  {:>11}  {:>11}  {:>9}",
        "n", "build(ms)", "access(ns)", "rank(ns)", "select(ns)", "append(ns)", "insert(ns)", "bits/str"
    );

    let mut prev_access = None;
    for exp in 13..=17u32 {
        let n = 1usize << exp;
        let mut st = 42u64;
        let seq = corpus(n, &mut st);

        let t0 = Instant::now();
        let idx = StaticIndex::build_static(&seq).unwrap();
        let build = t0.elapsed();

        let mut sink = 0usize;
        let t0 = Instant::now();
        for _ in 0..queries {
            let pos = (splitmix64(&mut st) % n as u64) as usize;
            sink ^= idx.access(pos).unwrap().len();
        }
        let access = per_op_ns(t0.elapsed(), queries);

        let t0 = Instant::now();
        for _ in 0..queries {
            let s = &seq[(splitmix64(&mut st) % n as u64) as usize];
            let pos = (splitmix64(&mut st) % (n as u64 + 1)) as usize;
            sink ^= idx.rank(s, pos).unwrap();
        }
        let rank = per_op_ns(t0.elapsed(), queries);

        let t0 = Instant::now();
        for _ in 0..queries {
            let s = &seq[(splitmix64(&mut st) % n as u64) as usize];
            sink ^= idx.select(s, 0).unwrap();
        }
        let select = per_op_ns(t0.elapsed(), queries);

        let t0 = Instant::now();
        let mut ap = AppendIndex::new();
        for s in &seq {
            ap.append(s).unwrap();
        }
        let append = per_op_ns(t0.elapsed(), n);

        let mut dy = DynamicIndex::from_seq(&seq).unwrap();
        let t0 = Instant::now();
        for k in 0..queries.min(n) {
            let pos = (splitmix64(&mut st) % (dy.len() as u64 + 1)) as usize;
            dy.insert(&seq[k % n], pos).unwrap();
        }
        let insert = per_op_ns(t0.elapsed(), queries.min(n));

        let report = idx.space_report();
        let growth = prev_access
            .map(|p: f64| format!("  access x{:.2} per doubling", access / p))
            .unwrap_or_default();
        prev_access = Some(access);
        println!(
            "{n:>8}  {:>10.1}  {access:>11.0}  {rank:>9.0}  {select:>11.0}  {append:>11.0}  {insert:>11.0}  {:>9.1}{growth}",
            build.as_secs_f64() * 1e3,
            report.total_bits as f64 / n as f64,
        );
        std::hint::black_box(sink);
    }
}
