//! End-to-end tests of the `wt` binary: build/append/query/stats/selfcheck
//! over real files, exit codes, escaping, and both input framings.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};

static DIRS: AtomicUsize = AtomicUsize::new(0);

fn workdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "wt-cli-test-{}-{}",
        std::process::id(),
        DIRS.fetch_add(1, Ordering::Relaxed)
    ));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn wt(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_wt"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn ok_stdout(args: &[&str]) -> String {
    let out = wt(args, b"");
    assert!(
        out.status.success(),
        "wt {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    wt(args, b"").status.code().unwrap()
}

const DEMO: &str = "0001\n0011\n0100\n00100\n0100\n00100\n0100\n";

fn build_demo(dir: &Path, variant: &str) -> String {
    let input = dir.join("demo.log");
    fs::write(&input, DEMO).unwrap();
    let index = dir.join(format!("demo-{variant}.wti"));
    ok_stdout(&[
        "build",
        "--index",
        index.to_str().unwrap(),
        "--variant",
        variant,
        input.to_str().unwrap(),
    ]);
    index.to_str().unwrap().to_string()
}

#[test]
fn build_then_query_answers_match_hand_scans() {
    let dir = workdir();
    let index = build_demo(&dir, "static");
    let q = |rest: &[&str]| {
        let mut args = vec!["query", "--index", &index];
        args.extend_from_slice(rest);
        ok_stdout(&args)
    };
    assert_eq!(q(&["access", "--pos", "0"]), "0001\n");
    assert_eq!(q(&["access", "--pos", "6"]), "0100\n");
    assert_eq!(q(&["rank", "--string", "0100", "--pos", "7"]), "3\n");
    assert_eq!(q(&["rank", "--string", "0101", "--pos", "7"]), "0\n");
    assert_eq!(q(&["select", "--string", "00100", "--idx", "1"]), "5\n");
    assert_eq!(q(&["rank-prefix", "--prefix", "00", "--pos", "7"]), "4\n");
    assert_eq!(q(&["rank-prefix", "--prefix", "00", "--pos", "2"]), "2\n");
    assert_eq!(q(&["select-prefix", "--prefix", "00", "--idx", "2"]), "3\n");
    assert_eq!(q(&["majority", "--from", "2", "--to", "7"]), "0100\n");
    assert_eq!(q(&["majority", "--from", "0", "--to", "4"]), "");
    assert_eq!(
        q(&["distinct"]),
        "0001\t1\n00100\t2\n0011\t1\n0100\t3\n"
    );
    assert_eq!(
        q(&["threshold", "--min-count", "2"]),
        "0100\t3\n00100\t2\n"
    );
}

#[test]
fn rebuilds_are_byte_identical() {
    let dir = workdir();
    let a = build_demo(&dir, "static");
    let b_path = dir.join("again.wti");
    let input = dir.join("demo.log");
    ok_stdout(&[
        "build",
        "--index",
        b_path.to_str().unwrap(),
        input.to_str().unwrap(),
    ]);
    assert_eq!(fs::read(a).unwrap(), fs::read(&b_path).unwrap());
}

#[test]
fn append_then_query_equals_one_shot_build() {
    let dir = workdir();
    let head = dir.join("head.log");
    let tail = dir.join("tail.log");
    let lines: Vec<&str> = DEMO.trim_end().split('\n').collect();
    fs::write(&head, lines[..4].join("\n")).unwrap();
    fs::write(&tail, lines[4..].join("\n")).unwrap();
    let grown = dir.join("grown.wti");
    ok_stdout(&[
        "build",
        "--index",
        grown.to_str().unwrap(),
        "--variant",
        "append",
        head.to_str().unwrap(),
    ]);
    ok_stdout(&[
        "append",
        "--index",
        grown.to_str().unwrap(),
        tail.to_str().unwrap(),
    ]);
    let oneshot = build_demo(&dir, "append");
    assert_eq!(
        fs::read(&grown).unwrap(),
        fs::read(&oneshot).unwrap(),
        "append path and one-shot build must serialize identically"
    );
    assert_eq!(
        ok_stdout(&["query", "--index", grown.to_str().unwrap(), "rank", "--string", "0100", "--pos", "7"]),
        "3\n"
    );
    ok_stdout(&["selfcheck", "--index", grown.to_str().unwrap()]);
}

#[test]
fn dynamic_variant_supports_append_too() {
    let dir = workdir();
    let index = build_demo(&dir, "dynamic");
    let extra = dir.join("extra.log");
    fs::write(&extra, "0001\n").unwrap();
    ok_stdout(&["append", "--index", &index, extra.to_str().unwrap()]);
    assert_eq!(
        ok_stdout(&["query", "--index", &index, "rank", "--string", "0001", "--pos", "8"]),
        "2\n"
    );
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    let dir = workdir();
    let index = build_demo(&dir, "static");
    // Range and missing-occurrence problems: 2.
    assert_eq!(code(&["query", "--index", &index, "access", "--pos", "7"]), 2);
    assert_eq!(
        code(&["query", "--index", &index, "select", "--string", "0100", "--idx", "3"]),
        2
    );
    // Appending to a static index: 4.
    let extra = dir.join("x.log");
    fs::write(&extra, "0001\n").unwrap();
    assert_eq!(code(&["append", "--index", &index, extra.to_str().unwrap()]), 4);
    // Corrupt index file: 3.
    let bad = dir.join("bad.wti");
    let mut bytes = fs::read(&index).unwrap();
    bytes.truncate(bytes.len() - 5);
    fs::write(&bad, &bytes).unwrap();
    assert_eq!(code(&["stats", "--index", bad.to_str().unwrap()]), 3);
    let mut bytes = fs::read(&index).unwrap();
    bytes[0] ^= 1;
    fs::write(&bad, &bytes).unwrap();
    assert_eq!(code(&["query", "--index", bad.to_str().unwrap(), "access", "--pos", "0"]), 3);
    // Everything else: 1.
    assert_eq!(code(&["stats", "--index", dir.join("absent.wti").to_str().unwrap()]), 1);
    assert_eq!(
        code(&["query", "--index", &index, "threshold", "--min-count", "0"]),
        1
    );
}

#[test]
fn empty_input_builds_an_empty_index() {
    let dir = workdir();
    let index = dir.join("empty.wti");
    let out = wt(&["build", "--index", index.to_str().unwrap()], b"");
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("n: 0"), "summary was: {text}");
    let stats = ok_stdout(&["stats", "--index", index.to_str().unwrap()]);
    assert!(stats.contains("n: 0"));
    assert!(stats.contains("entropy bits: 0"));
    assert_eq!(code(&["query", "--index", index.to_str().unwrap(), "access", "--pos", "0"]), 2);
    ok_stdout(&["selfcheck", "--index", index.to_str().unwrap()]);
}

#[test]
fn reads_stdin_when_no_input_file_is_given() {
    let dir = workdir();
    let index = dir.join("stdin.wti");
    let out = wt(&["build", "--index", index.to_str().unwrap()], DEMO.as_bytes());
    assert!(out.status.success());
    assert_eq!(
        ok_stdout(&["query", "--index", index.to_str().unwrap(), "access", "--pos", "3"]),
        "00100\n"
    );
}

#[test]
fn length_prefixed_mode_carries_binary_records() {
    let dir = workdir();
    let mut raw = Vec::new();
    let records: [&[u8]; 4] = [b"plain", b"with\nnewline", b"\x00\x01\xff", b""];
    for rec in records {
        raw.extend_from_slice(&(rec.len() as u32).to_le_bytes());
        raw.extend_from_slice(rec);
    }
    let input = dir.join("bin.log");
    fs::write(&input, &raw).unwrap();
    let index = dir.join("bin.wti");
    ok_stdout(&[
        "build",
        "--index",
        index.to_str().unwrap(),
        "--length-prefixed",
        input.to_str().unwrap(),
    ]);
    let q = |rest: &[&str]| {
        let mut args = vec!["query", "--index", index.to_str().unwrap()];
        args.extend_from_slice(rest);
        ok_stdout(&args)
    };
    assert_eq!(q(&["access", "--pos", "0"]), "plain\n");
    assert_eq!(q(&["access", "--pos", "1"]), "with\\x0anewline\n");
    assert_eq!(q(&["access", "--pos", "2"]), "\\x00\\x01\\xff\n");
    assert_eq!(q(&["access", "--pos", "3"]), "\n");
    // Escaped arguments round-trip back through rank.
    assert_eq!(q(&["rank", "--string", "\\x00\\x01\\xff", "--pos", "4"]), "1\n");
    assert_eq!(q(&["rank", "--string", "with\\x0anewline", "--pos", "4"]), "1\n");
}

#[test]
fn stats_reports_parse_and_respect_the_floor() {
    let dir = workdir();
    let index = build_demo(&dir, "static");
    let stats = ok_stdout(&["stats", "--index", &index]);
    let field = |name: &str| -> f64 {
        stats
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{name}: ")))
            .unwrap_or_else(|| panic!("missing field {name} in:\n{stats}"))
            .parse()
            .unwrap()
    };
    let n = field("n");
    let h0 = field("entropy bits") / n;
    assert!(h0 <= field("avg height") + 1e-9);
    assert!(field("avg height") <= field("mean string bits") + 1e-9);
    assert!(field("total bits") >= field("lb bits"));
    assert_eq!(field("n") as usize, 7);
    assert_eq!(field("distinct") as usize, 4);
}

#[test]
fn selfcheck_accepts_any_index_built_here() {
    let dir = workdir();
    for variant in ["static", "append", "dynamic"] {
        let index = build_demo(&dir, variant);
        let out = ok_stdout(&["selfcheck", "--index", &index, "--samples", "500", "--seed", "7"]);
        assert!(out.contains("pass"), "got: {out}");
    }
}
