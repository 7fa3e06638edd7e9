//! `wt`: build, update, query, and profile string-sequence indexes over
//! newline-delimited logs.
//!
//! Exit codes: 0 success, 2 out-of-range arguments, 3 corrupt index file,
//! 4 operation unsupported by the index variant, 1 anything else.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use wavelet_trie::bits::{binarize, debinarize, BitString};
use wavelet_trie::oracle::VectorOracle;
use wavelet_trie::wtrie::{AnyIndex, Variant};
use wavelet_trie::Error as LibError;

#[derive(Parser)]
#[command(
    name = "wt",
    version,
    about = "Compressed prefix-searchable indexes over string logs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Static,
    Append,
    Dynamic,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Static => Variant::Static,
            VariantArg::Append => Variant::Append,
            VariantArg::Dynamic => Variant::Dynamic,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an index from a log and write it atomically.
    Build {
        /// Index file to create.
        #[arg(long)]
        index: PathBuf,
        #[arg(long, value_enum, default_value = "static")]
        variant: VariantArg,
        /// Input framed as u32 little-endian length + bytes instead of lines.
        #[arg(long)]
        length_prefixed: bool,
        /// Input file; standard input when omitted.
        input: Option<PathBuf>,
    },
    /// Append a log to an existing append or dynamic index.
    Append {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        length_prefixed: bool,
        input: Option<PathBuf>,
    },
    /// Run one query against an index.
    Query {
        #[arg(long)]
        index: PathBuf,
        #[command(subcommand)]
        op: QueryOp,
    },
    /// Print the space report: entropy, lower bounds, measured bits.
    Stats {
        #[arg(long)]
        index: PathBuf,
    },
    /// Differential test of the index against a brute-force oracle.
    Selfcheck {
        #[arg(long)]
        index: PathBuf,
        /// Randomized probes to run.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum QueryOp {
    /// The string at a position.
    Access {
        #[arg(long)]
        pos: usize,
    },
    /// Occurrences of a string before a position.
    Rank {
        #[arg(long)]
        string: String,
        #[arg(long)]
        pos: usize,
    },
    /// Position of the idx-th (0-based) occurrence of a string.
    Select {
        #[arg(long)]
        string: String,
        #[arg(long)]
        idx: usize,
    },
    /// Occurrences of strings starting with a prefix before a position.
    RankPrefix {
        #[arg(long)]
        prefix: String,
        #[arg(long)]
        pos: usize,
    },
    /// Position of the idx-th occurrence of any string with the prefix.
    SelectPrefix {
        #[arg(long)]
        prefix: String,
        #[arg(long)]
        idx: usize,
    },
    /// Distinct strings in [from, to) with counts, in string order.
    Distinct {
        #[arg(long)]
        from: Option<usize>,
        #[arg(long)]
        to: Option<usize>,
    },
    /// The strict majority string of [from, to), if one exists.
    Majority {
        #[arg(long)]
        from: Option<usize>,
        #[arg(long)]
        to: Option<usize>,
    },
    /// Strings occurring at least min-count times in [from, to).
    Threshold {
        #[arg(long)]
        from: Option<usize>,
        #[arg(long)]
        to: Option<usize>,
        #[arg(long)]
        min_count: usize,
    },
}

enum Failure {
    Lib(LibError),
    Io(String, std::io::Error),
    Other(String),
    /// Standard output was closed by the consumer; stop quietly.
    Pipe,
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(e) => match e {
                LibError::Range { .. } | LibError::NotFound { .. } | LibError::Absent => 2,
                LibError::Decode(_) => 3,
                LibError::VariantMismatch { .. } => 4,
                _ => 1,
            },
            Failure::Pipe => 0,
            _ => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(what, e) => write!(f, "{what}: {e}"),
            Failure::Other(msg) => f.write_str(msg),
            Failure::Pipe => Ok(()),
        }
    }
}

impl From<LibError> for Failure {
    fn from(e: LibError) -> Failure {
        Failure::Lib(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not failures.
            let ok = e.use_stderr();
            let _ = e.print();
            return if ok { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) | Err(Failure::Pipe) => ExitCode::SUCCESS,
        Err(fail) => {
            eprintln!("wt: {fail}");
            ExitCode::from(fail.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Build {
            index,
            variant,
            length_prefixed,
            input,
        } => {
            let seq = read_strings(input.as_deref(), length_prefixed)?;
            let idx = AnyIndex::build(variant.into(), &seq)?;
            let bytes = save(&index, idx)?;
            let rep = loaded(&index)?.space_report();
            say(format_args!("n: {}", rep.n))?;
            say(format_args!("distinct: {}", rep.distinct))?;
            say(format_args!("avg height: {}", rep.avg_height))?;
            say(format_args!("bytes: {bytes}"))?;
            Ok(())
        }
        Cmd::Append {
            index,
            length_prefixed,
            input,
        } => {
            let seq = read_strings(input.as_deref(), length_prefixed)?;
            let mut idx = loaded(&index)?;
            for s in &seq {
                idx.append(s)?;
            }
            let bytes = save(&index, idx)?;
            say(format_args!("appended: {}", seq.len()))?;
            say(format_args!("bytes: {bytes}"))?;
            Ok(())
        }
        Cmd::Query { index, op } => query(&loaded(&index)?, op),
        Cmd::Stats { index } => {
            let idx = loaded(&index)?;
            say(format_args!("variant: {}", idx.variant()))?;
            say(format_args!("{}", idx.space_report()))?;
            Ok(())
        }
        Cmd::Selfcheck {
            index,
            samples,
            seed,
        } => selfcheck(&loaded(&index)?, samples, seed),
    }
}

fn query(idx: &AnyIndex, op: QueryOp) -> Result<(), Failure> {
    let bounds = |from: Option<usize>, to: Option<usize>| (from.unwrap_or(0), to.unwrap_or(idx.len()));
    match op {
        QueryOp::Access { pos } => {
            say(format_args!("{}", render(&idx.access(pos)?)?))?;
        }
        QueryOp::Rank { string, pos } => {
            say(format_args!("{}", idx.rank(&parse_string(&string)?, pos)?))?;
        }
        QueryOp::Select { string, idx: i } => {
            say(format_args!("{}", idx.select(&parse_string(&string)?, i)?))?;
        }
        QueryOp::RankPrefix { prefix, pos } => {
            say(format_args!("{}", idx.rank_prefix(&parse_prefix(&prefix)?, pos)?))?;
        }
        QueryOp::SelectPrefix { prefix, idx: i } => {
            say(format_args!("{}", idx.select_prefix(&parse_prefix(&prefix)?, i)?))?;
        }
        QueryOp::Distinct { from, to } => {
            let (l, r) = bounds(from, to);
            for (s, count) in idx.range_distinct(l, r)? {
                say(format_args!("{}\t{}", render(&s)?, count))?;
            }
        }
        QueryOp::Majority { from, to } => {
            let (l, r) = bounds(from, to);
            if let Some(s) = idx.range_majority(l, r)? {
                say(format_args!("{}", render(&s)?))?;
            }
        }
        QueryOp::Threshold {
            from,
            to,
            min_count,
        } => {
            let (l, r) = bounds(from, to);
            for (s, count) in idx.range_threshold(l, r, min_count)? {
                say(format_args!("{}\t{}", render(&s)?, count))?;
            }
        }
    }
    Ok(())
}

fn selfcheck(idx: &AnyIndex, samples: usize, seed: u64) -> Result<(), Failure> {
    idx.check_invariants();
    let strings: Vec<BitString> = idx.iter_range(0, idx.len())?.collect();
    let oracle = VectorOracle::from_seq(strings.iter().cloned());
    let n = idx.len();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut checks = 0usize;
    let fail = |what: &str| -> Result<(), Failure> {
        Err(Failure::Other(format!("selfcheck: FAIL at {what}")))
    };
    for _ in 0..samples {
        if n == 0 {
            break;
        }
        checks += 1;
        match rng.gen_range(0..6) {
            0 => {
                let pos = rng.gen_range(0..n);
                if &idx.access(pos)? != oracle.access(pos) {
                    return fail("access");
                }
            }
            1 => {
                let s = &strings[rng.gen_range(0..n)];
                let pos = rng.gen_range(0..=n);
                if idx.rank(s, pos)? != oracle.rank(s, pos) {
                    return fail("rank");
                }
            }
            2 => {
                let s = &strings[rng.gen_range(0..n)];
                let count = oracle.rank(s, n);
                let i = rng.gen_range(0..count);
                if idx.select(s, i)? != oracle.select(s, i).expect("oracle has it") {
                    return fail("select");
                }
            }
            3 => {
                let s = &strings[rng.gen_range(0..n)];
                let p = s.slice(0, rng.gen_range(0..=s.len()));
                let pos = rng.gen_range(0..=n);
                if idx.rank_prefix(&p, pos)? != oracle.rank_prefix(&p, pos) {
                    return fail("rank-prefix");
                }
            }
            4 => {
                let a = rng.gen_range(0..=n);
                let b = rng.gen_range(0..=n);
                let (l, r) = (a.min(b), a.max(b));
                if idx.range_majority(l, r)? != oracle.majority(l, r) {
                    return fail("majority");
                }
            }
            _ => {
                let l = rng.gen_range(0..n);
                let r = (l + rng.gen_range(0..64)).min(n);
                let got = idx.range_distinct(l, r)?;
                let hist = oracle.histogram(l, r);
                if got.len() != hist.len()
                    || got.iter().any(|(s, c)| hist.get(s) != Some(c))
                {
                    return fail("distinct");
                }
            }
        }
    }
    say(format_args!("selfcheck: pass ({checks} checks, n = {n})"))?;
    Ok(())
}

/// Prints one result line; a consumer closing the pipe early (e.g. `head`)
/// is a quiet stop, not an error.
fn say(args: std::fmt::Arguments<'_>) -> Result<(), Failure> {
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{args}").map_err(|e| match e.kind() {
        std::io::ErrorKind::BrokenPipe => Failure::Pipe,
        _ => Failure::Io("writing standard output".into(), e),
    })
}

/// Reads the input log as binarized strings, from a file or standard input.
fn read_strings(path: Option<&Path>, length_prefixed: bool) -> Result<Vec<BitString>, Failure> {
    let data = match path {
        Some(p) => {
            fs::read(p).map_err(|e| Failure::Io(format!("reading {}", p.display()), e))?
        }
        None => {
            let mut buf = Vec::new();
            std::io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| Failure::Io("reading standard input".into(), e))?;
            buf
        }
    };
    let mut out = Vec::new();
    if length_prefixed {
        let mut at = 0usize;
        while at < data.len() {
            if data.len() - at < 4 {
                return Err(Failure::Other("truncated length prefix".into()));
            }
            let len = u32::from_le_bytes(data[at..at + 4].try_into().unwrap()) as usize;
            at += 4;
            if data.len() - at < len {
                return Err(Failure::Other(format!(
                    "record needs {len} bytes, {} left",
                    data.len() - at
                )));
            }
            out.push(binarize(&data[at..at + len]));
            at += len;
        }
    } else if !data.is_empty() {
        // One record per line; the final newline is optional.
        let rest = match data.last() {
            Some(b'\n') => &data[..data.len() - 1],
            _ => &data[..],
        };
        for line in rest.split(|&b| b == b'\n') {
            out.push(binarize(line));
        }
    }
    Ok(out)
}

fn loaded(path: &Path) -> Result<AnyIndex, Failure> {
    let data =
        fs::read(path).map_err(|e| Failure::Io(format!("reading {}", path.display()), e))?;
    Ok(AnyIndex::from_bytes(&data)?)
}

/// Serializes and writes via a temp file + rename so a crash cannot leave a
/// partial index; returns the byte count.
fn save(path: &Path, mut idx: AnyIndex) -> Result<usize, Failure> {
    idx.quiesce();
    let bytes = idx.to_bytes()?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = dir.unwrap_or(Path::new(".")).join(format!(
        ".{}.tmp{}",
        path.file_name().unwrap_or_default().to_string_lossy(),
        std::process::id()
    ));
    fs::write(&tmp, &bytes).map_err(|e| Failure::Io(format!("writing {}", tmp.display()), e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Failure::Io(format!("renaming into {}", path.display()), e)
    })?;
    Ok(bytes.len())
}

/// Unescapes `\xHH` sequences and binarizes; exact inverse of [`render`].
fn parse_string(arg: &str) -> Result<BitString, Failure> {
    Ok(binarize(&unescape(arg)?))
}

/// A byte-string prefix corresponds to the binarized bits of the prefix
/// minus the terminator bit, which only full strings carry.
fn parse_prefix(arg: &str) -> Result<BitString, Failure> {
    let full = binarize(&unescape(arg)?);
    Ok(full.slice(0, full.len() - 1))
}

fn render(s: &BitString) -> Result<String, Failure> {
    let bytes = debinarize(s).map_err(|_| {
        Failure::Lib(LibError::Decode(
            "stored string is not a binarized byte string".into(),
        ))
    })?;
    Ok(escape(&bytes))
}

/// Printable ASCII except backslash passes through; everything else,
/// backslash included, becomes `\xHH` so output lines are unambiguous.
fn escape(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len());
    for &b in bytes {
        if (0x20..=0x7e).contains(&b) && b != b'\\' {
            out.push(b as char);
        } else {
            out.push_str(&format!("\\x{b:02x}"));
        }
    }
    out
}

fn unescape(s: &str) -> Result<Vec<u8>, Failure> {
    let raw = s.as_bytes();
    let mut out = Vec::with_capacity(raw.len());
    let mut at = 0;
    while at < raw.len() {
        if raw[at] == b'\\' {
            let hex = raw
                .get(at + 1..at + 4)
                .filter(|h| h[0] == b'x')
                .ok_or_else(|| Failure::Other(format!("bad escape in argument: {s}")))?;
            let v = u8::from_str_radix(std::str::from_utf8(&hex[1..]).unwrap_or("zz"), 16)
                .map_err(|_| Failure::Other(format!("bad escape in argument: {s}")))?;
            out.push(v);
            at += 4;
        } else {
            out.push(raw[at]);
            at += 1;
        }
    }
    Ok(out)
}
