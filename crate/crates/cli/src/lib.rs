//! Command-line driver for `seqindex-core`.
//!
//! [`Cli`] is the clap surface, [`RunConfig`] the validated configuration and
//! [`run`] executes one command, writing records to the report sink and
//! diagnostics to the error stream. The return value is the process exit code.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Parser, ValueEnum};
use seqindex_core::harness::HighIndexEntry;
use seqindex_core::residue::gcd;
use seqindex_core::{
    apply_unit, content, enumerate_minimal, find_witness, index, is_minimal_zero_sum, is_zero_sum,
    orbit_canonical, reduce_by_content, search_high_index, to_normal_form, verify_conjecture,
    GroupOrder, NormalizationOutcome, Sequence, Trail, VerificationReport, VerifyOptions,
    WitnessOutcome,
};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_HIGH_INDEX: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INTERRUPTED: i32 = 3;

pub const CSV_HEADER: &str = "n,k,orbits,sequences_total,orbits_total,high_index_count,complete";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Exact index and smallest minimizing unit of one sequence.
    Index,
    /// Whether one sequence is a minimal zero-sum sequence.
    Minimal,
    /// List minimal zero-sum sequences of length k.
    Enumerate,
    /// Certificate that a length-4 minimal zero-sum sequence has index one.
    Witness,
    /// Content reduction and normal form of one sequence.
    Reduce,
    /// Sweep every minimal zero-sum sequence of length k for each modulus.
    Verify,
    /// List sequences of index at least two.
    Search,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "seqindex",
    version,
    about = "Index of sequences over finite cyclic groups"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Modulus.
    #[arg(long, conflicts_with = "n_range")]
    pub n: Option<u64>,
    /// Inclusive modulus range LO:HI.
    #[arg(long, value_name = "LO:HI")]
    pub n_range: Option<String>,
    /// Keep only moduli of the range coprime to this value (verify defaults to 6).
    #[arg(long, value_name = "D", conflicts_with = "all")]
    pub coprime_to: Option<u64>,
    /// Keep every modulus of the range.
    #[arg(long)]
    pub all: bool,
    /// Comma-separated terms in [1, n]; n denotes zero.
    #[arg(long, value_delimiter = ',')]
    pub terms: Option<Vec<u64>>,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// One representative per unit orbit.
    #[arg(long)]
    pub orbits: bool,
    /// Worker threads for verify.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Write records here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Append-only record of finished blocks; resumes a verify sweep.
    #[arg(long, value_name = "PATH")]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    pub format: Format,
    /// Stop verify after this many new blocks per modulus.
    #[arg(long)]
    pub max_blocks: Option<usize>,
    /// Log progress to the error stream (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

/// A validated invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    /// Ascending, already filtered.
    pub moduli: Vec<u64>,
    pub terms: Option<Vec<u64>>,
    pub k: usize,
    pub orbits: bool,
    pub jobs: usize,
    pub report_path: Option<PathBuf>,
    pub checkpoint_path: Option<PathBuf>,
    pub format: Format,
    pub max_blocks: Option<usize>,
}

fn parse_range(text: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("range `{text}` is not of the form LO:HI"))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| format!("range bound `{s}` is not an integer"))
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

impl TryFrom<&Cli> for RunConfig {
    type Error = String;

    fn try_from(cli: &Cli) -> Result<Self, String> {
        let single = matches!(
            cli.command,
            Command::Index | Command::Minimal | Command::Witness | Command::Reduce
        );
        let moduli: Vec<u64> = match (cli.n, &cli.n_range) {
            (Some(n), None) => vec![n],
            (None, Some(range)) => {
                if single {
                    return Err("this command takes a single --n".into());
                }
                let (lo, hi) = parse_range(range)?;
                let filter = match (cli.coprime_to, cli.all, cli.command) {
                    (Some(d), _, _) => Some(d),
                    (None, false, Command::Verify) => Some(6),
                    _ => None,
                };
                (lo..=hi)
                    .filter(|&n| filter.is_none_or(|d| gcd(n, d) == 1))
                    .collect()
            }
            _ => return Err("exactly one of --n or --n-range is required".into()),
        };
        if let Some(&n) = moduli.iter().find(|&&n| n < 2) {
            return Err(format!("modulus {n} is below 2"));
        }
        if let Some(&n) = moduli.iter().find(|&&n| GroupOrder::new(n).is_err()) {
            return Err(format!("modulus {n} is out of range"));
        }
        if single {
            let terms = cli.terms.as_ref().ok_or("--terms is required")?;
            if terms.is_empty() {
                return Err("--terms is empty".into());
            }
            let n = moduli[0];
            if let Some(t) = terms.iter().find(|&&t| t == 0 || t > n) {
                return Err(format!("term {t} is outside [1, {n}]"));
            }
        } else if cli.terms.is_some() {
            return Err("--terms is not accepted by this command".into());
        }
        if cli.jobs == 0 {
            return Err("--jobs must be at least 1".into());
        }
        if cli.k == 0 {
            return Err("--k must be at least 1".into());
        }
        Ok(Self {
            command: cli.command,
            moduli,
            terms: cli.terms.clone(),
            k: cli.k,
            orbits: cli.orbits,
            jobs: cli.jobs,
            report_path: cli.report.clone(),
            checkpoint_path: cli.checkpoint.clone(),
            format: cli.format,
            max_blocks: cli.max_blocks,
        })
    }
}

/// One line of a verify report.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyRecord {
    pub n: u64,
    pub k: usize,
    pub orbits: bool,
    pub sequences_total: u64,
    pub orbits_total: u64,
    pub rule_histogram: std::collections::BTreeMap<String, u64>,
    pub high_index: Vec<HighIndexEntry>,
    pub elapsed_ms: u64,
    pub complete: bool,
}

impl From<&VerificationReport> for VerifyRecord {
    fn from(r: &VerificationReport) -> Self {
        Self {
            n: r.n,
            k: r.k,
            orbits: r.orbits,
            sequences_total: r.sequences_total,
            orbits_total: r.orbits_total,
            rule_histogram: r.rule_histogram.clone(),
            high_index: r.high_index.clone(),
            elapsed_ms: r.elapsed.as_millis() as u64,
            complete: r.complete,
        }
    }
}

impl VerifyRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n,
            self.k,
            self.orbits,
            self.sequences_total,
            self.orbits_total,
            self.high_index.len(),
            self.complete
        )
    }
}

/// One line of a witness report.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessRecord {
    pub n: u64,
    pub terms: Vec<u64>,
    pub index: u64,
    /// `null` when the index exceeds one.
    pub witness_m: Option<u64>,
    pub rule: String,
    pub trail: Trail,
}

#[derive(Serialize)]
struct IndexRecord {
    n: u64,
    terms: Vec<u64>,
    /// Exact value, `p` or `p/q`.
    index: String,
    argmin_unit: u64,
}

#[derive(Serialize)]
struct MinimalRecord {
    n: u64,
    terms: Vec<u64>,
    zero_sum: bool,
    minimal: bool,
}

#[derive(Serialize)]
struct SequenceRecord {
    n: u64,
    k: usize,
    terms: Vec<u64>,
}

#[derive(Serialize)]
struct SearchRecord {
    n: u64,
    k: usize,
    terms: Vec<u64>,
    index: u64,
    orbit_rep: Vec<u64>,
}

#[derive(Serialize)]
struct ReduceRecord {
    n: u64,
    terms: Vec<u64>,
    content: u64,
    reduced_n: u64,
    reduced_terms: Vec<u64>,
    /// `[e, a, b, c]`, absent when a witness settled the sequence first.
    normal_form: Option<[u64; 4]>,
    represented: Option<[u64; 4]>,
    trail: Option<Trail>,
    witness_m: Option<u64>,
    rule: Option<String>,
}

fn joined(terms: &[u64]) -> String {
    terms
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

struct Sink<'a> {
    out: Box<dyn Write + 'a>,
    format: Format,
    header_written: bool,
}

impl<'a> Sink<'a> {
    fn jsonl<T: Serialize>(&mut self, record: &T) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }

    fn csv(&mut self, header: &str, row: &str) -> io::Result<()> {
        if !self.header_written {
            writeln!(self.out, "{header}")?;
            self.header_written = true;
        }
        writeln!(self.out, "{row}")?;
        self.out.flush()
    }

    fn emit<T: Serialize>(
        &mut self,
        record: &T,
        header: &str,
        row: impl FnOnce() -> String,
    ) -> io::Result<()> {
        match self.format {
            Format::Jsonl => self.jsonl(record),
            Format::Csv => self.csv(header, &row()),
        }
    }
}

enum Failure {
    Invalid(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<seqindex_core::Error> for Failure {
    fn from(e: seqindex_core::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

/// Executes `config`, writing records to the report file (or `out`) and
/// diagnostics to `err`. Returns the exit code.
pub fn run(
    config: &RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
    cancel: &Arc<AtomicBool>,
) -> i32 {
    let target: Box<dyn Write> = match &config.report_path {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                let _ = writeln!(err, "error: cannot create {}: {e}", path.display());
                return EXIT_INVALID;
            }
        },
        None => Box::new(out),
    };
    let mut sink = Sink {
        out: target,
        format: config.format,
        header_written: false,
    };
    match dispatch(config, &mut sink, cancel) {
        Ok(code) => code,
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INVALID
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn single_sequence(config: &RunConfig) -> Result<Sequence, Failure> {
    let terms = config.terms.as_deref().unwrap_or_default();
    Ok(Sequence::from_terms(config.moduli[0], terms)?)
}

fn dispatch(
    config: &RunConfig,
    sink: &mut Sink<'_>,
    cancel: &Arc<AtomicBool>,
) -> Result<i32, Failure> {
    match config.command {
        Command::Index => {
            let s = single_sequence(config)?;
            let v = index(&s);
            let value = v.value();
            let record = IndexRecord {
                n: s.n(),
                terms: s.terms().to_vec(),
                index: value.to_string(),
                argmin_unit: v.argmin_unit,
            };
            sink.emit(&record, "n,terms,index,argmin_unit", || {
                format!(
                    "{},{},{},{}",
                    record.n,
                    joined(&record.terms),
                    record.index,
                    record.argmin_unit
                )
            })?;
            Ok(EXIT_OK)
        }
        Command::Minimal => {
            let s = single_sequence(config)?;
            let record = MinimalRecord {
                n: s.n(),
                terms: s.terms().to_vec(),
                zero_sum: is_zero_sum(&s),
                minimal: is_minimal_zero_sum(&s),
            };
            sink.emit(&record, "n,terms,zero_sum,minimal", || {
                format!(
                    "{},{},{},{}",
                    record.n,
                    joined(&record.terms),
                    record.zero_sum,
                    record.minimal
                )
            })?;
            Ok(EXIT_OK)
        }
        Command::Witness => {
            let s = single_sequence(config)?;
            let record = witness_record(&s)?;
            sink.emit(&record, "n,terms,index,witness_m,rule", || {
                format!(
                    "{},{},{},{},{}",
                    record.n,
                    joined(&record.terms),
                    record.index,
                    record.witness_m.map_or(String::new(), |m| m.to_string()),
                    record.rule
                )
            })?;
            Ok(EXIT_OK)
        }
        Command::Reduce => {
            let s = single_sequence(config)?;
            let record = reduce_record(&s)?;
            sink.emit(
                &record,
                "n,terms,content,reduced_n,reduced_terms,normal_form,witness_m",
                || {
                    format!(
                        "{},{},{},{},{},{},{}",
                        record.n,
                        joined(&record.terms),
                        record.content,
                        record.reduced_n,
                        joined(&record.reduced_terms),
                        record.normal_form.map_or(String::new(), |f| joined(&f)),
                        record.witness_m.map_or(String::new(), |m| m.to_string()),
                    )
                },
            )?;
            Ok(EXIT_OK)
        }
        Command::Enumerate => {
            for &n in &config.moduli {
                let order = Arc::new(GroupOrder::new(n)?);
                for s in enumerate_minimal(&order, config.k) {
                    if cancel.load(Ordering::Relaxed) {
                        return Ok(EXIT_INTERRUPTED);
                    }
                    if config.orbits && orbit_canonical(&s).terms() != s.terms() {
                        continue;
                    }
                    let record = SequenceRecord {
                        n,
                        k: config.k,
                        terms: s.terms().to_vec(),
                    };
                    sink.emit(&record, "n,k,terms", || {
                        format!("{},{},{}", n, config.k, joined(&record.terms))
                    })?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Search => {
            let mut code = EXIT_OK;
            for &n in &config.moduli {
                if cancel.load(Ordering::Relaxed) {
                    return Ok(EXIT_INTERRUPTED);
                }
                let order = Arc::new(GroupOrder::new(n)?);
                let reps = search_high_index(&order, config.k);
                if !reps.is_empty() && config.k == 4 && gcd(n, 6) == 1 {
                    code = EXIT_HIGH_INDEX;
                }
                for (rep, idx) in reps {
                    let members: BTreeSet<Vec<u64>> = if config.orbits {
                        BTreeSet::from([rep.terms().to_vec()])
                    } else {
                        order
                            .units()
                            .map(|m| apply_unit(&rep, m).map(|t| t.terms().to_vec()))
                            .collect::<Result<_, _>>()?
                    };
                    for terms in members {
                        let record = SearchRecord {
                            n,
                            k: config.k,
                            terms,
                            index: idx,
                            orbit_rep: rep.terms().to_vec(),
                        };
                        sink.emit(&record, "n,k,terms,index,orbit_rep", || {
                            format!(
                                "{},{},{},{},{}",
                                n,
                                config.k,
                                joined(&record.terms),
                                idx,
                                joined(&record.orbit_rep)
                            )
                        })?;
                    }
                }
            }
            Ok(code)
        }
        Command::Verify => {
            let mut code = EXIT_OK;
            for &n in &config.moduli {
                let order = Arc::new(GroupOrder::new(n)?);
                let opts = VerifyOptions {
                    k: config.k,
                    orbits: config.orbits,
                    jobs: config.jobs,
                    checkpoint: config.checkpoint_path.clone(),
                    max_blocks: config.max_blocks,
                    cancel: Some(cancel.clone()),
                };
                let report = verify_conjecture(&order, &opts)?;
                let record = VerifyRecord::from(&report);
                sink.emit(&record, CSV_HEADER, || record.csv_row())?;
                if report.violates_conjecture() {
                    code = EXIT_HIGH_INDEX;
                }
                if !report.complete {
                    return Ok(EXIT_INTERRUPTED);
                }
            }
            Ok(code)
        }
    }
}

/// Runs the witness pipeline on `s` and flattens the outcome.
pub fn witness_record(s: &Sequence) -> Result<WitnessRecord, seqindex_core::Error> {
    let outcome = find_witness(s)?;
    let (witness_m, rule, trail) = match &outcome {
        WitnessOutcome::Found(cert) => (
            Some(cert.witness.m()),
            cert.witness.rule().to_string(),
            cert.trail.clone(),
        ),
        WitnessOutcome::HighIndex(_) => (None, "HIGH_INDEX".to_string(), Trail::default()),
    };
    Ok(WitnessRecord {
        n: s.n(),
        terms: s.terms().to_vec(),
        index: outcome.index(),
        witness_m,
        rule,
        trail,
    })
}

fn reduce_record(s: &Sequence) -> Result<ReduceRecord, Failure> {
    if !is_minimal_zero_sum(s) {
        return Err(Failure::Invalid(format!(
            "{s} is not a minimal zero-sum sequence"
        )));
    }
    let u = content(s);
    let reduced = if u > 1 {
        reduce_by_content(s)?
    } else {
        s.clone()
    };
    let mut record = ReduceRecord {
        n: s.n(),
        terms: s.terms().to_vec(),
        content: u,
        reduced_n: reduced.n(),
        reduced_terms: reduced.terms().to_vec(),
        normal_form: None,
        represented: None,
        trail: None,
        witness_m: None,
        rule: None,
    };
    match to_normal_form(&reduced)? {
        NormalizationOutcome::Witness(w) => {
            record.witness_m = Some(w.m());
            record.rule = Some(w.rule().to_string());
        }
        NormalizationOutcome::Form { form, trail } => {
            record.normal_form = Some([form.e, form.a, form.b, form.c]);
            record.represented = Some(form.represented_terms());
            record.trail = Some(trail);
        }
    }
    Ok(record)
}
