//! Sweeps over every minimal zero-sum sequence of a given length and modulus.
//!
//! The sequence space is split into blocks by leading term `n_1`. Blocks are
//! independent, run in parallel, and are the unit of checkpointing: each
//! finished block appends one line `n k n1 <block-json>` to the checkpoint
//! file, so an interrupted sweep resumes without redoing finished blocks.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::residue::{gcd, GroupOrder};
use crate::sequence::{index_terms, is_minimal_terms, Sequence};
use crate::witness::{exhaustive_search, find_witness, verify_witness, WitnessOutcome};

/// Sorted `k`-multisets over `[1, n-1]` with leading term `first` that are
/// minimal zero-sum, in lexicographic order.
pub fn enumerate_block(n: u64, k: usize, first: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    if k == 0 || first == 0 || first >= n {
        return out;
    }
    let mut prefix = Vec::with_capacity(k);
    prefix.push(first);
    extend(n, k, &mut prefix, first % n, &mut out);
    out
}

fn extend(n: u64, k: usize, prefix: &mut Vec<u64>, residue: u64, out: &mut Vec<Vec<u64>>) {
    let last = *prefix.last().expect("prefix is nonempty");
    if prefix.len() + 1 == k {
        // The final term is forced: it must cancel the running residue.
        let t = (n - residue) % n;
        if t != 0 && t >= last {
            prefix.push(t);
            if is_minimal_terms(prefix, n) {
                out.push(prefix.clone());
            }
            prefix.pop();
        }
        return;
    }
    if prefix.len() == k {
        if residue == 0 && is_minimal_terms(prefix, n) {
            out.push(prefix.clone());
        }
        return;
    }
    for t in last..n {
        prefix.push(t);
        extend(n, k, prefix, (residue + t) % n, out);
        prefix.pop();
    }
}

/// Every minimal zero-sum sequence of length `k` with terms in `[1, n-1]`,
/// sorted ascending, in lexicographic order.
pub fn enumerate_minimal(n: &Arc<GroupOrder>, k: usize) -> impl Iterator<Item = Sequence> + '_ {
    let modulus = n.n();
    (1..modulus).flat_map(move |first| {
        enumerate_block(modulus, k, first)
            .into_iter()
            .map(move |terms| Sequence::from_sorted_unchecked(n.clone(), terms))
    })
}

/// The lexicographically smallest sorted image of `terms` under a unit.
pub fn canonical_terms(terms: &[u64], n: u64) -> Vec<u64> {
    let mut best = terms.to_vec();
    best.sort_unstable();
    let mut buf = vec![0; terms.len()];
    for m in 2..n {
        if gcd(m, n) != 1 {
            continue;
        }
        for (slot, &t) in buf.iter_mut().zip(terms) {
            let r = (m as u128 * t as u128 % n as u128) as u64;
            *slot = if r == 0 { n } else { r };
        }
        buf.sort_unstable();
        if buf < best {
            best.copy_from_slice(&buf);
        }
    }
    best
}

/// The lexicographically smallest member of the unit orbit of `s`.
pub fn orbit_canonical(s: &Sequence) -> Sequence {
    Sequence::from_sorted_unchecked(s.modulus().clone(), canonical_terms(s.terms(), s.n()))
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub k: usize,
    /// Process one representative per unit orbit instead of every sequence.
    pub orbits: bool,
    pub jobs: usize,
    pub checkpoint: Option<PathBuf>,
    /// Stop after this many new blocks, leaving the report incomplete.
    pub max_blocks: Option<usize>,
    /// Checked before each block starts.
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            k: 4,
            orbits: false,
            jobs: 1,
            checkpoint: None,
            max_blocks: None,
            cancel: None,
        }
    }
}

/// One sequence of index at least two, with its exact index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HighIndexEntry {
    pub terms: Vec<u64>,
    pub index: u64,
}

/// Results for one leading term.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockResult {
    pub orbits: bool,
    pub sequences: u64,
    pub orbit_reps: u64,
    pub rule_histogram: BTreeMap<String, u64>,
    pub high_index: Vec<HighIndexEntry>,
}

impl BlockResult {
    fn merge(&mut self, other: &BlockResult) {
        self.sequences += other.sequences;
        self.orbit_reps += other.orbit_reps;
        for (rule, count) in &other.rule_histogram {
            *self.rule_histogram.entry(rule.clone()).or_default() += count;
        }
        self.high_index.extend(other.high_index.iter().cloned());
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub n: u64,
    pub k: usize,
    pub gcd6_class: u64,
    pub orbits: bool,
    pub sequences_total: u64,
    /// Number of orbit representatives; zero when orbits are disabled.
    pub orbits_total: u64,
    pub rule_histogram: BTreeMap<String, u64>,
    /// Sorted by terms.
    pub high_index: Vec<HighIndexEntry>,
    pub elapsed: Duration,
    pub complete: bool,
}

impl VerificationReport {
    /// `gcd(n, 6) = 1` and `k = 4`, so the sweep tests the conjecture.
    pub fn conjecture_applies(&self) -> bool {
        self.gcd6_class == 1 && self.k == 4
    }

    /// A high-index sequence where the conjecture predicts none.
    pub fn violates_conjecture(&self) -> bool {
        self.conjecture_applies() && !self.high_index.is_empty()
    }
}

fn classify(s: &Sequence, k: usize) -> Result<WitnessOutcome> {
    if k == 4 {
        find_witness(s)
    } else {
        Ok(exhaustive_search(s))
    }
}

fn run_block(order: &Arc<GroupOrder>, k: usize, first: u64, orbits: bool) -> Result<BlockResult> {
    let n = order.n();
    let mut block = BlockResult {
        orbits,
        ..BlockResult::default()
    };
    for terms in enumerate_block(n, k, first) {
        block.sequences += 1;
        if orbits {
            if canonical_terms(&terms, n) != terms {
                continue;
            }
            block.orbit_reps += 1;
        }
        let s = Sequence::from_sorted_unchecked(order.clone(), terms);
        match classify(&s, k)? {
            WitnessOutcome::Found(cert) => {
                if !verify_witness(&s, &cert.witness) {
                    return Err(Error::UnsoundCertificate(format!(
                        "{s}: m = {} does not give sum n",
                        cert.witness.m()
                    )));
                }
                *block
                    .rule_histogram
                    .entry(cert.witness.rule().to_string())
                    .or_default() += 1;
            }
            WitnessOutcome::HighIndex(h) => {
                let exact = index_terms(s.terms(), order);
                if exact != h.index || h.index() < 2 {
                    return Err(Error::UnsoundCertificate(format!(
                        "{s}: high-index evidence {} disagrees with exhaustive index {}",
                        h.index, exact
                    )));
                }
                *block.rule_histogram.entry("HIGH_INDEX".into()).or_default() += 1;
                block.high_index.push(HighIndexEntry {
                    terms: s.terms().to_vec(),
                    index: h.index(),
                });
            }
        }
    }
    Ok(block)
}

/// Append-only record of finished blocks.
struct Checkpoint {
    file: Mutex<File>,
}

impl Checkpoint {
    fn open(path: &Path) -> Result<Self> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        Ok(Self {
            file: Mutex::new(file),
        })
    }

    fn record(&self, n: u64, k: usize, first: u64, block: &BlockResult) -> Result<()> {
        let payload = serde_json::to_string(block).expect("block results serialize");
        let mut file = self.file.lock().expect("checkpoint lock poisoned");
        writeln!(file, "{n} {k} {first} {payload}")
            .and_then(|_| file.sync_data())
            .map_err(|e| Error::Checkpoint(e.to_string()))
    }
}

/// Finished blocks for `(n, k, orbits)` from a checkpoint file. A final line
/// without a newline is a torn write and is ignored.
pub fn load_checkpoint(
    path: &Path,
    n: u64,
    k: usize,
    orbits: bool,
) -> Result<BTreeMap<u64, BlockResult>> {
    let mut done = BTreeMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(done),
        Err(e) => return Err(Error::Checkpoint(format!("{}: {e}", path.display()))),
    };
    let mut reader = BufReader::new(file);
    let mut line = String::new();
    let mut lineno = 0;
    loop {
        line.clear();
        let read = reader
            .read_line(&mut line)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        if read == 0 || !line.ends_with('\n') {
            break;
        }
        lineno += 1;
        let bad = || Error::Checkpoint(format!("{}:{lineno}: malformed line", path.display()));
        let mut fields = line.trim_end().splitn(4, ' ');
        let mut next_num =
            || -> Result<u64> { fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad) };
        let (ln, lk, first) = (next_num()?, next_num()?, next_num()?);
        let payload = fields.next().ok_or_else(bad)?;
        if ln != n || lk != k as u64 {
            continue;
        }
        let block: BlockResult = serde_json::from_str(payload).map_err(|_| bad())?;
        if block.orbits == orbits {
            done.insert(first, block);
        }
    }
    Ok(done)
}

/// Runs the witness engine over every minimal zero-sum sequence of length
/// `opts.k` (or one per unit orbit), re-verifying every certificate and
/// cross-checking every high-index finding against the exhaustive index.
pub fn verify_conjecture(n: &Arc<GroupOrder>, opts: &VerifyOptions) -> Result<VerificationReport> {
    let start = Instant::now();
    let modulus = n.n();
    let k = opts.k;
    let mut done = match &opts.checkpoint {
        Some(path) => load_checkpoint(path, modulus, k, opts.orbits)?,
        None => BTreeMap::new(),
    };
    let checkpoint = opts
        .checkpoint
        .as_deref()
        .map(Checkpoint::open)
        .transpose()?;

    let pending: Vec<u64> = (1..modulus)
        .filter(|first| !done.contains_key(first))
        .take(opts.max_blocks.unwrap_or(usize::MAX))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| Error::Checkpoint(format!("thread pool: {e}")))?;
    let fresh: Vec<(u64, BlockResult)> = pool.install(|| {
        pending
            .par_iter()
            .filter_map(|&first| {
                if opts
                    .cancel
                    .as_ref()
                    .is_some_and(|c| c.load(Ordering::Relaxed))
                {
                    return None;
                }
                Some(run_block(n, k, first, opts.orbits).and_then(|block| {
                    if let Some(cp) = &checkpoint {
                        cp.record(modulus, k, first, &block)?;
                    }
                    Ok((first, block))
                }))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    done.extend(fresh);

    let mut total = BlockResult::default();
    for block in done.values() {
        total.merge(block);
    }
    total.high_index.sort();
    Ok(VerificationReport {
        n: modulus,
        k,
        gcd6_class: gcd(modulus, 6),
        orbits: opts.orbits,
        sequences_total: total.sequences,
        orbits_total: total.orbit_reps,
        rule_histogram: total.rule_histogram,
        high_index: total.high_index,
        elapsed: start.elapsed(),
        complete: (1..modulus).all(|first| done.contains_key(&first)),
    })
}

/// Orbit representatives of minimal zero-sum sequences of length `k` with
/// index at least two, sorted, with their exact indices.
pub fn search_high_index(n: &Arc<GroupOrder>, k: usize) -> Vec<(Sequence, u64)> {
    let modulus = n.n();
    let found: BTreeSet<(Vec<u64>, u64)> = (1..modulus)
        .into_par_iter()
        .flat_map_iter(|first| {
            enumerate_block(modulus, k, first)
                .into_iter()
                .filter(|terms| canonical_terms(terms, modulus) == *terms)
                .filter_map(|terms| {
                    let value = index_terms(&terms, n);
                    let idx = value.numerator / value.denominator;
                    (idx >= 2).then_some((terms, idx))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    found
        .into_iter()
        .map(|(terms, idx)| (Sequence::from_sorted_unchecked(n.clone(), terms), idx))
        .collect()
}
