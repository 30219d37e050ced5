//! Index-1 certificates.
//!
//! A certificate is a unit `m` with `sum |m n_i|_n = n`. The engine tries the
//! structural conditions on the normal form `(e, a, b, c)` first, then a pool
//! of explicitly constructed multipliers, and finally scans every unit. Every
//! hit is recomputed from scratch before it is returned; a hit that fails
//! recomputation is logged and skipped.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::error::{Error, Result};
use crate::normal_form::{
    content, prime_power_params, reduce_by_content, to_normal_form, NormalForm,
    NormalizationOutcome, PrimePowerParams, Trail,
};
use crate::residue::{gcd, reduce_mod, GroupOrder};
use crate::sequence::{index_terms, is_minimal_terms, transformed_sum, IndexValue, Sequence};

/// Which multiplier construction a pool candidate came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CandidateTag {
    /// `(n + j a) / a` for `j = 1..=4`.
    ShiftA(u8),
    /// `(n - j a) / a` for `j = 1, 2`.
    BackA(u8),
    /// `(n + j a) / (2a)` for odd `j`.
    HalfShiftA(u8),
    /// `(n - j e) / e` for `j = 1, 2`.
    BackE(u8),
    /// `(n - q^j0) / (2 q^j0)`.
    HalfQ,
    /// `(3n - q^j0) / (2 q^j0)`.
    HalfQ3,
    /// `ceil(n / c)`.
    CeilNOverC,
    /// `5l - j` for `j` in `{1, 4, 9}`.
    FiveL(u8),
    /// A member of `[kn/c, kn/b)`.
    Interval(u64),
    Constant,
}

impl fmt::Display for CandidateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CandidateTag::ShiftA(1) => write!(f, "(n+a)/a"),
            CandidateTag::ShiftA(j) => write!(f, "(n+{j}a)/a"),
            CandidateTag::BackA(1) => write!(f, "(n-a)/a"),
            CandidateTag::BackA(j) => write!(f, "(n-{j}a)/a"),
            CandidateTag::HalfShiftA(1) => write!(f, "(n+a)/(2a)"),
            CandidateTag::HalfShiftA(j) => write!(f, "(n+{j}a)/(2a)"),
            CandidateTag::BackE(1) => write!(f, "(n-e)/e"),
            CandidateTag::BackE(j) => write!(f, "(n-{j}e)/e"),
            CandidateTag::HalfQ => write!(f, "(n-q)/(2q)"),
            CandidateTag::HalfQ3 => write!(f, "(3n-q)/(2q)"),
            CandidateTag::CeilNOverC => write!(f, "ceil(n/c)"),
            CandidateTag::FiveL(j) => write!(f, "5l-{j}"),
            CandidateTag::Interval(k) => write!(f, "interval[k={k}]"),
            CandidateTag::Constant => write!(f, "const"),
        }
    }
}

/// The stage that produced a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    /// The plain sum is already `n`.
    SumN,
    /// Some unit gives transformed sum `3n`; its negation gives `n`.
    Sum3N,
    /// At most one transformed term on one side of `n/2`.
    OneSided,
    /// A unit `m` in `[kn/c, kn/b]` with `ma < n`.
    IntervalUnit,
    /// A unit `M <= n/(2e)` with at least two of `|Ma| > n/2`, `|Mb| > n/2`, `|Mc| < n/2`.
    SignPattern,
    Candidate(CandidateTag),
    Exhaustive,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::SumN => write!(f, "SUM_N"),
            Rule::Sum3N => write!(f, "SUM_3N"),
            Rule::OneSided => write!(f, "ONE_SIDED"),
            Rule::IntervalUnit => write!(f, "INTERVAL_UNIT"),
            Rule::SignPattern => write!(f, "SIGN_PATTERN"),
            Rule::Candidate(tag) => write!(f, "CANDIDATE:{tag}"),
            Rule::Exhaustive => write!(f, "EXHAUSTIVE"),
        }
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "SUM_N" => Rule::SumN,
            "SUM_3N" => Rule::Sum3N,
            "ONE_SIDED" => Rule::OneSided,
            "INTERVAL_UNIT" => Rule::IntervalUnit,
            "SIGN_PATTERN" => Rule::SignPattern,
            "EXHAUSTIVE" => Rule::Exhaustive,
            other => {
                let tag = other
                    .strip_prefix("CANDIDATE:")
                    .ok_or_else(|| format!("unknown rule {other:?}"))?;
                Rule::Candidate(parse_tag(tag).ok_or_else(|| format!("unknown candidate {tag:?}"))?)
            }
        })
    }
}

fn parse_tag(s: &str) -> Option<CandidateTag> {
    let all = (1..=4)
        .map(CandidateTag::ShiftA)
        .chain((1..=2).map(CandidateTag::BackA))
        .chain([1, 3, 5].map(CandidateTag::HalfShiftA))
        .chain((1..=2).map(CandidateTag::BackE))
        .chain([
            CandidateTag::HalfQ,
            CandidateTag::HalfQ3,
            CandidateTag::CeilNOverC,
        ])
        .chain([1, 4, 9].map(CandidateTag::FiveL))
        .chain([CandidateTag::Constant]);
    for tag in all {
        if tag.to_string() == s {
            return Some(tag);
        }
    }
    s.strip_prefix("interval[k=")
        .and_then(|r| r.strip_suffix(']'))
        .and_then(|k| k.parse().ok())
        .map(CandidateTag::Interval)
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A unit multiplier whose transformed sum is exactly `n`.
///
/// Only [`Witness::certify`] constructs one, after recomputing the sum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    m: u64,
    achieved_sum: u64,
    rule: Rule,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u64>,
}

impl Witness {
    pub fn certify(
        terms: &[u64],
        order: &GroupOrder,
        m: u64,
        rule: Rule,
        k: Option<u64>,
    ) -> Option<Self> {
        let n = order.n();
        let m = m % n;
        if gcd(m, n) != 1 {
            return None;
        }
        let achieved_sum = transformed_sum(terms, m, n);
        (achieved_sum == n).then_some(Self {
            m,
            achieved_sum,
            rule,
            k,
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn achieved_sum(&self) -> u64 {
        self.achieved_sum
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn k(&self) -> Option<u64> {
        self.k
    }
}

/// An exhaustive proof that the index exceeds one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HighIndexEvidence {
    pub index: IndexValue,
}

impl HighIndexEvidence {
    pub fn index(&self) -> u64 {
        self.index.numerator / self.index.denominator
    }
}

/// A witness for the input sequence plus how it was reached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub witness: Witness,
    /// Multipliers taking the (content-reduced) input to its normal form.
    pub trail: Trail,
    /// The content divided out before normalization, 1 if none.
    pub content: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessOutcome {
    Found(Certificate),
    HighIndex(HighIndexEvidence),
}

impl WitnessOutcome {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            WitnessOutcome::Found(c) => Some(&c.witness),
            WitnessOutcome::HighIndex(_) => None,
        }
    }

    /// The integer index: 1 for a certificate.
    pub fn index(&self) -> u64 {
        match self {
            WitnessOutcome::Found(_) => 1,
            WitnessOutcome::HighIndex(h) => h.index(),
        }
    }
}

fn ceil_div(x: u64, y: u64) -> u64 {
    x.div_ceil(y)
}

/// Integers `m` with `kn/c <= m < kn/b`.
pub fn interval_integers(k: u64, nf: &NormalForm) -> Vec<u64> {
    let kn = k * nf.n();
    (ceil_div(kn, nf.c)..ceil_div(kn, nf.b)).collect()
}

/// Integers `m` with `kn/c <= m <= kn/b`.
pub fn closed_interval_integers(k: u64, nf: &NormalForm) -> std::ops::RangeInclusive<u64> {
    let kn = k * nf.n();
    ceil_div(kn, nf.c)..=kn / nf.b
}

/// The largest `k` such that `ceil(jn/c) = ceil(jn/b)` for every `1 <= j < k`
/// while `[kn/c, kn/b)` contains an integer; this is the first `k` whose
/// half-open interval is nonempty.
pub fn compute_k1(nf: &NormalForm) -> Result<u64> {
    let n = nf.n();
    for k in 1..=nf.b {
        if !interval_integers(k, nf).is_empty() {
            debug_assert!((1..k).all(|j| ceil_div(j * n, nf.c) == ceil_div(j * n, nf.b)));
            return Ok(k);
        }
    }
    Err(Error::NotFound {
        what: "k1",
        bound: nf.b,
    })
}

/// The smallest `l` for which `[ln/c, ln/b)` holds at least three integers.
pub fn compute_l(nf: &NormalForm) -> Result<u64> {
    (1..=2 * nf.c)
        .find(|&l| interval_integers(l, nf).len() >= 3)
        .ok_or(Error::NotFound {
            what: "l",
            bound: 2 * nf.c,
        })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalDiagnostics {
    pub k1: u64,
    pub l: u64,
    /// `(k, [kn/c, kn/b) ∩ Z)` for `k` up to `max(k1, l)`.
    pub integers_per_interval: Vec<(u64, Vec<u64>)>,
    /// `k1 <= b/a`.
    pub k1_le_b_over_a: bool,
    /// `k1 < b/a`.
    pub k1_lt_b_over_a: bool,
}

pub fn interval_diagnostics(nf: &NormalForm) -> Result<IntervalDiagnostics> {
    let k1 = compute_k1(nf)?;
    let l = compute_l(nf)?;
    Ok(IntervalDiagnostics {
        k1,
        l,
        integers_per_interval: (1..=k1.max(l))
            .map(|k| (k, interval_integers(k, nf)))
            .collect(),
        k1_le_b_over_a: k1 * nf.a <= nf.b,
        k1_lt_b_over_a: k1 * nf.a < nf.b,
    })
}

fn certify_on_form(nf: &NormalForm, m: u64, rule: Rule, k: Option<u64>) -> Option<Witness> {
    let w = Witness::certify(&nf.represented_terms(), nf.modulus(), m, rule.clone(), k);
    if w.is_none() {
        warn!(%nf, m, %rule, "structural hit failed direct validation");
    }
    w
}

/// Searches `1 <= k <= b` and units `m` in `[kn/c, kn/b]` with `ma < n`.
///
/// For such `m` the transformed terms are `me`, `mc - kn`, `kn - mb` and
/// `n - ma`, which add up to `n`.
pub fn condition_a(nf: &NormalForm) -> Option<Witness> {
    let n = nf.n();
    for k in 1..=nf.b {
        let range = closed_interval_integers(k, nf);
        if *range.start() * nf.a >= n {
            break;
        }
        for m in range {
            if m * nf.a >= n {
                break;
            }
            if gcd(m, n) != 1 {
                continue;
            }
            if let Some(w) = certify_on_form(nf, m, Rule::IntervalUnit, Some(k)) {
                return Some(w);
            }
        }
    }
    None
}

/// Searches units `M <= n/(2e)` for which at least two of `|Ma|_n > n/2`,
/// `|Mb|_n > n/2`, `|Mc|_n < n/2` hold, then keeps whichever of `M`, `n - M`
/// validates directly.
pub fn condition_b(nf: &NormalForm) -> Option<Witness> {
    let order = nf.modulus();
    let n = order.n();
    for big_m in 1..=n / (2 * nf.e) {
        if gcd(big_m, n) != 1 {
            continue;
        }
        let hits = [
            2 * order.mul(big_m, nf.a) > n,
            2 * order.mul(big_m, nf.b) > n,
            2 * order.mul(big_m, nf.c) < n,
        ]
        .into_iter()
        .filter(|&h| h)
        .count();
        if hits < 2 {
            continue;
        }
        let terms = nf.represented_terms();
        let found = [big_m, n - big_m]
            .into_iter()
            .find_map(|m| Witness::certify(&terms, order, m, Rule::SignPattern, None));
        match found {
            Some(w) => return Some(w),
            None => tracing::debug!(%nf, big_m, "sign-pattern hit failed direct validation"),
        }
    }
    None
}

/// Small multipliers that recur across the case analyses for the two-prime case.
pub const CONSTANT_MULTIPLIERS: [u64; 21] = [
    3, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 22, 23, 24, 28,
];

/// The candidate pool, in order: structured formulas, interval members by
/// `(k, m)`, then the fixed constants. Reduced mod `n`, restricted to units,
/// first occurrence wins.
pub fn candidate_multipliers(
    nf: &NormalForm,
    params: Option<&PrimePowerParams>,
) -> Vec<(u64, CandidateTag)> {
    let n = nf.n() as i64;
    let (e, a, c) = (nf.e as i64, nf.a as i64, nf.c as i64);
    let mut raw: Vec<(i64, CandidateTag)> = Vec::new();
    let mut exact = |num: i64, den: i64, tag| {
        if den > 0 && num > 0 && num % den == 0 {
            raw.push((num / den, tag));
        }
    };
    for j in 1..=4u8 {
        exact(n + j as i64 * a, a, CandidateTag::ShiftA(j));
    }
    for j in 1..=2u8 {
        exact(n - j as i64 * a, a, CandidateTag::BackA(j));
    }
    for j in [3u8, 5, 1] {
        exact(n + j as i64 * a, 2 * a, CandidateTag::HalfShiftA(j));
    }
    for j in 1..=2u8 {
        exact(n - j as i64 * e, e, CandidateTag::BackE(j));
    }
    if let Some(p) = params {
        let q = p.q_power() as i64;
        exact(n - q, 2 * q, CandidateTag::HalfQ);
        exact(3 * n - q, 2 * q, CandidateTag::HalfQ3);
    }
    raw.push(((n + c - 1) / c, CandidateTag::CeilNOverC));
    if let Ok(l) = compute_l(nf) {
        for j in [1u8, 4, 9] {
            raw.push((5 * l as i64 - j as i64, CandidateTag::FiveL(j)));
        }
    }
    let k_max = compute_k1(nf).unwrap_or(0).max(7);
    for k in 1..=k_max {
        for m in interval_integers(k, nf) {
            raw.push((m as i64, CandidateTag::Interval(k)));
        }
    }
    for m in CONSTANT_MULTIPLIERS {
        raw.push((m as i64, CandidateTag::Constant));
    }

    let mut seen = std::collections::HashSet::new();
    raw.into_iter()
        .filter(|&(m, _)| m > 0)
        .map(|(m, tag)| ((m as u64) % nf.n(), tag))
        .filter(|&(m, _)| m != 0 && gcd(m, nf.n()) == 1 && seen.insert(m))
        .collect()
}

/// Tries each pool candidate `m` (and `n - m`, for transformed sum `3n`) on the
/// represented sequence.
pub fn candidate_witness(nf: &NormalForm, params: Option<&PrimePowerParams>) -> Option<Witness> {
    let n = nf.n();
    let terms = nf.represented_terms();
    candidate_multipliers(nf, params)
        .into_iter()
        .find_map(|(m, tag)| match transformed_sum(&terms, m, n) {
            s if s == n => certify_on_form(nf, m, Rule::Candidate(tag), None),
            s if s == 3 * n => certify_on_form(nf, n - m, Rule::Candidate(tag), None),
            _ => None,
        })
}

/// First unit with transformed sum `n`, or the exact index when there is none.
pub fn exhaustive_search(s: &Sequence) -> WitnessOutcome {
    let order = s.modulus();
    let n = order.n();
    match order.units().find(|&m| s.transformed_sum(m) == n) {
        Some(m) => WitnessOutcome::Found(Certificate {
            witness: Witness::certify(s.terms(), order, m, Rule::Exhaustive, None)
                .expect("sum checked"),
            trail: Trail::default(),
            content: 1,
        }),
        None => WitnessOutcome::HighIndex(HighIndexEvidence {
            index: index_terms(s.terms(), order),
        }),
    }
}

/// Runs the whole pipeline on a minimal zero-sum sequence of length four.
pub fn find_witness(s: &Sequence) -> Result<WitnessOutcome> {
    if s.len() != 4 {
        return Err(Error::NotLength4(s.len()));
    }
    if !is_minimal_terms(s.terms(), s.n()) {
        return Err(Error::NotMinimalZeroSum);
    }
    let order = s.modulus();
    let n = order.n();

    if s.sum() == n {
        let witness = Witness::certify(s.terms(), order, 1, Rule::SumN, None).expect("sum is n");
        return Ok(WitnessOutcome::Found(Certificate {
            witness,
            trail: Trail::default(),
            content: 1,
        }));
    }

    let u = content(s);
    if u > 1 {
        let reduced = reduce_by_content(s)?;
        return Ok(match find_witness(&reduced)? {
            WitnessOutcome::Found(cert) => lift(s, u, cert),
            WitnessOutcome::HighIndex(_) => exhaustive_search(s),
        });
    }

    let (form, trail) = match to_normal_form(s) {
        Ok(NormalizationOutcome::Witness(witness)) => {
            return Ok(WitnessOutcome::Found(Certificate {
                witness,
                trail: Trail::default(),
                content: 1,
            }))
        }
        Ok(NormalizationOutcome::Form { form, trail }) => (form, trail),
        Err(Error::HalfTerm | Error::NotFound { .. }) => return Ok(exhaustive_search(s)),
        Err(e) => return Err(e),
    };

    let params = prime_power_params(&form.represented()).ok();
    let stages = [
        condition_a as fn(&NormalForm) -> Option<Witness>,
        condition_b,
    ];
    let structural = stages
        .iter()
        .find_map(|stage| stage(&form))
        .or_else(|| candidate_witness(&form, params.as_ref()));
    if let Some(w) = structural {
        let m = order.mul(w.m(), trail.product(order));
        match Witness::certify(s.terms(), order, m, w.rule().clone(), w.k()) {
            Some(witness) => {
                return Ok(WitnessOutcome::Found(Certificate {
                    witness,
                    trail,
                    content: 1,
                }))
            }
            None => warn!(%s, m, "witness failed to transfer back through the trail"),
        }
    }
    Ok(exhaustive_search(s))
}

/// Lifts a certificate over `n/u` to a unit modulo `n` congruent to it.
fn lift(s: &Sequence, u: u64, cert: Certificate) -> WitnessOutcome {
    let order = s.modulus();
    let small = order.n() / u;
    let base = cert.witness.m() % small;
    let lifted = (0..u)
        .map(|t| base + t * small)
        .filter(|&m| m > 0)
        .find_map(|m| {
            Witness::certify(
                s.terms(),
                order,
                m,
                cert.witness.rule().clone(),
                cert.witness.k(),
            )
        });
    match lifted {
        Some(witness) => WitnessOutcome::Found(Certificate {
            witness,
            trail: cert.trail,
            content: u * cert.content,
        }),
        None => {
            warn!(%s, u, "certificate over the reduced group did not lift");
            exhaustive_search(s)
        }
    }
}

/// Independent check of a certificate: `m` is a unit and `sum |m n_i|_n = n`.
pub fn verify_witness(s: &Sequence, w: &Witness) -> bool {
    verify_multiplier(s.modulus(), s.terms(), w.m())
}

/// Same check from raw parts, e.g. a record read back from a report.
pub fn verify_multiplier(order: &GroupOrder, terms: &[u64], m: u64) -> bool {
    let n = order.n();
    let (mut x, mut y) = (m, n);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    if x != 1 || m == 0 {
        return false;
    }
    let Ok(m) = i64::try_from(m) else {
        return false;
    };
    let mut total: u128 = 0;
    for &t in terms {
        let Ok(t) = i64::try_from(t) else {
            return false;
        };
        let Some(prod) = m.checked_mul(t) else {
            return false;
        };
        total += reduce_mod(prod, order).value() as u128;
    }
    total == n as u128
}
