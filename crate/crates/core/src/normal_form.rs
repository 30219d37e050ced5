//! Reduction of a minimal zero-sum sequence of length four to the shape
//! `(e, c, n-b, n-a)` with `e < a <= b < c < n/2` and `e + c = a + b`.
//!
//! The cheap sufficient conditions (sum `3n`, one-sided sign pattern) and
//! content reduction live here too, along with the prime-power parameters
//! used when `n` has exactly two prime factors.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::error::{Error, Result};
use crate::residue::{gcd, GroupOrder};
use crate::sequence::{is_minimal_terms, Sequence};
use crate::witness::{Rule, Witness};

/// `(e, a, b, c)` over a modulus, representing the sequence `(e, c, n-b, n-a)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalForm {
    modulus: Arc<GroupOrder>,
    pub e: u64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl NormalForm {
    /// Checks the ordering, the linear relation and minimality of the
    /// represented sequence.
    pub fn new(modulus: Arc<GroupOrder>, e: u64, a: u64, b: u64, c: u64) -> Result<Self> {
        let n = modulus.n();
        if !(1 <= e && e < a && a <= b && b < c && 2 * c < n) {
            return Err(Error::InvalidNormalForm(format!(
                "need 1 <= e < a <= b < c < n/2, got e={e} a={a} b={b} c={c} n={n}"
            )));
        }
        if e + c != a + b {
            return Err(Error::InvalidNormalForm(format!(
                "e + c = {} but a + b = {}",
                e + c,
                a + b
            )));
        }
        let nf = Self {
            modulus,
            e,
            a,
            b,
            c,
        };
        if !is_minimal_terms(&nf.represented_terms(), n) {
            return Err(Error::InvalidNormalForm(
                "represented sequence is not minimal zero-sum".into(),
            ));
        }
        Ok(nf)
    }

    pub fn modulus(&self) -> &Arc<GroupOrder> {
        &self.modulus
    }

    pub fn n(&self) -> u64 {
        self.modulus.n()
    }

    /// `(e, c, n-b, n-a)`, which is already ascending.
    pub fn represented_terms(&self) -> [u64; 4] {
        let n = self.n();
        [self.e, self.c, n - self.b, n - self.a]
    }

    pub fn represented(&self) -> Sequence {
        Sequence::from_sorted_unchecked(self.modulus.clone(), self.represented_terms().to_vec())
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(e={}, a={}, b={}, c={}) mod {}",
            self.e,
            self.a,
            self.b,
            self.c,
            self.n()
        )
    }
}

/// Multipliers applied to an input sequence on the way to its normal form.
///
/// `complemented` marks that the last step was multiplication by `n - 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trail {
    pub multipliers: Vec<u64>,
    pub complemented: bool,
}

impl Trail {
    pub fn is_empty(&self) -> bool {
        self.multipliers.is_empty()
    }

    /// Product of all recorded multipliers modulo `n`.
    pub fn product(&self, order: &GroupOrder) -> u64 {
        self.multipliers
            .iter()
            .fold(1 % order.n(), |acc, &m| order.mul(acc, m) % order.n())
    }

    /// Applies every multiplier in order, re-sorting after each.
    pub fn replay(&self, s: &Sequence) -> Result<Sequence> {
        self.multipliers
            .iter()
            .try_fold(s.clone(), |acc, &m| crate::sequence::apply_unit(&acc, m))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalizationOutcome {
    /// An index-1 certificate for the input sequence itself.
    Witness(Witness),
    Form {
        form: NormalForm,
        trail: Trail,
    },
}

/// `gcd(n, n_1, ..., n_k)`.
pub fn content(s: &Sequence) -> u64 {
    s.terms().iter().fold(s.n(), |g, &t| gcd(g, t))
}

/// Divides every term and the modulus by the content `u > 1`.
pub fn reduce_by_content(s: &Sequence) -> Result<Sequence> {
    let u = content(s);
    if u == 1 {
        return Err(Error::TrivialContent);
    }
    let order = Arc::new(GroupOrder::new(s.n() / u)?);
    let terms = s.terms().iter().map(|&t| t / u).collect();
    Ok(Sequence::from_sorted_unchecked(order, terms))
}

/// Searches `candidates` for a unit with transformed sum `3n`; the witness is
/// its negation, whose transformed sum is then `n`.
pub fn sufficient_condition_sum3n_over<I>(s: &Sequence, candidates: I) -> Option<Witness>
where
    I: IntoIterator<Item = u64>,
{
    let order = s.modulus();
    let n = order.n();
    for m in candidates {
        if gcd(m, n) != 1 || s.transformed_sum(m) != 3 * n {
            continue;
        }
        let negated = n - m % n;
        match Witness::certify(s.terms(), order, negated, Rule::Sum3N, None) {
            Some(w) => return Some(w),
            None => warn!(%s, m, "sum-3n hit did not negate to an index-1 unit"),
        }
    }
    None
}

pub fn sufficient_condition_sum3n(s: &Sequence) -> Option<Witness> {
    sufficient_condition_sum3n_over(s, s.modulus().units())
}

/// At most one transformed term in `[1, n/2]`, or at most one in `[n/2, n]`.
pub fn is_one_sided(terms: &[u64], n: u64) -> bool {
    let low = terms.iter().filter(|&&t| 2 * t <= n).count();
    let high = terms.iter().filter(|&&t| 2 * t >= n).count();
    low <= 1 || high <= 1
}

/// Searches `candidates` for a one-sided unit. A hit is converted to a direct
/// index-1 unit: first `m` and `n - m`, then the smallest unit with
/// transformed sum `n`.
pub fn sufficient_condition_onesided_over<I>(s: &Sequence, candidates: I) -> Option<Witness>
where
    I: IntoIterator<Item = u64>,
{
    let order = s.modulus();
    let n = order.n();
    let mut buf = Vec::with_capacity(s.len());
    for m in candidates {
        if gcd(m, n) != 1 {
            continue;
        }
        buf.clear();
        buf.extend(s.terms().iter().map(|&t| order.mul(m, t)));
        if !is_one_sided(&buf, n) {
            continue;
        }
        if let Some(w) = convert_to_direct(s, m, Rule::OneSided) {
            return Some(w);
        }
        tracing::debug!(%s, m, "one-sided hit has no index-1 unit");
    }
    None
}

pub fn sufficient_condition_onesided(s: &Sequence) -> Option<Witness> {
    sufficient_condition_onesided_over(s, s.modulus().units())
}

fn convert_to_direct(s: &Sequence, m: u64, rule: Rule) -> Option<Witness> {
    let order = s.modulus();
    let n = order.n();
    [m % n, n - m % n]
        .into_iter()
        .chain(order.units())
        .find_map(|u| Witness::certify(s.terms(), order, u, rule.clone(), None))
}

fn check_normalizable(s: &Sequence) -> Result<()> {
    if s.len() != 4 {
        return Err(Error::NotLength4(s.len()));
    }
    if !is_minimal_terms(s.terms(), s.n()) {
        return Err(Error::NotMinimalZeroSum);
    }
    match content(s) {
        1 => Ok(()),
        u => Err(Error::ContentNotOne(u)),
    }
}

/// Brings a minimal zero-sum sequence of length four and content one either
/// to an index-1 certificate (when a cheap condition fires at the identity
/// orientation) or to its normal form.
pub fn to_normal_form(s: &Sequence) -> Result<NormalizationOutcome> {
    check_normalizable(s)?;
    let order = s.modulus();
    let n = order.n();
    let sum = s.sum();

    if sum == n {
        let w = Witness::certify(s.terms(), order, 1, Rule::SumN, None)
            .expect("sum n at the identity is an index-1 certificate");
        return Ok(NormalizationOutcome::Witness(w));
    }
    if sum == 3 * n {
        if let Some(w) = sufficient_condition_sum3n_over(s, [1]) {
            return Ok(NormalizationOutcome::Witness(w));
        }
    }
    debug_assert_eq!(sum, 2 * n);

    if is_one_sided(s.terms(), n) {
        if let Some(w) = sufficient_condition_onesided_over(s, [1]) {
            return Ok(NormalizationOutcome::Witness(w));
        }
    }
    if s.terms().iter().any(|&t| 2 * t == n) {
        // n/2 is fixed by every unit, so no orientation splits two and two.
        return match s.modulus().units().find(|&m| s.transformed_sum(m) == n) {
            Some(m) => Ok(NormalizationOutcome::Witness(
                Witness::certify(s.terms(), order, m, Rule::Exhaustive, None)
                    .expect("transformed sum was checked"),
            )),
            None => Err(Error::HalfTerm),
        };
    }
    // Reaching a one-sided identity here means the index is at least two, so
    // every unit gives sum 2n; look for one that splits two and two.
    let (oriented, mut trail) = if is_one_sided(s.terms(), n) {
        let m = order
            .units()
            .find(|&m| splits_two_and_two(&transformed_terms(s, m), n))
            .ok_or(Error::NotFound {
                what: "orientation splitting two and two",
                bound: n,
            })?;
        (
            transformed_terms(s, m),
            Trail {
                multipliers: vec![m],
                complemented: false,
            },
        )
    } else {
        (s.terms().to_vec(), Trail::default())
    };
    debug_assert!(splits_two_and_two(&oriented, n));

    let (n1, n4) = (oriented[0], oriented[3]);
    let terms = match (n1 + n4).cmp(&n) {
        std::cmp::Ordering::Equal => return Err(Error::Degenerate),
        std::cmp::Ordering::Less => oriented,
        std::cmp::Ordering::Greater => {
            trail.multipliers.push(n - 1);
            trail.complemented = true;
            oriented.iter().rev().map(|&x| n - x).collect()
        }
    };
    let form = NormalForm::new(
        order.clone(),
        terms[0],
        n - terms[3],
        n - terms[2],
        terms[1],
    )?;
    Ok(NormalizationOutcome::Form { form, trail })
}

fn transformed_terms(s: &Sequence, m: u64) -> Vec<u64> {
    let mut t: Vec<u64> = s.terms().iter().map(|&x| s.modulus().mul(m, x)).collect();
    t.sort_unstable();
    t
}

/// Sorted terms with `n_1 <= n_2 < n/2 < n_3 <= n_4` and sum `2n`.
fn splits_two_and_two(sorted: &[u64], n: u64) -> bool {
    sorted.len() == 4
        && 2 * sorted[1] < n
        && 2 * sorted[2] > n
        && sorted.iter().sum::<u64>() == 2 * n
}

/// Which positions carry the prime `p` (resp. `q`), and the smallest prime
/// powers `p^i0`, `q^j0` occurring as `gcd(n_i, n)`, with `p^i0 < q^j0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePowerParams {
    pub p: u64,
    pub q: u64,
    pub i0: u32,
    pub j0: u32,
    pub p_positions: [usize; 2],
    pub q_positions: [usize; 2],
}

impl PrimePowerParams {
    pub fn p_power(&self) -> u64 {
        self.p.pow(self.i0)
    }

    pub fn q_power(&self) -> u64 {
        self.q.pow(self.j0)
    }
}

/// Requires `n = p^alpha q^beta` and every term sharing a factor with `n`,
/// split two and two between `p` and `q`.
pub fn min_prime_powers(s: &Sequence, p: u64, q: u64) -> Result<PrimePowerParams> {
    let violation = |msg: String| Err(Error::StructureViolation(msg));
    let n = s.n();
    let primes: Vec<u64> = s.modulus().primes().collect();
    if p == q || primes.len() != 2 || !primes.contains(&p) || !primes.contains(&q) {
        return violation(format!("{n} is not a product of powers of {p} and {q}"));
    }
    if s.len() != 4 {
        return violation(format!("expected four terms, got {}", s.len()));
    }
    let mut p_pos = Vec::new();
    let mut q_pos = Vec::new();
    for (i, &t) in s.terms().iter().enumerate() {
        match (t % p == 0, t % q == 0) {
            (false, false) => return violation(format!("term {t} is coprime to {n}")),
            (true, true) => return violation(format!("term {t} is divisible by both {p} and {q}")),
            (true, false) => p_pos.push(i),
            (false, true) => q_pos.push(i),
        }
    }
    if p_pos.len() != 2 || q_pos.len() != 2 {
        return violation(format!(
            "{} terms divisible by {p} and {} by {q}, expected two each",
            p_pos.len(),
            q_pos.len()
        ));
    }
    let min_exponent = |positions: &[usize], prime: u64| -> u32 {
        positions
            .iter()
            .map(|&i| {
                let mut g = gcd(s.terms()[i], n);
                let mut e = 0;
                while g.is_multiple_of(prime) {
                    g /= prime;
                    e += 1;
                }
                e
            })
            .min()
            .expect("two positions")
    };
    let mut params = PrimePowerParams {
        p,
        q,
        i0: min_exponent(&p_pos, p),
        j0: min_exponent(&q_pos, q),
        p_positions: [p_pos[0], p_pos[1]],
        q_positions: [q_pos[0], q_pos[1]],
    };
    if params.p_power() > params.q_power() {
        params = PrimePowerParams {
            p: params.q,
            q: params.p,
            i0: params.j0,
            j0: params.i0,
            p_positions: params.q_positions,
            q_positions: params.p_positions,
        };
    }
    Ok(params)
}

/// [`min_prime_powers`] with `p < q` taken from the factorization of `n`.
pub fn prime_power_params(s: &Sequence) -> Result<PrimePowerParams> {
    match s.modulus().factors() {
        &[(p, _), (q, _)] => min_prime_powers(s, p, q),
        _ => Err(Error::StructureViolation(format!(
            "{} does not have exactly two prime factors",
            s.n()
        ))),
    }
}

/// Which of the parameter restrictions used by the two-prime reduction hold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// `n >= 75 p^i0`.
    pub modulus_large: bool,
    /// `e` is one of `p^i0`, `q^j0`, `2 q^j0`, and `a > 3e`.
    pub e_prime_power: bool,
    /// `a >= 6e` whenever `e` is `q^j0` or `2 q^j0` (vacuous otherwise).
    pub a_large_for_q_power: bool,
    pub floor_b_over_a: u64,
    pub ceil_b_over_a: u64,
}

pub fn check_reduction_constraints(nf: &NormalForm, params: &PrimePowerParams) -> ConstraintReport {
    let (pp, qp) = (params.p_power(), params.q_power());
    let e = nf.e;
    let e_is_q = e == qp || e == 2 * qp;
    ConstraintReport {
        modulus_large: nf.n() >= 75 * pp,
        e_prime_power: (e == pp || e_is_q) && nf.a > 3 * e,
        a_large_for_q_power: !e_is_q || nf.a >= 6 * e,
        floor_b_over_a: nf.b / nf.a,
        ceil_b_over_a: nf.b.div_ceil(nf.a),
    }
}
