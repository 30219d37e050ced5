//! Sequences over `Z/nZ`, zero-sum and minimality predicates, and the index.
//!
//! A sequence `S = (n_1 g) ... (n_k g)` is stored by its coefficients
//! `n_i` in `[1, n]`, sorted ascending. The index of `S` is the minimum over
//! units `m` of `(sum |m n_i|_n) / n`; minimizing over multipliers is
//! equivalent to minimizing over generators `g' = m^{-1} g`.

use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::residue::{gcd, GroupOrder};

/// A nonempty multiset of residues over a fixed modulus, sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequence {
    modulus: Arc<GroupOrder>,
    terms: Vec<u64>,
}

impl Sequence {
    pub fn new(modulus: Arc<GroupOrder>, mut terms: Vec<u64>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptySequence);
        }
        let n = modulus.n();
        if let Some(&term) = terms.iter().find(|&&t| t == 0 || t > n) {
            return Err(Error::TermOutOfRange { term, n });
        }
        terms.sort_unstable();
        Ok(Self { modulus, terms })
    }

    /// Convenience constructor that factorizes `n` on the spot.
    pub fn from_terms(n: u64, terms: &[u64]) -> Result<Self> {
        Self::new(Arc::new(GroupOrder::new(n)?), terms.to_vec())
    }

    /// Builds from terms already known to be sorted and in range.
    pub(crate) fn from_sorted_unchecked(modulus: Arc<GroupOrder>, terms: Vec<u64>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0] <= w[1]));
        debug_assert!(terms.iter().all(|&t| (1..=modulus.n()).contains(&t)));
        Self { modulus, terms }
    }

    pub fn modulus(&self) -> &Arc<GroupOrder> {
        &self.modulus
    }

    pub fn n(&self) -> u64 {
        self.modulus.n()
    }

    pub fn terms(&self) -> &[u64] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sum(&self) -> u64 {
        self.terms.iter().sum()
    }

    /// `sum |m n_i|_n`, without unit checks.
    #[inline]
    pub fn transformed_sum(&self, m: u64) -> u64 {
        transformed_sum(&self.terms, m, self.n())
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ") mod {}", self.n())
    }
}

#[inline]
pub(crate) fn transformed_sum(terms: &[u64], m: u64, n: u64) -> u64 {
    let m = m % n;
    terms
        .iter()
        .map(|&t| {
            let r = (m as u128 * t as u128 % n as u128) as u64;
            if r == 0 {
                n
            } else {
                r
            }
        })
        .sum()
}

/// Exact value of the index together with a multiplier attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexValue {
    /// `sum |argmin_unit * n_i|_n`.
    pub numerator: u64,
    /// Always the modulus `n`.
    pub denominator: u64,
    /// Smallest unit attaining the minimum.
    pub argmin_unit: u64,
}

impl IndexValue {
    pub fn value(&self) -> Ratio<u64> {
        Ratio::new(self.numerator, self.denominator)
    }

    pub fn is_integer(&self) -> bool {
        self.numerator.is_multiple_of(self.denominator)
    }

    /// The index as an integer, when it is one.
    pub fn as_integer(&self) -> Option<u64> {
        self.is_integer().then(|| self.numerator / self.denominator)
    }
}

impl fmt::Display for IndexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

pub fn is_zero_sum(s: &Sequence) -> bool {
    s.sum().is_multiple_of(s.n())
}

/// Zero-sum, and no proper nonempty sub-multiset sums to zero.
///
/// A sequence containing the zero element `n` is minimal only when it is the
/// singleton `(n)`.
pub fn is_minimal_zero_sum(s: &Sequence) -> bool {
    is_minimal_terms(s.terms(), s.n())
}

pub(crate) fn is_minimal_terms(terms: &[u64], n: u64) -> bool {
    let k = terms.len();
    if terms.iter().sum::<u64>() % n != 0 {
        return false;
    }
    assert!(k < 64, "subset enumeration limited to fewer than 64 terms");
    let full = (1u64 << k) - 1;
    (1..full).all(|mask| {
        let sub: u64 = (0..k)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| terms[i])
            .sum();
        !sub.is_multiple_of(n)
    })
}

/// Multiplies every term by the unit `m` and re-sorts.
pub fn apply_unit(s: &Sequence, m: u64) -> Result<Sequence> {
    let order = s.modulus();
    if gcd(m, order.n()) != 1 {
        return Err(Error::NotAUnit { m, n: order.n() });
    }
    let mut terms: Vec<u64> = s.terms.iter().map(|&t| order.mul(m, t)).collect();
    terms.sort_unstable();
    Ok(Sequence::from_sorted_unchecked(order.clone(), terms))
}

/// `||S||_g` for the generator `g` with `m g = 1`, as an exact rational.
pub fn norm_under(s: &Sequence, m: u64) -> Result<Ratio<u64>> {
    let n = s.n();
    if gcd(m, n) != 1 {
        return Err(Error::NotAUnit { m, n });
    }
    Ok(Ratio::new(s.transformed_sum(m), n))
}

/// Exhaustive minimum over all units; ties go to the smallest multiplier.
pub fn index(s: &Sequence) -> IndexValue {
    index_terms(s.terms(), s.modulus())
}

pub(crate) fn index_terms(terms: &[u64], order: &GroupOrder) -> IndexValue {
    let n = order.n();
    let mut best = (u64::MAX, 0);
    for m in order.units() {
        let sum = transformed_sum(terms, m, n);
        if sum < best.0 {
            best = (sum, m);
        }
    }
    IndexValue {
        numerator: best.0,
        denominator: n,
        argmin_unit: best.1,
    }
}

/// Parallel variant of [`index`] for large moduli; returns the same argmin.
pub fn index_par(s: &Sequence) -> IndexValue {
    let n = s.n();
    let units: Vec<u64> = s.modulus().units().collect();
    let (numerator, argmin_unit) = units
        .par_iter()
        .map(|&m| (s.transformed_sum(m), m))
        .min()
        .expect("units of Z/nZ are never empty");
    IndexValue {
        numerator,
        denominator: n,
        argmin_unit,
    }
}
