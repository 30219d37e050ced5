//! Exact modular arithmetic over `Z/nZ` with representatives in `[1, n]`.
//!
//! The zero element of the group is stored as `n` rather than `0`, so sums
//! such as `n`, `2n`, `3n` read off directly from transformed sequences.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus accepted. Products `m * x` with `m, x <= n` stay below
/// `2^62` and never overflow `u64`, but all products are widened anyway.
pub const MAX_MODULUS: u64 = 1 << 31;

/// The order `n` of a cyclic group together with its prime factorization.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupOrder {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl GroupOrder {
    /// Factorizes `n` by trial division.
    pub fn new(n: u64) -> Result<Self> {
        factorize(n)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Prime factors with exponents, primes strictly ascending.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Multiplies the factorization back out.
    pub fn expand(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }

    /// Euler's totient, computed from the factorization.
    pub fn totient(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    pub fn is_unit(&self, m: u64) -> bool {
        gcd(m, self.n) == 1
    }

    pub fn reduce(&self, x: i64) -> Residue {
        reduce_mod(x, self)
    }

    /// `|m * x|_n` for nonnegative operands, widened before the multiply.
    #[inline]
    pub fn mul(&self, m: u64, x: u64) -> u64 {
        let r = ((m as u128 * x as u128) % self.n as u128) as u64;
        if r == 0 {
            self.n
        } else {
            r
        }
    }

    pub fn units(&self) -> Units<'_> {
        units(self)
    }

    pub fn inverse(&self, m: u64) -> Result<u64> {
        mod_inverse(m, self)
    }
}

impl fmt::Display for GroupOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.n)
    }
}

/// An element of `Z/nZ` represented in `[1, n]`; `n` is the zero element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == self.modulus
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// `|x|_n`: the unique integer in `[1, n]` congruent to `x`.
pub fn reduce_mod(x: i64, n: &GroupOrder) -> Residue {
    let r = (x as i128).rem_euclid(n.n as i128) as u64;
    let value = if r == 0 { n.n } else { r };
    Residue {
        value,
        modulus: n.n,
    }
}

/// Same as [`reduce_mod`] for unsigned inputs of any width, returning the raw value.
#[inline]
pub fn reduce_u128(x: u128, n: u64) -> u64 {
    let r = (x % n as u128) as u64;
    if r == 0 {
        n
    } else {
        r
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Ascending iterator over the units of `Z/nZ`, filtered by gcd.
#[derive(Clone, Debug)]
pub struct Units<'a> {
    order: &'a GroupOrder,
    next: u64,
}

impl Iterator for Units<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        while self.next <= self.order.n {
            let m = self.next;
            self.next += 1;
            if gcd(m, self.order.n) == 1 {
                return Some(m);
            }
        }
        None
    }
}

/// Every `m` in `[1, n]` coprime to `n`, ascending.
pub fn units(n: &GroupOrder) -> Units<'_> {
    Units { order: n, next: 1 }
}

/// Inverse of `m` modulo `n` via the extended Euclidean algorithm, in `[1, n]`.
pub fn mod_inverse(m: u64, n: &GroupOrder) -> Result<u64> {
    let modulus = n.n as i128;
    let (mut old_r, mut r) = ((m as i128).rem_euclid(modulus), modulus);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return Err(Error::NotAUnit { m, n: n.n });
    }
    let v = old_s.rem_euclid(modulus) as u64;
    Ok(if v == 0 { n.n } else { v })
}

/// Trial-division factorization. Moduli are desk scale, so nothing fancier is needed.
pub fn factorize(n: u64) -> Result<GroupOrder> {
    if !(2..=MAX_MODULUS).contains(&n) {
        return Err(Error::InvalidModulus(n));
    }
    let mut factors = Vec::new();
    let mut rest = n;
    let mut p = 2u64;
    while p * p <= rest {
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(GroupOrder { n, factors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn order(n: u64) -> GroupOrder {
        factorize(n).unwrap()
    }

    #[test]
    fn reduce_mod_examples() {
        assert_eq!(reduce_mod(-3, &order(10)).value(), 7);
        assert_eq!(reduce_mod(70, &order(35)).value(), 35);
        assert!(reduce_mod(70, &order(35)).is_zero());
        assert_eq!(reduce_mod(744, &order(35)).value(), 9);
    }

    #[test]
    fn reduce_mod_exhaustive_small() {
        for n in 2..=100u64 {
            let g = order(n);
            let bound = 10 * n as i64;
            for x in -bound..=bound {
                let r = reduce_mod(x, &g).value();
                assert!((1..=n).contains(&r));
                assert_eq!((x - r as i64).rem_euclid(n as i64), 0);
            }
        }
    }

    #[test]
    fn units_examples() {
        assert_eq!(units(&order(10)).collect::<Vec<_>>(), vec![1, 3, 7, 9]);
        assert_eq!(units(&order(2)).collect::<Vec<_>>(), vec![1]);
        assert_eq!(units(&order(35)).count(), 24);
        for n in 2..300 {
            let g = order(n);
            assert_eq!(units(&g).count() as u64, g.totient(), "n={n}");
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inverse(1, &order(10)).unwrap(), 1);
        assert_eq!(mod_inverse(24, &order(35)).unwrap(), 19);
        assert_eq!(mod_inverse(9, &order(35)).unwrap(), 4);
        assert_eq!(mod_inverse(1, &order(2)).unwrap(), 1);
        assert!(matches!(
            mod_inverse(10, &order(35)),
            Err(Error::NotAUnit { m: 10, n: 35 })
        ));
    }

    #[test]
    fn factorize_examples() {
        assert_eq!(order(35).factors(), &[(5, 1), (7, 1)]);
        assert_eq!(order(1225).factors(), &[(5, 2), (7, 2)]);
        assert_eq!(order(7).factors(), &[(7, 1)]);
        assert!(matches!(factorize(1), Err(Error::InvalidModulus(1))));
        assert!(matches!(factorize(0), Err(Error::InvalidModulus(0))));
    }

    #[test]
    fn units_closed_under_inverse_and_product() {
        for n in 2..=120 {
            let g = order(n);
            let us: Vec<u64> = units(&g).collect();
            for &u in &us {
                let v = mod_inverse(u, &g).unwrap();
                assert!(us.binary_search(&v).is_ok());
                assert_eq!(g.mul(u, v), 1);
                for &w in &us {
                    assert!(us.binary_search(&g.mul(u, w)).is_ok());
                }
            }
        }
    }

    #[test]
    fn factorize_round_trips_up_to_a_million() {
        for n in 2u64..=1_000_000 {
            let g = order(n);
            assert_eq!(g.expand(), n);
            assert!(g.factors().windows(2).all(|w| w[0].0 < w[1].0));
            assert!(g.factors().iter().all(|&(p, e)| p >= 2 && e >= 1));
        }
    }

    proptest! {
        #[test]
        fn reduce_mod_is_additive(x in -1_000_000i64..1_000_000, y in -1_000_000i64..1_000_000, n in 2u64..5000) {
            let g = order(n);
            let lhs = reduce_mod(x + y, &g);
            let rhs = reduce_mod(
                reduce_mod(x, &g).value() as i64 + reduce_mod(y, &g).value() as i64,
                &g,
            );
            prop_assert_eq!(lhs, rhs);
        }

    }
}
