//! Exact arithmetic for positive reals of the form `Π pᵢ^{rᵢ}` with rational
//! exponents, and for their logarithms `Σ rᵢ log pᵢ`.
//!
//! Both are stored as a canonical map `prime -> exponent`. Unique
//! factorization makes structural equality the same thing as equality of
//! the real numbers, so structure constants can be compared with zero
//! tolerance. Ordering is only available through [`PosExact::to_float`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Shorthand for building a rational from machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

const SIEVE_LIMIT: usize = 1_000_000;

fn primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut composite = vec![false; SIEVE_LIMIT + 1];
        let mut out = Vec::new();
        for p in 2..=SIEVE_LIMIT {
            if composite[p] {
                continue;
            }
            out.push(p as u64);
            let mut m = p * p;
            while m <= SIEVE_LIMIT {
                composite[m] = true;
                m += p;
            }
        }
        out
    })
}

/// Factor a positive integer into `(prime, multiplicity)` pairs.
fn factor_uint(n: &BigUint) -> Result<Vec<(u64, i64)>> {
    if let Some(mut m) = n.to_u64() {
        let mut out = Vec::new();
        for &p in primes() {
            if p.saturating_mul(p) > m {
                break;
            }
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
        }
        if m > 1 {
            let bound = SIEVE_LIMIT as u64;
            if m > bound * bound {
                return Err(Error::Domain(format!(
                    "cannot certify factorization of cofactor {m}"
                )));
            }
            out.push((m, 1));
        }
        return Ok(out);
    }
    let mut m = n.clone();
    let mut out = Vec::new();
    for &p in primes() {
        let bp = BigUint::from(p);
        let mut e = 0;
        while (&m % &bp).is_zero() {
            m /= &bp;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        if m.to_u64().is_some() {
            let rest = factor_uint(&m)?;
            out.extend(rest);
            out.sort();
            return Ok(out);
        }
    }
    Err(Error::Domain(format!(
        "integer {n} has a cofactor beyond the trial-division bound"
    )))
}

/// Canonical `prime -> rational` map shared by [`PosExact`] and [`LogValue`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct PrimeMap(BTreeMap<u64, Rational>);

impl PrimeMap {
    fn add_scaled(&mut self, other: &PrimeMap, scale: &Rational) {
        if scale.is_zero() {
            return;
        }
        for (p, r) in &other.0 {
            let entry = self.0.entry(*p).or_insert_with(Rational::zero);
            *entry += r * scale;
            if entry.is_zero() {
                self.0.remove(p);
            }
        }
    }

    fn scaled(&self, scale: &Rational) -> PrimeMap {
        let mut out = PrimeMap::default();
        out.add_scaled(self, scale);
        out
    }

    /// `Σ r·ln p`, summed in ascending magnitude.
    fn log_sum(&self) -> f64 {
        let mut terms: Vec<f64> = self
            .0
            .iter()
            .map(|(p, r)| r.to_f64().unwrap_or(f64::NAN) * (*p as f64).ln())
            .collect();
        terms.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        terms.iter().sum()
    }

    fn serialize_triples<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for (p, r) in &self.0 {
            seq.serialize_element(&(p, IntRepr(r.numer()), IntRepr(r.denom())))?;
        }
        seq.end()
    }
}

/// Integers serialize as JSON numbers when they fit in `i64`, else as strings.
struct IntRepr<'a>(&'a BigInt);

impl Serialize for IntRepr<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => serializer.serialize_i64(v),
            None => serializer.serialize_str(&self.0.to_string()),
        }
    }
}

/// An exact positive real `Π p^{r}`. The empty map is `1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PosExact(PrimeMap);

/// An exact real `Σ r·log p`. The empty map is `0`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LogValue(PrimeMap);

/// Factor a positive rational into prime powers with integer exponents.
pub fn factor_positive(x: &Rational) -> Result<PosExact> {
    if !x.is_positive() {
        return Err(Error::Domain(format!("cannot factor non-positive value {x}")));
    }
    let mut map = BTreeMap::new();
    let num = x.numer().magnitude();
    let den = x.denom().magnitude();
    for (p, e) in factor_uint(num)? {
        map.insert(p, int(e));
    }
    for (p, e) in factor_uint(den)? {
        // numerator and denominator are coprime, so no key collides
        map.insert(p, int(-e));
    }
    Ok(PosExact(PrimeMap(map)))
}

/// `Π xᵢ^{eᵢ}` over the given terms.
pub fn pe_mul_pow(terms: &[(PosExact, Rational)]) -> PosExact {
    let mut acc = PrimeMap::default();
    for (x, e) in terms {
        acc.add_scaled(&x.0, e);
    }
    PosExact(acc)
}

/// Exact equality of two positive reals.
pub fn pe_eq(a: &PosExact, b: &PosExact) -> bool {
    a == b
}

impl PosExact {
    pub fn one() -> Self {
        PosExact::default()
    }

    pub fn from_integer(v: i64) -> Result<Self> {
        factor_positive(&int(v))
    }

    pub fn is_one(&self) -> bool {
        self.0 .0.is_empty()
    }

    /// Exponent of `p`, zero when absent.
    pub fn exponent(&self, p: u64) -> Rational {
        self.0 .0.get(&p).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.0 .0.iter().map(|(p, r)| (*p, r))
    }

    /// Build from `(prime, exponent)` pairs. Keys are trusted to be prime.
    pub fn from_exponents<I: IntoIterator<Item = (u64, Rational)>>(it: I) -> Self {
        let mut acc = PrimeMap::default();
        for (p, r) in it {
            let single = PrimeMap(BTreeMap::from([(p, Rational::one())]));
            acc.add_scaled(&single, &r);
        }
        PosExact(acc)
    }

    pub fn mul(&self, other: &PosExact) -> PosExact {
        let mut acc = self.0.clone();
        acc.add_scaled(&other.0, &Rational::one());
        PosExact(acc)
    }

    pub fn div(&self, other: &PosExact) -> PosExact {
        let mut acc = self.0.clone();
        acc.add_scaled(&other.0, &-Rational::one());
        PosExact(acc)
    }

    pub fn pow(&self, e: &Rational) -> PosExact {
        PosExact(self.0.scaled(e))
    }

    pub fn recip(&self) -> PosExact {
        self.pow(&-Rational::one())
    }

    pub fn ln(&self) -> LogValue {
        LogValue(self.0.clone())
    }

    /// Floating-point value; saturates to `0` or `+inf` on under/overflow.
    pub fn to_float(&self) -> f64 {
        self.0.log_sum().exp()
    }

    /// Like [`to_float`](Self::to_float) but `None` when the result is not
    /// a finite positive number.
    pub fn checked_float(&self) -> Option<f64> {
        let v = self.to_float();
        (v.is_finite() && v > 0.0).then_some(v)
    }

    /// The value as a rational, when all exponents are integers.
    pub fn to_rational(&self) -> Option<Rational> {
        let mut out = Rational::one();
        for (p, r) in &self.0 .0 {
            if !r.is_integer() {
                return None;
            }
            let e = r.to_integer().to_i32()?;
            out *= int(*p as i64).pow(e);
        }
        Some(out)
    }
}

impl LogValue {
    pub fn zero() -> Self {
        LogValue::default()
    }

    /// `log x` for a positive rational `x`.
    pub fn log_of(x: &Rational) -> Result<Self> {
        Ok(factor_positive(x)?.ln())
    }

    pub fn is_zero(&self) -> bool {
        self.0 .0.is_empty()
    }

    pub fn coefficient(&self, p: u64) -> Rational {
        self.0 .0.get(&p).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.0 .0.iter().map(|(p, r)| (*p, r))
    }

    pub fn add(&self, other: &LogValue) -> LogValue {
        self.add_scaled(other, &Rational::one())
    }

    pub fn sub(&self, other: &LogValue) -> LogValue {
        self.add_scaled(other, &-Rational::one())
    }

    /// `self + scale·other`
    pub fn add_scaled(&self, other: &LogValue, scale: &Rational) -> LogValue {
        let mut acc = self.0.clone();
        acc.add_scaled(&other.0, scale);
        LogValue(acc)
    }

    pub fn scale(&self, s: &Rational) -> LogValue {
        LogValue(self.0.scaled(s))
    }

    pub fn neg(&self) -> LogValue {
        self.scale(&-Rational::one())
    }

    pub fn exp(&self) -> PosExact {
        PosExact(self.0.clone())
    }

    pub fn to_float(&self) -> f64 {
        self.0.log_sum()
    }
}

impl Serialize for PosExact {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize_triples(serializer)
    }
}

impl Serialize for LogValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize_triples(serializer)
    }
}

fn fmt_map(map: &PrimeMap, f: &mut fmt::Formatter<'_>, empty: &str, op: &str) -> fmt::Result {
    if map.0.is_empty() {
        return f.write_str(empty);
    }
    let parts: Vec<String> = map.0.iter().map(|(p, r)| format!("{p}{op}({r})")).collect();
    f.write_str(&parts.join(" "))
}

impl fmt::Display for PosExact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_map(&self.0, f, "1", "^")
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_map(&self.0, f, "0", ":log*")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pe(pairs: &[(u64, i64, i64)]) -> PosExact {
        PosExact::from_exponents(pairs.iter().map(|&(p, n, d)| (p, rat(n, d))))
    }

    #[test]
    fn factor_examples() {
        assert!(factor_positive(&int(1)).unwrap().is_one());
        assert_eq!(factor_positive(&rat(12, 5)).unwrap(), pe(&[(2, 2, 1), (3, 1, 1), (5, -1, 1)]));
        // 36/60 reduces to 3/5
        assert_eq!(factor_positive(&rat(36, 60)).unwrap(), pe(&[(3, 1, 1), (5, -1, 1)]));
    }

    #[test]
    fn factor_rejects_nonpositive() {
        assert!(matches!(factor_positive(&int(0)), Err(Error::Domain(_))));
        assert!(matches!(factor_positive(&rat(-3, 2)), Err(Error::Domain(_))));
    }

    #[test]
    fn factor_large_prime_cofactor() {
        // 999983 is the largest prime below 10^6; 1000003 is prime above it
        let x = int(999_983 * 1_000_003);
        assert_eq!(factor_positive(&x).unwrap(), pe(&[(999_983, 1, 1), (1_000_003, 1, 1)]));
    }

    #[test]
    fn factor_bigint_input() {
        let big = Rational::from_integer(BigInt::from(2u8).pow(80) * BigInt::from(3u8));
        assert_eq!(factor_positive(&big).unwrap(), pe(&[(2, 80, 1), (3, 1, 1)]));
    }

    #[test]
    fn mul_pow_examples() {
        assert_eq!(pe_mul_pow(&[(pe(&[(2, 1, 1)]), int(3))]), pe(&[(2, 3, 1)]));
        let half = pe_mul_pow(&[(pe(&[(2, 1, 1)]), rat(1, 2)), (pe(&[(2, 1, 1)]), rat(-1, 2))]);
        assert!(half.is_one());
        let w = pe_mul_pow(&[
            (factor_positive(&rat(2, 5)).unwrap(), rat(1, 6)),
            (factor_positive(&rat(3, 5)).unwrap(), rat(1, 4)),
        ]);
        assert_eq!(w, pe(&[(2, 1, 6), (3, 1, 4), (5, -5, 12)]));
        assert!(pe_eq(&w, &pe(&[(2, 1, 6), (3, 1, 4), (5, -5, 12)])));
    }

    #[test]
    fn zero_exponents_are_dropped() {
        assert!(pe_eq(&pe(&[(2, 0, 1)]), &PosExact::one()));
    }

    #[test]
    fn float_values() {
        assert_eq!(PosExact::one().to_float(), 1.0);
        assert!((pe(&[(2, 1, 1)]).to_float() - 2.0).abs() < 1e-15);
        // 2^{1/6}·3^{1/4}·5^{-5/12}, evaluated independently
        let expected = (2f64.ln() / 6.0 + 3f64.ln() / 4.0 - 5.0 * 5f64.ln() / 12.0).exp();
        let got = pe(&[(2, 1, 6), (3, 1, 4), (5, -5, 12)]).to_float();
        assert!(((got - expected) / expected).abs() < 1e-12);
        let direct = 0.4f64.powf(1.0 / 6.0) * 0.6f64.powf(0.25);
        assert!(((got - direct) / direct).abs() < 1e-12);
        // 30-digit mpmath reference
        assert!((got - 0.755_465_224_643_405_3).abs() < 1e-12);
    }

    #[test]
    fn float_saturates() {
        let huge = pe(&[(2, 5000, 1)]);
        assert_eq!(huge.to_float(), f64::INFINITY);
        assert!(huge.checked_float().is_none());
        assert_eq!(huge.recip().to_float(), 0.0);
    }

    #[test]
    fn log_roundtrip() {
        let x = factor_positive(&rat(18, 35)).unwrap();
        assert_eq!(x.ln().exp(), x);
        assert_eq!(x.to_rational().unwrap(), rat(18, 35));
        assert!((x.ln().to_float() - (18.0f64 / 35.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn serializes_sorted_triples() {
        let w = pe(&[(5, -5, 12), (2, 1, 6), (3, 1, 4)]);
        assert_eq!(serde_json::to_string(&w).unwrap(), "[[2,1,6],[3,1,4],[5,-5,12]]");
        assert_eq!(serde_json::to_string(&PosExact::one()).unwrap(), "[]");
    }
}
