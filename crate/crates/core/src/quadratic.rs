//! Exact real numbers of the form `sum q_n sqrt(n)` with rational `q_n`
//! and square-free `n`.
//!
//! Square roots of distinct square-free integers are linearly independent
//! over the rationals, so a normalized expression is zero exactly when it
//! has no terms. Ordering therefore never needs a tie-break: the sign of a
//! nonzero expression is found by refining integer enclosures of each
//! square root until the enclosure of the sum excludes zero.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    BigRational::new(num.into(), den.into())
}

pub fn int(n: impl Into<BigInt>) -> Rational {
    BigRational::from_integer(n.into())
}

/// Splits `n = s^2 c` with `c` square-free.
pub fn square_free_part(n: u64) -> (u64, u64) {
    if n == 0 {
        return (0, 0);
    }
    let (mut rest, mut square_root) = (n, 1u64);
    let mut p = 2u64;
    while p.saturating_mul(p) <= rest {
        while rest % (p * p) == 0 {
            rest /= p * p;
            square_root *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (square_root, rest)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QuadraticExpr {
    // square-free radicand -> nonzero coefficient
    terms: BTreeMap<u64, Rational>,
}

impl QuadraticExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(q: Rational) -> Self {
        let mut out = Self::zero();
        out.accumulate(1, q);
        out
    }

    pub fn int(n: impl Into<BigInt>) -> Self {
        Self::rational(int(n))
    }

    pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        Self::rational(rational(num, den))
    }

    /// `sqrt(n)`, normalized so that `sqrt(8)` is stored as `2 sqrt(2)`.
    pub fn sqrt(n: u64) -> Self {
        Self::term(int(1), n)
    }

    /// `q sqrt(n)`.
    pub fn term(q: Rational, n: u64) -> Self {
        let (s, c) = square_free_part(n);
        let mut out = Self::zero();
        if c != 0 {
            out.accumulate(c, q * int(s));
        }
        out
    }

    fn accumulate(&mut self, radicand: u64, q: Rational) {
        if q.is_zero() {
            return;
        }
        let slot = self.terms.entry(radicand).or_insert_with(Rational::zero);
        *slot += q;
        if slot.is_zero() {
            self.terms.remove(&radicand);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.terms.iter().map(|(&n, q)| (n, q))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(|&n| n == 1)
    }

    pub fn rational_part(&self) -> Rational {
        self.terms.get(&1).cloned().unwrap_or_else(Rational::zero)
    }

    /// The rational value, if the expression has no irrational terms.
    pub fn as_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.rational_part())
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(&n, c)| (n, c * q)).collect(),
        }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Integer numerators over a common denominator (the denominator is
    /// positive and does not affect the sign).
    fn integer_numerators(&self) -> (Vec<(u64, BigInt)>, BigInt) {
        let den = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let nums = self
            .terms
            .iter()
            .map(|(&n, q)| (n, q.numer() * (&den / q.denom())))
            .collect();
        (nums, den)
    }

    /// Integer bounds `lo < 2^bits * x < hi` (or equal when rational).
    fn enclosure(nums: &[(u64, BigInt)], bits: u32) -> (BigInt, BigInt) {
        let (mut lo, mut hi) = (BigInt::zero(), BigInt::zero());
        for (n, c) in nums {
            if *n == 1 {
                let v = c << bits;
                lo += &v;
                hi += v;
                continue;
            }
            let s = (BigInt::from(*n) << (2 * bits)).sqrt();
            let s1 = &s + 1u32;
            if c.is_positive() {
                lo += c * &s;
                hi += c * s1;
            } else {
                lo += c * s1;
                hi += c * s;
            }
        }
        (lo, hi)
    }

    /// Exact sign, as an ordering against zero.
    pub fn signum(&self) -> Ordering {
        if self.is_zero() {
            return Ordering::Equal;
        }
        if let Some(q) = self.as_rational() {
            return q.cmp(&Rational::zero());
        }
        let (nums, _) = self.integer_numerators();
        let mut bits = 64u32;
        loop {
            let (lo, hi) = Self::enclosure(&nums, bits);
            if lo.is_positive() {
                return Ordering::Greater;
            }
            if hi.is_negative() {
                return Ordering::Less;
            }
            bits *= 2;
        }
    }

    /// `floor(x * scale)` for a positive integer `scale`, decided exactly.
    pub fn floor_scaled(&self, scale: &BigInt) -> BigInt {
        assert!(scale.is_positive());
        if let Some(q) = self.as_rational() {
            return (q * int(scale.clone())).floor().to_integer();
        }
        let (nums, den) = self.integer_numerators();
        let nums: Vec<_> = nums.into_iter().map(|(n, c)| (n, c * scale)).collect();
        let mut bits = 64u32;
        loop {
            let (lo, hi) = Self::enclosure(&nums, bits);
            let d = &den << bits;
            let (flo, fhi) = (lo.div_floor(&d), hi.div_floor(&d));
            if flo == fhi {
                return flo;
            }
            bits *= 2;
        }
    }

    /// Decimal expansion truncated to `digits` fractional digits. Display
    /// only; comparisons never go through this.
    pub fn to_decimal(&self, digits: u32) -> String {
        let neg = self.signum() == Ordering::Less;
        let abs = if neg { -self } else { self.clone() };
        let scale = BigInt::from(10u32).pow(digits);
        let v = abs.floor_scaled(&scale);
        let (whole, frac) = v.div_rem(&scale);
        let sign = if neg { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{whole}")
        } else {
            format!("{sign}{whole}.{frac:0>width$}", width = digits as usize)
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(&n, q)| q.to_f64().unwrap_or(f64::NAN) * (n as f64).sqrt())
            .sum()
    }

    /// Multiplicative inverse inside `Q(sqrt(n))`. Expressions mixing two or
    /// more irrational radicands are not supported.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidArgument("inverse of zero".into()));
        }
        let irrational: Vec<_> = self.terms.keys().copied().filter(|&n| n != 1).collect();
        match irrational.as_slice() {
            [] => Ok(Self::rational(self.rational_part().recip())),
            [n] => {
                let p = self.rational_part();
                let q = self.terms[n].clone();
                let norm = &p * &p - &q * &q * int(*n);
                let conj = Self::rational(p) - Self::term(q, *n);
                Ok(conj.scale(&norm.recip()))
            }
            _ => Err(Error::Unsupported(
                "inverse of an expression with several radicands".into(),
            )),
        }
    }
}

impl Ord for QuadraticExpr {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl PartialOrd for QuadraticExpr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Rational> for QuadraticExpr {
    fn from(q: Rational) -> Self {
        Self::rational(q)
    }
}

impl From<i64> for QuadraticExpr {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl Add<&QuadraticExpr> for &QuadraticExpr {
    type Output = QuadraticExpr;
    fn add(self, rhs: &QuadraticExpr) -> QuadraticExpr {
        let mut out = self.clone();
        for (&n, q) in &rhs.terms {
            out.accumulate(n, q.clone());
        }
        out
    }
}

impl Sub<&QuadraticExpr> for &QuadraticExpr {
    type Output = QuadraticExpr;
    fn sub(self, rhs: &QuadraticExpr) -> QuadraticExpr {
        let mut out = self.clone();
        for (&n, q) in &rhs.terms {
            out.accumulate(n, -q.clone());
        }
        out
    }
}

impl Mul<&QuadraticExpr> for &QuadraticExpr {
    type Output = QuadraticExpr;
    fn mul(self, rhs: &QuadraticExpr) -> QuadraticExpr {
        let mut out = QuadraticExpr::zero();
        for (&n, p) in &self.terms {
            for (&m, q) in &rhs.terms {
                // sqrt(n) sqrt(m) = g sqrt((n/g)(m/g)) for square-free n, m
                let g = n.gcd(&m);
                let radicand = (n / g)
                    .checked_mul(m / g)
                    .expect("radicand overflows u64");
                out.accumulate(radicand, p * q * int(g));
            }
        }
        out
    }
}

impl Neg for &QuadraticExpr {
    type Output = QuadraticExpr;
    fn neg(self) -> QuadraticExpr {
        QuadraticExpr {
            terms: self.terms.iter().map(|(&n, q)| (n, -q.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<QuadraticExpr> for QuadraticExpr {
            type Output = QuadraticExpr;
            fn $method(self, rhs: QuadraticExpr) -> QuadraticExpr {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&QuadraticExpr> for QuadraticExpr {
            type Output = QuadraticExpr;
            fn $method(self, rhs: &QuadraticExpr) -> QuadraticExpr {
                (&self).$method(rhs)
            }
        }
        impl $tr<QuadraticExpr> for &QuadraticExpr {
            type Output = QuadraticExpr;
            fn $method(self, rhs: QuadraticExpr) -> QuadraticExpr {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for QuadraticExpr {
    type Output = QuadraticExpr;
    fn neg(self) -> QuadraticExpr {
        -&self
    }
}

impl fmt::Display for QuadraticExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (&n, q)) in self.terms.iter().enumerate() {
            let (neg, abs) = (q.is_negative(), q.abs());
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if n == 1 {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "sqrt({n})")?;
            } else {
                write!(f, "{abs}*sqrt({n})")?;
            }
        }
        Ok(())
    }
}

/// JSON shape of an exact rational: `{"num": "-3", "den": "2"}`.
#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: String,
    den: String,
}

impl From<&Rational> for RationalRepr {
    fn from(q: &Rational) -> Self {
        Self {
            num: q.numer().to_string(),
            den: q.denom().to_string(),
        }
    }
}

impl TryFrom<RationalRepr> for Rational {
    type Error = String;
    fn try_from(r: RationalRepr) -> std::result::Result<Self, String> {
        let num: BigInt = r.num.parse().map_err(|e| format!("bad numerator: {e}"))?;
        let den: BigInt = r.den.parse().map_err(|e| format!("bad denominator: {e}"))?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(BigRational::new(num, den))
    }
}

/// `#[serde(with = "rational_serde")]` for [`Rational`] fields.
pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        RationalRepr::from(q).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        RationalRepr::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

impl Serialize for QuadraticExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, RationalRepr> = self
            .terms
            .iter()
            .map(|(n, q)| (n.to_string(), q.into()))
            .collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadraticExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, RationalRepr>::deserialize(d)?;
        let mut out = QuadraticExpr::zero();
        for (k, v) in map {
            let n: u64 = k.parse().map_err(serde::de::Error::custom)?;
            let q: Rational = v.try_into().map_err(serde::de::Error::custom)?;
            out = out + QuadraticExpr::term(q, n);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> QuadraticExpr {
        QuadraticExpr::ratio(n, d)
    }

    fn sqrt(n: u64) -> QuadraticExpr {
        QuadraticExpr::sqrt(n)
    }

    #[test]
    fn square_free_normalization() {
        assert_eq!(square_free_part(8), (2, 2));
        assert_eq!(square_free_part(72), (6, 2));
        assert_eq!(square_free_part(1), (1, 1));
        assert_eq!(square_free_part(0), (0, 0));
        assert_eq!(square_free_part(97), (1, 97));
        assert_eq!(sqrt(8), QuadraticExpr::term(int(2), 2));
        assert_eq!(sqrt(9), QuadraticExpr::int(3));
        assert!(sqrt(0).is_zero());
    }

    #[test]
    fn compare_examples() {
        assert_eq!(sqrt(2).cmp(&q(7, 5)), Ordering::Greater);
        assert_eq!(sqrt(9).cmp(&QuadraticExpr::int(3)), Ordering::Equal);
        let lhs = sqrt(10) - QuadraticExpr::int(3);
        let rhs = sqrt(5).scale(&rational(1, 5));
        assert_eq!(lhs.cmp(&rhs), Ordering::Less);
    }

    #[test]
    fn nearly_equal_values_are_separated() {
        // 99^2 * 2 = 19602 = 140^2 + 2, so 99 sqrt(2) - 140 is tiny but positive
        let x = QuadraticExpr::term(int(99), 2) - QuadraticExpr::int(140);
        assert_eq!(x.signum(), Ordering::Greater);
        // sqrt(2) + sqrt(3) vs sqrt(10): 5 + 2 sqrt(6) < 10
        assert!(sqrt(2) + sqrt(3) < sqrt(10));
    }

    #[test]
    fn arithmetic_identities() {
        let eps = sqrt(14) - QuadraticExpr::int(3);
        // 2k eps + eps^2 = alpha
        let lhs = eps.scale(&int(6)) + eps.square();
        assert_eq!(lhs, QuadraticExpr::int(5));
        let x = sqrt(3) - QuadraticExpr::int(1);
        assert_eq!(x.square(), QuadraticExpr::int(4) - sqrt(3).scale(&int(2)));
        assert_eq!(sqrt(6) * sqrt(10), sqrt(15).scale(&int(2)));
        let inv = x.inverse().unwrap();
        assert_eq!(&inv * &x, QuadraticExpr::int(1));
        assert!((sqrt(2) + sqrt(3)).inverse().is_err());
        assert!(QuadraticExpr::zero().inverse().is_err());
    }

    #[test]
    fn decimals() {
        assert_eq!((sqrt(14) - QuadraticExpr::int(3)).to_decimal(10), "0.7416573867");
        assert_eq!(q(-1, 4).to_decimal(3), "-0.250");
        assert_eq!(sqrt(2).to_decimal(0), "1");
        assert_eq!(
            sqrt(2).floor_scaled(&BigInt::from(10).pow(30)).to_string(),
            "1414213562373095048801688724209"
        );
    }

    #[test]
    fn display_and_serde() {
        let x = q(-3, 2) + QuadraticExpr::term(int(-2), 14) + sqrt(2);
        assert_eq!(x.to_string(), "-3/2 + sqrt(2) - 2*sqrt(14)");
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(
            json,
            r#"{"1":{"num":"-3","den":"2"},"14":{"num":"-2","den":"1"},"2":{"num":"1","den":"1"}}"#
        );
        assert_eq!(serde_json::from_str::<QuadraticExpr>(&json).unwrap(), x);
    }

    fn expr() -> impl Strategy<Value = QuadraticExpr> {
        prop::collection::vec((-20i64..20, 1i64..6, 1u64..30), 0..4).prop_map(|ts| {
            ts.into_iter().fold(QuadraticExpr::zero(), |acc, (n, d, r)| {
                acc + QuadraticExpr::term(rational(n, d), r)
            })
        })
    }

    proptest! {
        #[test]
        fn order_is_total_and_consistent(x in expr(), y in expr(), z in expr()) {
            prop_assert_eq!(x.cmp(&x), Ordering::Equal);
            prop_assert_eq!(x.cmp(&y), y.cmp(&x).reverse());
            if x <= y && y <= z {
                prop_assert!(x <= z);
            }
            prop_assert_eq!(x.cmp(&y) == Ordering::Equal, x == y);
        }

        #[test]
        fn sign_matches_float_when_clear(x in expr()) {
            let f = x.to_f64();
            if f.abs() > 1e-9 {
                prop_assert_eq!(x.signum(), f.partial_cmp(&0.0).unwrap());
            }
        }
    }
}
