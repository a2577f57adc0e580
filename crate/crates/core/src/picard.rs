//! Divisor classes on the plane blown up at `r` points, and on blowups of
//! the ruled surfaces `F1` and `F0`.
//!
//! A [`PicardClass`] `(d; m1,...,mr)` stands for `dH - m1 E1 - ... - mr Er`.
//! The lattice is odd unimodular of signature `(1, r)`: `H^2 = 1`,
//! `Ei^2 = -1`, `H.Ei = 0`. Multiplicities may be negative.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of `Pic` of the plane blown up at `r` points.
///
/// The number of points is explicit: `(3; 1,1,0)` and `(3; 1,1)` are
/// different classes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PicardClass {
    degree: BigInt,
    mults: Vec<BigInt>,
}

impl PicardClass {
    pub fn new(degree: impl Into<BigInt>, mults: Vec<BigInt>) -> Self {
        Self {
            degree: degree.into(),
            mults,
        }
    }

    pub fn from_ints(degree: i64, mults: &[i64]) -> Self {
        Self::new(degree, mults.iter().map(|&m| BigInt::from(m)).collect())
    }

    /// `(d; mu^r)`.
    pub fn uniform(degree: impl Into<BigInt>, mult: impl Into<BigInt>, r: usize) -> Self {
        Self::new(degree, vec![mult.into(); r])
    }

    pub fn zero(r: usize) -> Self {
        Self::uniform(0, 0, r)
    }

    /// The pullback of a line, `(1; 0^r)`.
    pub fn line(r: usize) -> Self {
        Self::uniform(1, 0, r)
    }

    /// The exceptional curve over point `i`, which is `(0; ..., -1, ...)` in
    /// these coordinates.
    pub fn exceptional(r: usize, i: usize) -> Self {
        let mut mults = vec![BigInt::zero(); r];
        mults[i] = BigInt::from(-1);
        Self::new(0, mults)
    }

    pub fn r(&self) -> usize {
        self.mults.len()
    }

    pub fn degree(&self) -> &BigInt {
        &self.degree
    }

    pub fn mults(&self) -> &[BigInt] {
        &self.mults
    }

    /// Multiplicity at point `i`, i.e. the coefficient `m_i` (so that
    /// `L . E_i = m_i`).
    pub fn mult(&self, i: usize) -> &BigInt {
        &self.mults[i]
    }

    pub fn into_parts(self) -> (BigInt, Vec<BigInt>) {
        (self.degree, self.mults)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.r() != other.r() {
            return Err(Error::Dimension {
                left: self.r(),
                right: other.r(),
            });
        }
        Ok(())
    }

    pub fn intersect(&self, other: &Self) -> Result<BigInt> {
        self.check_dim(other)?;
        Ok(self.intersect_unchecked(other))
    }

    pub(crate) fn intersect_unchecked(&self, other: &Self) -> BigInt {
        let mut acc = &self.degree * &other.degree;
        for (a, b) in self.mults.iter().zip(&other.mults) {
            acc -= a * b;
        }
        acc
    }

    pub fn self_intersection(&self) -> BigInt {
        self.intersect_unchecked(self)
    }

    /// `-K . L = 3d - sum m_i`.
    pub fn anticanonical_degree(&self) -> BigInt {
        let s: BigInt = self.mults.iter().sum();
        BigInt::from(3) * &self.degree - s
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::new(
            &self.degree + &other.degree,
            self.mults
                .iter()
                .zip(&other.mults)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self::new(
            &self.degree - &other.degree,
            self.mults
                .iter()
                .zip(&other.mults)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(&self.degree * k, self.mults.iter().map(|m| m * k).collect())
    }

    /// Multiplicities in non-increasing order (stable).
    pub fn sorted_desc(&self) -> Self {
        let mut mults = self.mults.clone();
        mults.sort_by(|a, b| b.cmp(a));
        Self::new(self.degree.clone(), mults)
    }

    /// Negative multiplicities replaced by zero.
    pub fn clamped(&self) -> Self {
        Self::new(
            self.degree.clone(),
            self.mults
                .iter()
                .map(|m| if m.is_negative() { BigInt::zero() } else { m.clone() })
                .collect(),
        )
    }

    /// True when the two classes agree up to a permutation of the
    /// multiplicities.
    pub fn equal_up_to_permutation(&self, other: &Self) -> bool {
        self.r() == other.r() && self.sorted_desc() == other.sorted_desc()
    }
}

/// `K = (-3; (-1)^r)`.
pub fn canonical_class(r: usize) -> PicardClass {
    PicardClass::uniform(-3, -1, r)
}

/// `(d+1)(d+2)/2 - r mu(mu+1)/2`.
pub fn chi(d: impl Into<BigInt>, mu: impl Into<BigInt>, r: impl Into<BigInt>) -> BigInt {
    let (d, mu, r) = (d.into(), mu.into(), r.into());
    let plane = (&d + 1) * (&d + 2) / 2;
    let points = r * &mu * (&mu + 1) / 2;
    plane - points
}

/// Riemann-Roch: `1 + (L^2 - K.L)/2`. The numerator is always even.
pub fn chi_class(l: &PicardClass) -> BigInt {
    let twice = l.self_intersection() + l.anticanonical_degree();
    debug_assert!((&twice % BigInt::from(2)).is_zero());
    BigInt::one() + twice / 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl From<Ordering> for Sign {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }
}

/// Sign of `sum m_i - sqrt(r) d` with the integers that decide it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NagataDeficit {
    pub sign: Sign,
    #[serde(with = "crate::picard::bigint_serde")]
    pub mult_sum: BigInt,
    /// `(sum m_i)^2`.
    #[serde(with = "crate::picard::bigint_serde")]
    pub mult_sum_squared: BigInt,
    /// `r d^2`.
    #[serde(with = "crate::picard::bigint_serde")]
    pub r_degree_squared: BigInt,
}

impl NagataDeficit {
    /// True when the class respects `sum m_i <= sqrt(r) d`.
    pub fn satisfies_bound(&self) -> bool {
        self.sign != Sign::Positive
    }
}

/// Serde for a `BigInt` as a decimal string; integers are accepted on input.
pub mod bigint_serde {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Text(String),
        Int(i64),
    }

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
            Repr::Int(i) => Ok(i.into()),
        }
    }
}

/// Decides the sign of `sum m_i - sqrt(r) deg` exactly.
pub fn nagata_deficit(l: &PicardClass) -> Result<NagataDeficit> {
    if l.degree().is_negative() {
        return Err(Error::Precondition(format!(
            "nagata deficit needs a nonnegative degree, got {}",
            l.degree()
        )));
    }
    let mult_sum: BigInt = l.mults().iter().sum();
    let mult_sum_squared = &mult_sum * &mult_sum;
    let r_degree_squared = BigInt::from(l.r()) * l.degree() * l.degree();
    let sign = if mult_sum.is_negative() {
        Sign::Negative
    } else {
        mult_sum_squared.cmp(&r_degree_squared).into()
    };
    Ok(NagataDeficit {
        sign,
        mult_sum,
        mult_sum_squared,
        r_degree_squared,
    })
}

/// `floor(sqrt(n))` for `n >= 0`.
pub fn isqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "isqrt of a negative number");
    n.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Surface {
    F0,
    F1,
}

/// A class on a blowup of `F1` or `F0`.
///
/// * `F1 { d, e, mults }` is `(d:e, m...)_1 = dA0 - eA1 - sum m_i E_i`, with
///   `A0` a line section and `A1` the exceptional section.
/// * `F0 { a, b, mults }` is `(a x b: m...)_0 = O(a, b) - sum m_i E_i`; its
///   degree on a horizontal ruling is `a` and on a fibre is `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RuledClass {
    F1 {
        d: BigInt,
        e: BigInt,
        mults: Vec<BigInt>,
    },
    F0 {
        a: BigInt,
        b: BigInt,
        mults: Vec<BigInt>,
    },
}

impl RuledClass {
    pub fn f1(d: impl Into<BigInt>, e: impl Into<BigInt>, mults: Vec<BigInt>) -> Self {
        RuledClass::F1 {
            d: d.into(),
            e: e.into(),
            mults,
        }
    }

    pub fn f0(a: impl Into<BigInt>, b: impl Into<BigInt>, mults: Vec<BigInt>) -> Self {
        RuledClass::F0 {
            a: a.into(),
            b: b.into(),
            mults,
        }
    }

    pub fn f1_ints(d: i64, e: i64, mults: &[i64]) -> Self {
        Self::f1(d, e, mults.iter().map(|&m| BigInt::from(m)).collect())
    }

    pub fn f0_ints(a: i64, b: i64, mults: &[i64]) -> Self {
        Self::f0(a, b, mults.iter().map(|&m| BigInt::from(m)).collect())
    }

    /// `(u x v)_1`, stored as `(u : u - v)_1`.
    pub fn f1_product(u: impl Into<BigInt>, v: impl Into<BigInt>, mults: Vec<BigInt>) -> Self {
        let u = u.into();
        let e = &u - v.into();
        RuledClass::F1 { d: u, e, mults }
    }

    pub fn zero(surface: Surface, n: usize) -> Self {
        match surface {
            Surface::F0 => Self::f0(0, 0, vec![BigInt::zero(); n]),
            Surface::F1 => Self::f1(0, 0, vec![BigInt::zero(); n]),
        }
    }

    /// Canonical class of the surface blown up at `n` points.
    pub fn canonical(surface: Surface, n: usize) -> Self {
        let mults = vec![BigInt::from(-1); n];
        match surface {
            Surface::F0 => Self::f0(-2, -2, mults),
            Surface::F1 => Self::f1(-3, -1, mults),
        }
    }

    pub fn surface(&self) -> Surface {
        match self {
            RuledClass::F0 { .. } => Surface::F0,
            RuledClass::F1 { .. } => Surface::F1,
        }
    }

    pub fn mults(&self) -> &[BigInt] {
        match self {
            RuledClass::F0 { mults, .. } | RuledClass::F1 { mults, .. } => mults,
        }
    }

    pub(crate) fn mults_mut(&mut self) -> &mut Vec<BigInt> {
        match self {
            RuledClass::F0 { mults, .. } | RuledClass::F1 { mults, .. } => mults,
        }
    }

    pub fn n_points(&self) -> usize {
        self.mults().len()
    }

    pub fn is_zero(&self) -> bool {
        let head = match self {
            RuledClass::F0 { a, b, .. } => a.is_zero() && b.is_zero(),
            RuledClass::F1 { d, e, .. } => d.is_zero() && e.is_zero(),
        };
        head && self.mults().iter().all(Zero::is_zero)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.surface() != other.surface() {
            return Err(Error::InvalidArgument(format!(
                "cannot combine a class on {:?} with one on {:?}",
                self.surface(),
                other.surface()
            )));
        }
        if self.n_points() != other.n_points() {
            return Err(Error::Dimension {
                left: self.n_points(),
                right: other.n_points(),
            });
        }
        Ok(())
    }

    /// Intersection pairing on the blown-up ruled surface:
    /// `dd' - ee' - sum mm'` on `F1`, `ab' + a'b - sum mm'` on `F0`.
    pub fn intersect(&self, other: &Self) -> Result<BigInt> {
        self.check_compatible(other)?;
        let head = match (self, other) {
            (RuledClass::F1 { d, e, .. }, RuledClass::F1 { d: d2, e: e2, .. }) => d * d2 - e * e2,
            (RuledClass::F0 { a, b, .. }, RuledClass::F0 { a: a2, b: b2, .. }) => a * b2 + a2 * b,
            _ => unreachable!(),
        };
        let tail: BigInt = self
            .mults()
            .iter()
            .zip(other.mults())
            .map(|(x, y)| x * y)
            .sum();
        Ok(head - tail)
    }

    pub fn self_intersection(&self) -> BigInt {
        self.intersect(self).expect("self-compatible")
    }

    /// `-K . L`: `3d - e - sum m` on `F1`, `2a + 2b - sum m` on `F0`.
    pub fn anticanonical_degree(&self) -> BigInt {
        let s: BigInt = self.mults().iter().sum();
        match self {
            RuledClass::F1 { d, e, .. } => BigInt::from(3) * d - e - s,
            RuledClass::F0 { a, b, .. } => BigInt::from(2) * (a + b) - s,
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mults = self
            .mults()
            .iter()
            .zip(other.mults())
            .map(|(x, y)| x + y)
            .collect();
        Ok(match (self, other) {
            (RuledClass::F1 { d, e, .. }, RuledClass::F1 { d: d2, e: e2, .. }) => {
                Self::f1(d + d2, e + e2, mults)
            }
            (RuledClass::F0 { a, b, .. }, RuledClass::F0 { a: a2, b: b2, .. }) => {
                Self::f0(a + a2, b + b2, mults)
            }
            _ => unreachable!(),
        })
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let mults = self.mults().iter().map(|m| m * k).collect();
        match self {
            RuledClass::F1 { d, e, .. } => Self::f1(d * k, e * k, mults),
            RuledClass::F0 { a, b, .. } => Self::f0(a * k, b * k, mults),
        }
    }

    pub fn with_mults(&self, mults: Vec<BigInt>) -> Self {
        let mut out = self.clone();
        *out.mults_mut() = mults;
        out
    }

    pub fn to_picard(&self) -> Result<PicardClass> {
        from_ruled(self)
    }
}

/// Embeds a ruled-surface class into the Picard lattice of a plane blowup.
///
/// `(d:e, m)_1` becomes `(d; e, m)`. `(a x b: m1,...,mr)_0` becomes
/// `(a+b-m1; a-m1, b-m1, m2,...,mr)`: blowing up one point of `F0` and
/// contracting the two rulings through it gives the plane blown up at two
/// points. Both embeddings add one point.
pub fn from_ruled(c: &RuledClass) -> Result<PicardClass> {
    match c {
        RuledClass::F1 { d, e, mults } => {
            let mut out = Vec::with_capacity(mults.len() + 1);
            out.push(e.clone());
            out.extend(mults.iter().cloned());
            Ok(PicardClass::new(d.clone(), out))
        }
        RuledClass::F0 { a, b, mults } => {
            let Some((m1, rest)) = mults.split_first() else {
                return Err(Error::Unsupported(
                    "an F0 class without blown-up points is not a plane blowup class".into(),
                ));
            };
            let mut out = Vec::with_capacity(mults.len() + 1);
            out.push(a - m1);
            out.push(b - m1);
            out.extend(rest.iter().cloned());
            Ok(PicardClass::new(a + b - m1, out))
        }
    }
}

/// Inverse of [`from_ruled`].
pub fn to_ruled(l: &PicardClass, target: Surface) -> Result<RuledClass> {
    let need = match target {
        Surface::F1 => 1,
        Surface::F0 => 2,
    };
    if l.r() < need {
        return Err(Error::Precondition(format!(
            "conversion to {target:?} needs at least {need} points, class has {}",
            l.r()
        )));
    }
    let m = l.mults();
    Ok(match target {
        Surface::F1 => RuledClass::f1(l.degree().clone(), m[0].clone(), m[1..].to_vec()),
        Surface::F0 => {
            let (d, x, y) = (l.degree(), &m[0], &m[1]);
            let m1 = d - x - y;
            let mut mults = Vec::with_capacity(m.len() - 1);
            mults.push(m1);
            mults.extend(m[2..].iter().cloned());
            RuledClass::f0(d - y, d - x, mults)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(d: i64, m: &[i64]) -> PicardClass {
        PicardClass::from_ints(d, m)
    }

    #[test]
    fn intersection_examples() {
        assert_eq!(p(1, &[]).intersect(&p(1, &[])).unwrap(), 1.into());
        let cubic = p(3, &[1; 9]);
        assert_eq!(cubic.intersect(&cubic).unwrap(), 0.into());
        let l = p(5, &[2, 1]);
        assert_eq!(l.intersect(&p(0, &[1, 0])).unwrap(), (-2).into());
        assert_eq!(l.mult(0), &BigInt::from(2));
        assert_eq!(
            l.intersect(&PicardClass::exceptional(2, 0)).unwrap(),
            2.into()
        );
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = p(1, &[1]).intersect(&p(1, &[1, 1])).unwrap_err();
        assert_eq!(err, Error::Dimension { left: 1, right: 2 });
    }

    #[test]
    fn canonical_class_examples() {
        assert_eq!(canonical_class(0), p(-3, &[]));
        assert_eq!(canonical_class(2), p(-3, &[-1, -1]));
        assert_eq!(
            canonical_class(9).intersect(&p(3, &[1; 9])).unwrap(),
            0.into()
        );
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi(3, 1, 9), 1.into());
        assert_eq!(chi(0, 0, 17), 1.into());
        assert_eq!(chi(4, 2, 5), 0.into());
        assert_eq!(chi_class(&p(3, &[1; 9])), 1.into());
        assert_eq!(chi_class(&p(0, &[])), 1.into());
        assert_eq!(chi_class(&p(4, &[2; 5])), 0.into());
    }

    #[test]
    fn chi_class_matches_uniform_formula() {
        for d in 0..=50i64 {
            for mu in 0..=10i64 {
                for r in 0..=50usize {
                    let l = PicardClass::uniform(d, mu, r);
                    assert_eq!(chi_class(&l), chi(d, mu, r as i64), "({d}; {mu}^{r})");
                }
            }
        }
    }

    #[test]
    fn nagata_deficit_examples() {
        let eq = nagata_deficit(&p(3, &[1; 9])).unwrap();
        assert_eq!(eq.sign, Sign::Zero);
        assert_eq!(eq.mult_sum_squared, 81.into());
        assert_eq!(eq.r_degree_squared, 81.into());
        assert_eq!(nagata_deficit(&p(3, &[1; 10])).unwrap().sign, Sign::Positive);
        let strict = nagata_deficit(&p(19, &[6; 10])).unwrap();
        assert_eq!(strict.sign, Sign::Negative);
        assert_eq!(strict.mult_sum_squared, 3600.into());
        assert_eq!(strict.r_degree_squared, 3610.into());
        assert_eq!(nagata_deficit(&p(0, &[-1, 0])).unwrap().sign, Sign::Negative);
        assert!(nagata_deficit(&p(-1, &[0])).is_err());
    }

    #[test]
    fn ruled_conversion_examples() {
        let c = RuledClass::f0_ints(1, 1, &[1]);
        assert_eq!(from_ruled(&c).unwrap(), p(1, &[0, 0]));
        let c = RuledClass::f0_ints(2, 3, &[1]);
        let l = from_ruled(&c).unwrap();
        assert_eq!(l, p(4, &[1, 2]));
        assert_eq!(l.self_intersection(), 11.into());
        assert_eq!(c.self_intersection(), 11.into());
        let c = RuledClass::f1_ints(5, 3, &[2, 2]);
        assert_eq!(from_ruled(&c).unwrap(), p(5, &[3, 2, 2]));

        assert_eq!(to_ruled(&p(5, &[3, 2, 2]), Surface::F1).unwrap(), c);
        assert_eq!(
            to_ruled(&p(1, &[0, 0]), Surface::F0).unwrap(),
            RuledClass::f0_ints(1, 1, &[1])
        );
        assert_eq!(
            to_ruled(&p(3, &[1; 9]), Surface::F1).unwrap(),
            RuledClass::f1_ints(3, 1, &[1; 8])
        );
    }

    #[test]
    fn conversion_errors() {
        assert!(matches!(
            from_ruled(&RuledClass::f0_ints(1, 1, &[])),
            Err(Error::Unsupported(_))
        ));
        assert!(to_ruled(&p(1, &[]), Surface::F1).is_err());
        assert!(to_ruled(&p(1, &[1]), Surface::F0).is_err());
    }

    #[test]
    fn f1_product_notation() {
        assert_eq!(
            RuledClass::f1_product(5, 2, vec![]),
            RuledClass::f1_ints(5, 3, &[])
        );
    }
}
