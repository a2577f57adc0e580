//! (-1)-classes and numerical nefness on the plane blown up at `r <= 8`
//! general points.
//!
//! For `r <= 8` the blowup is a (weak) del Pezzo surface and its effective
//! cone is generated by the (-1)-curves when `r >= 2`, together with `E_1`
//! and `H - E_1` when `r = 1` (and `H` when `r = 0`). A class is therefore
//! nef iff it meets every member of that finite family nonnegatively.
//!
//! # Enumeration bound
//!
//! A (-1)-class `(d; m)` satisfies `sum m = 3d - 1` and `sum m^2 = d^2 + 1`.
//! Cauchy-Schwarz gives `(3d - 1)^2 <= r (d^2 + 1)`, i.e.
//! `(9 - r) d^2 - 6d + 1 - r <= 0`. For `r <= 8` the leading coefficient is
//! at least 1, so `|d| >= 20` makes the left side at least
//! `20|d| - 6|d| - 7 > 0`; scanning `|d| < 20` is exhaustive. Given `d`, the
//! multiplicities are enumerated one at a time: with `k` entries left to
//! fill, remaining sum `t` and remaining square sum `q`, a completion
//! exists only if `t^2 <= k q` (Cauchy-Schwarz again) and `t = q mod 2`
//! (since `m^2 = m mod 2`), and each entry satisfies `m^2 <= q`.

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::cremona::rule1;
use crate::error::{Error, Result};
use crate::picard::{from_ruled, PicardClass, RuledClass};

pub const MAX_POINTS: usize = 8;

const DEGREE_SCAN: i64 = 20;

fn fill(k: usize, t: i64, q: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if k == 0 {
        if t == 0 && q == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    if t * t > k as i64 * q || (t - q).rem_euclid(2) != 0 {
        return;
    }
    let bound = (q as f64).sqrt() as i64 + 1;
    for m in -bound..=bound {
        if m * m > q {
            continue;
        }
        prefix.push(m);
        fill(k - 1, t - m, q - m * m, prefix, out);
        prefix.pop();
    }
}

/// All classes `C` on `r` points with `C^2 = -1` and `K.C = -1`, sorted and
/// duplicate-free. Counts for `r = 1..8` are 1, 3, 6, 10, 16, 27, 56, 240.
pub fn minus_one_classes(r: usize) -> Result<Vec<PicardClass>> {
    if r > MAX_POINTS {
        return Err(Error::Unsupported(format!(
            "(-1)-classes on {r} points: the set is infinite beyond 8 points"
        )));
    }
    let r_i = r as i64;
    let mut out = Vec::new();
    for d in -DEGREE_SCAN..=DEGREE_SCAN {
        if (9 - r_i) * d * d - 6 * d + 1 - r_i > 0 {
            continue;
        }
        let mut vecs = Vec::new();
        fill(r, 3 * d - 1, d * d + 1, &mut Vec::with_capacity(r), &mut vecs);
        out.extend(vecs.into_iter().map(|m| PicardClass::from_ints(d, &m)));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// The finite family a class is tested against in [`is_nef_small`].
pub fn nef_test_family(r: usize) -> Result<Vec<PicardClass>> {
    let mut family = minus_one_classes(r)?;
    family.push(PicardClass::line(r));
    if r <= 2 {
        for i in 0..r {
            family.push(PicardClass::exceptional(r, i));
            for j in i + 1..r {
                let mut m = vec![BigInt::from(0); r];
                m[i] = 1.into();
                m[j] = 1.into();
                family.push(PicardClass::new(1, m));
            }
        }
    }
    if r == 1 {
        family.push(PicardClass::from_ints(1, &[1]));
    }
    family.sort();
    family.dedup();
    Ok(family)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NefVerdict {
    pub nef: bool,
    /// Family member with the most negative pairing (smallest in class
    /// order among ties).
    pub violator: Option<PicardClass>,
    pub tested_count: usize,
}

/// Numerical nef test for `r <= 8`.
pub fn is_nef_small(l: &PicardClass) -> Result<NefVerdict> {
    let family = nef_test_family(l.r())?;
    let mut worst: Option<(BigInt, &PicardClass)> = None;
    for c in &family {
        let v = l.intersect_unchecked(c);
        if v.is_negative() && worst.as_ref().is_none_or(|(w, _)| v < *w) {
            worst = Some((v, c));
        }
    }
    Ok(NefVerdict {
        nef: worst.is_none(),
        violator: worst.map(|(_, c)| c.clone()),
        tested_count: family.len(),
    })
}

/// Members of the test family meeting `l` negatively.
pub fn negative_family_members(l: &PicardClass) -> Result<Vec<PicardClass>> {
    Ok(nef_test_family(l.r())?
        .into_iter()
        .filter(|c| l.intersect_unchecked(c).is_negative())
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaBranch {
    /// `b >= c`: `(a x b: c,c) = ((a-c) x (b-c): 0,0) + c (1 x 1: 1,1)`.
    Decomposition,
    /// `c > b`: rule 1 at `s = 1` gives `((a+b-2c) x b: b-c, b-c)`.
    Cremona,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaVerdict {
    Nef,
    NegativeOnlyOnRulings,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// The class after ordering the factors so that `a >= b`.
    pub class: RuledClass,
    pub swapped: bool,
    pub branch: LemmaBranch,
    pub verdict: LemmaVerdict,
    /// Decomposition summands, or the single Cremona image.
    pub witness: Vec<RuledClass>,
    pub picard: PicardClass,
    pub nef_check: NefVerdict,
    /// Family members meeting the class negatively.
    pub negative_on: Vec<PicardClass>,
    /// The proper transforms of the four rulings through the two points.
    pub rulings: Vec<PicardClass>,
    /// The branch verdict agrees with the nef test.
    pub consistent: bool,
}

/// Proper transforms of the two rulings through each of the two points of
/// an `F0` blown up twice, in plane coordinates.
pub fn ruling_transforms() -> Vec<PicardClass> {
    [(1, 0, 1, 0), (0, 1, 1, 0), (1, 0, 0, 1), (0, 1, 0, 1)]
        .into_iter()
        .map(|(a, b, m1, m2)| {
            from_ruled(&RuledClass::f0_ints(a, b, &[m1, m2])).expect("two points")
        })
        .collect()
}

/// Classifies `(a x b: c, c)_0` on `F0` blown up at two general points.
pub fn lemma_step5(a: i64, b: i64, c: i64) -> Result<LemmaReport> {
    if a < 0 || b < 0 || c < 0 {
        return Err(Error::Precondition(format!(
            "a, b, c must be nonnegative, got ({a}, {b}, {c})"
        )));
    }
    if a + b - 2 * c < 0 {
        return Err(Error::Precondition(format!(
            "a + b - 2c = {} < 0",
            a + b - 2 * c
        )));
    }
    let swapped = a < b;
    let (a, b) = if swapped { (b, a) } else { (a, b) };
    let class = RuledClass::f0_ints(a, b, &[c, c]);
    let (branch, verdict, witness) = if b >= c {
        (
            LemmaBranch::Decomposition,
            LemmaVerdict::Nef,
            vec![
                RuledClass::f0_ints(a - c, b - c, &[0, 0]),
                RuledClass::f0_ints(1, 1, &[1, 1]).scale(&c.into()),
            ],
        )
    } else {
        (
            LemmaBranch::Cremona,
            LemmaVerdict::NegativeOnlyOnRulings,
            vec![rule1(&class, 1, None)?],
        )
    };
    let picard = from_ruled(&class)?;
    let nef_check = is_nef_small(&picard)?;
    let negative_on = negative_family_members(&picard)?;
    let rulings = ruling_transforms();
    let consistent = match verdict {
        LemmaVerdict::Nef => nef_check.nef,
        LemmaVerdict::NegativeOnlyOnRulings => {
            !nef_check.nef && negative_on.iter().all(|c| rulings.contains(c))
        }
    };
    Ok(LemmaReport {
        class,
        swapped,
        branch,
        verdict,
        witness,
        picard,
        nef_check,
        negative_on,
        rulings,
        consistent,
    })
}
