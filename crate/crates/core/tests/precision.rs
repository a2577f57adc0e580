//! Exact decisions against 256-bit floating evaluation.

use astro_float::{BigFloat, RoundingMode};
use nagata_core::nagata::{case2_ceiling, profile, Coverage};
use nagata_core::{isqrt, nagata_deficit, PicardClass, QuadraticExpr, Sign};
use num_bigint::BigInt;
use proptest::prelude::*;

const P: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

fn bf(x: i64) -> BigFloat {
    BigFloat::from_i64(x, P)
}

fn sqrt(x: u64) -> BigFloat {
    BigFloat::from_u64(x, P).sqrt(P, RM)
}

/// `Some(sign)` unless `|x| < 2^-200`.
fn float_sign(x: &BigFloat) -> Option<Sign> {
    let tiny = BigFloat::from_f64(2f64.powi(-200), P);
    if x.abs().cmp(&tiny).unwrap() < 0 {
        None
    } else if x.is_negative() {
        Some(Sign::Negative)
    } else {
        Some(Sign::Positive)
    }
}

fn deficit_float(d: i64, mults: &[i64]) -> BigFloat {
    let sum: i64 = mults.iter().sum();
    let r = mults.len() as u64;
    bf(sum).sub(&sqrt(r).mul(&bf(d), P, RM), P, RM)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn deficit_sign_matches_floats(
        d in 0i64..1_000_000,
        mults in prop::collection::vec(0i64..1_000_000, 1..60),
    ) {
        let l = PicardClass::from_ints(d, &mults);
        let exact = nagata_deficit(&l).unwrap().sign;
        if let Some(s) = float_sign(&deficit_float(d, &mults)) {
            prop_assert_eq!(exact, s);
        }
    }

    #[test]
    fn near_misses_on_uniform_classes(r in 2u64..500, mu in 1i64..100_000) {
        // d closest to sqrt(r) mu from both sides
        let rmu2 = BigInt::from(r) * mu * mu;
        let base: i64 = isqrt(&rmu2).try_into().unwrap();
        for d in [base, base + 1] {
            let mults = vec![mu; r as usize];
            let exact = nagata_deficit(&PicardClass::from_ints(d, &mults)).unwrap().sign;
            match float_sign(&deficit_float(d, &mults)) {
                Some(s) => prop_assert_eq!(exact, s),
                None => prop_assert_eq!(exact, Sign::Zero),
            }
        }
    }
}

#[test]
fn coverage_agrees_with_floats() {
    let ceiling = sqrt(2).mul(&bf(2), P, RM).sub(&bf(2), P, RM);
    let mut strict = 0;
    for r in 10..=10_000u64 {
        let p = profile(r).unwrap();
        if p.square {
            assert_eq!(p.coverage, Coverage::Square);
            continue;
        }
        let eps = sqrt(r).sub(&bf(p.k as i64), P, RM);
        let expected = if p.k < 3 {
            Coverage::NotCovered
        } else if p.alpha % 2 == 1 {
            let bound = bf(1).div(&sqrt(2 * p.k - 1), P, RM);
            let diff = eps.sub(&bound, P, RM);
            let s = float_sign(&diff).expect("tie in case 1");
            strict += 1;
            if s == Sign::Positive {
                Coverage::Case1
            } else {
                Coverage::NotCovered
            }
        } else if p.alpha >= 6 {
            let diff = eps.sub(&ceiling, P, RM);
            let s = float_sign(&diff).expect("tie in case 2");
            strict += 1;
            if s == Sign::Negative {
                Coverage::Case2
            } else {
                Coverage::NotCovered
            }
        } else {
            Coverage::NotCovered
        };
        assert_eq!(p.coverage, expected, "r = {r}");
    }
    assert!(strict > 9000);
}

#[test]
fn case2_ceiling_matches_floats() {
    let f = sqrt(2).mul(&bf(2), P, RM).sub(&bf(2), P, RM);
    let lo = BigFloat::from_f64(0.828_427_124_746_19, P);
    let hi = BigFloat::from_f64(0.828_427_124_746_2, P);
    assert!(f.cmp(&lo).unwrap() > 0 && f.cmp(&hi).unwrap() < 0);
    assert!(case2_ceiling() > QuadraticExpr::ratio(82_842_712, 100_000_000));
    assert!(case2_ceiling() < QuadraticExpr::ratio(82_842_713, 100_000_000));
}
